#ifndef DYSHIFT_DYSHIFT_HPP
#define DYSHIFT_DYSHIFT_HPP

#include "dyshift/error.hpp"
#include "dyshift/dyadic_core.hpp"
#include "dyshift/dyadic_graph.hpp"
#include "dyshift/bellman.hpp"
#include "dyshift/extremizer.hpp"
#include "dyshift/dp_oracle.hpp"
#include "dyshift/verification.hpp"
#include "dyshift/io.hpp"

#endif  // DYSHIFT_DYSHIFT_HPP
