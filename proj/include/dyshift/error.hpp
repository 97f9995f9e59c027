#ifndef DYSHIFT_ERROR_HPP
#define DYSHIFT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dyshift {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dyadic index or pair lives at a depth incompatible with the operation.
class DepthMismatch : public Error {
 public:
  using Error::Error;
};

/// Arguments outside the documented domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A construction cannot be carried out with the requested parameters.
/// The message carries a hint (e.g. the depth that would be required).
class Infeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace dyshift

#endif  // DYSHIFT_ERROR_HPP
