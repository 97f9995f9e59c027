#ifndef DYSHIFT_DP_ORACLE_HPP
#define DYSHIFT_DP_ORACLE_HPP

// Lower bounds for E(x, A) = B(x, A, 1) by value iteration over on-grid
// strategies: one dyadic split with a root coefficient alpha sends (x, A) to
// the two halves (x -+ k dx, A1), (x + k dx, A2) with A = (A1 + A2)/2 + alpha
// at threshold mu = 1 - alpha x, and homogeneity renormalizes the halves back
// to threshold 1.
//
// Grid steps are reciprocals of integers, so x'/mu is floored to a node in
// exact integer arithmetic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "dyshift/bellman.hpp"
#include "dyshift/error.hpp"

namespace dyshift {

struct DpParams {
  double dx = 1.0 / 16.0;
  double da = 1.0 / 16.0;
  double x_max = 2.5;
  int iterations = 12;
};

class DpGrid {
 public:
  DpGrid() = default;

  explicit DpGrid(const DpParams& p) {
    auto reciprocal = [](double step, const char* name) {
      if (!(step > 0.0) || !std::isfinite(step)) {
        throw DomainError(std::string(name) + " must be positive");
      }
      const double r = 1.0 / step;
      const double n = std::round(r);
      if (std::abs(r - n) > 1e-9 * n || n > 4096.0) {
        throw DomainError(std::string(name) + " must be 1/m for an integer m <= 4096");
      }
      return static_cast<std::int64_t>(n);
    };
    mx_ = reciprocal(p.dx, "dx");
    ma_ = reciprocal(p.da, "da");
    if (!(p.x_max >= 2.0) || !std::isfinite(p.x_max)) throw DomainError("x_max must be at least 2");
    nx_ = static_cast<std::size_t>(std::floor(p.x_max * static_cast<double>(mx_) + 1e-9)) + 1;
    na_ = static_cast<std::size_t>(ma_) + 1;
    if (nx_ * na_ > 4'000'000) throw DomainError("grid too large");
    values_.assign(nx_ * na_, 0.0);
  }

  std::size_t nx() const { return nx_; }
  std::size_t na() const { return na_; }
  double dx() const { return 1.0 / static_cast<double>(mx_); }
  double da() const { return 1.0 / static_cast<double>(ma_); }
  double x(std::size_t i) const { return static_cast<double>(i) / static_cast<double>(mx_); }
  double a(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(ma_); }
  double x_max() const { return x(nx_ - 1); }
  int iteration() const { return iteration_; }

  double at(std::size_t i, std::size_t j) const { return values_[i * na_ + j]; }
  double& at(std::size_t i, std::size_t j) { return values_[i * na_ + j]; }
  const std::vector<double>& values() const { return values_; }

  std::int64_t x_denominator() const { return mx_; }
  std::int64_t a_denominator() const { return ma_; }

  /// Whether the last iteration had to take the coordinatewise monotone
  /// closure of the raw maximization.
  bool closure_applied() const { return closure_applied_; }

 private:
  friend DpGrid dp_iterate(const DpGrid& g);
  std::int64_t mx_ = 16, ma_ = 16;
  std::size_t nx_ = 0, na_ = 0;
  std::vector<double> values_;
  int iteration_ = 0;
  bool closure_applied_ = false;
};

/// E_0(x, A) = [x A > 1]: the constant function with a single root coefficient.
inline DpGrid dp_base(const DpParams& p) {
  DpGrid g(p);
  const std::int64_t mx = g.x_denominator(), ma = g.a_denominator();
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.na(); ++j) {
      // x A > 1 in integers: i j > mx ma
      g.at(i, j) = static_cast<std::int64_t>(i * j) > mx * ma ? 1.0 : 0.0;
    }
  }
  return g;
}

namespace detail {

inline bool monotone_in_coordinates(const DpGrid& g) {
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.na(); ++j) {
      if (i + 1 < g.nx() && g.at(i + 1, j) < g.at(i, j)) return false;
      if (j + 1 < g.na() && g.at(i, j + 1) < g.at(i, j)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// One step of value iteration, never below the previous values.
inline DpGrid dp_iterate(const DpGrid& g) {
  DpGrid out = g;
  const std::int64_t mx = g.x_denominator(), ma = g.a_denominator();
  const std::int64_t nx = static_cast<std::int64_t>(g.nx());
  const std::int64_t na = static_cast<std::int64_t>(g.na());
  const std::int64_t unit = mx * ma;  // mu = (unit - q i) / unit

  // E_n(x'/mu, A') for x' = xi dx; `num` = unit - q i > 0.
  auto renormalized = [&](std::int64_t xi, std::int64_t aj, std::int64_t num) {
    std::int64_t idx = xi * unit / num;  // floor, all terms nonnegative
    if (idx > nx - 1) idx = nx - 1;
    return g.at(static_cast<std::size_t>(idx), static_cast<std::size_t>(aj));
  };

  for (std::int64_t i = 0; i < nx; ++i) {
    for (std::int64_t j = 0; j < na; ++j) {
      double best = g.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (best >= 1.0) continue;
      const std::int64_t kmax = std::min(i, nx - 1 - i);
      for (std::int64_t q = 0; q <= j; ++q) {
        const std::int64_t num = unit - q * i;
        const std::int64_t pair_sum = 2 * (j - q);  // A1 + A2 in grid units
        for (std::int64_t a1 = std::max<std::int64_t>(0, pair_sum - (na - 1));
             a1 <= std::min(pair_sum, na - 1); ++a1) {
          const std::int64_t a2 = pair_sum - a1;
          for (std::int64_t k = 0; k <= kmax; ++k) {
            const std::int64_t x1 = i - k, x2 = i + k;
            double v1, v2;
            if (num < 0) {
              v1 = v2 = 1.0;
            } else if (num == 0) {
              // threshold exactly 0: exceeded wherever the half carries both
              // mass and coefficients
              v1 = (x1 > 0 && a1 > 0) ? 1.0 : 0.0;
              v2 = (x2 > 0 && a2 > 0) ? 1.0 : 0.0;
            } else {
              v1 = renormalized(x1, a1, num);
              v2 = renormalized(x2, a2, num);
            }
            best = std::max(best, 0.5 * (v1 + v2));
          }
        }
      }
      out.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = best;
    }
  }

  out.iteration_ = g.iteration_ + 1;
  out.closure_applied_ = false;
  if (!detail::monotone_in_coordinates(out)) {
    // B is nondecreasing in x and A, so the monotone closure stays below it
    out.closure_applied_ = true;
    for (std::size_t i = 0; i < out.nx(); ++i) {
      for (std::size_t j = 0; j < out.na(); ++j) {
        double v = out.at(i, j);
        if (i > 0) v = std::max(v, out.at(i - 1, j));
        if (j > 0) v = std::max(v, out.at(i, j - 1));
        out.at(i, j) = v;
      }
    }
  }
  return out;
}

/// Value at the grid node below (x, A), clamped to the grid.
inline double evaluate_offgrid(const DpGrid& g, double x, double a) {
  if (!(x >= 0.0) || !(a >= 0.0) || std::isnan(x) || std::isnan(a)) {
    throw DomainError("off-grid evaluation needs x, A >= 0");
  }
  auto floor_index = [](double v, std::int64_t denom, std::size_t n) {
    const double scaled = v * static_cast<double>(denom);
    if (scaled >= static_cast<double>(n - 1)) return n - 1;
    // nodes hit by rounding noise count as on-grid
    const double r = std::round(scaled);
    if (std::abs(scaled - r) <= 1e-9 * std::max(1.0, r)) return static_cast<std::size_t>(r);
    return static_cast<std::size_t>(std::floor(scaled));
  };
  return g.at(floor_index(x, g.x_denominator(), g.nx()), floor_index(a, g.a_denominator(), g.na()));
}

struct DpProbe {
  double x = 0.0;
  double a = 0.0;
  double target = 0.0;               // M(x, A)
  std::vector<double> values;        // E_n, n = 0..iterations
  double gap() const { return target - values.back(); }
};

struct DpReport {
  DpParams params;
  DpGrid grid;                           // final iterate
  std::vector<double> max_violation;     // max over nodes of E_n - M, per n
  std::vector<DpProbe> probes;
  bool monotone_in_n = true;             // E_{n+1} >= E_n at every node
  bool monotone_in_coordinates = true;   // stored grids nondecreasing in x and A
  int closure_iterations = 0;            // iterations that needed the monotone closure
  double worst_violation() const {
    return max_violation.empty() ? 0.0 : *std::max_element(max_violation.begin(), max_violation.end());
  }
};

inline double max_dominance_violation(const DpGrid& g) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.na(); ++j) {
      worst = std::max(worst, g.at(i, j) - reduced_value({g.x(i), g.a(j)}));
    }
  }
  return worst;
}

/// dp_base followed by `iterations` steps. `on_grid` sees every iterate,
/// starting with E_0.
inline DpReport dp_run(const DpParams& params, const std::vector<std::array<double, 2>>& probe_points,
                       const std::function<void(const DpGrid&)>& on_grid = {}) {
  if (params.iterations < 0) throw DomainError("iteration count must be nonnegative");
  DpReport rep;
  rep.params = params;
  DpGrid g = dp_base(params);
  for (const auto& p : probe_points) {
    DpProbe probe;
    probe.x = p[0];
    probe.a = p[1];
    probe.target = reduced_value({p[0], std::min(p[1], 1.0)});
    rep.probes.push_back(probe);
  }
  auto record = [&](const DpGrid& cur) {
    rep.max_violation.push_back(max_dominance_violation(cur));
    rep.monotone_in_coordinates = rep.monotone_in_coordinates && detail::monotone_in_coordinates(cur);
    for (auto& probe : rep.probes) probe.values.push_back(evaluate_offgrid(cur, probe.x, probe.a));
    if (on_grid) on_grid(cur);
  };
  record(g);
  for (int n = 0; n < params.iterations; ++n) {
    DpGrid next = dp_iterate(g);
    for (std::size_t k = 0; k < next.values().size(); ++k) {
      if (next.values()[k] < g.values()[k]) rep.monotone_in_n = false;
    }
    if (next.closure_applied()) ++rep.closure_iterations;
    g = std::move(next);
    record(g);
  }
  rep.grid = std::move(g);
  return rep;
}

}  // namespace dyshift

#endif  // DYSHIFT_DP_ORACLE_HPP
