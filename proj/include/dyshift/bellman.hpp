#ifndef DYSHIFT_BELLMAN_HPP
#define DYSHIFT_BELLMAN_HPP

// Closed-form Bellman function of the local weak-type (1,1) problem for
// positive dyadic shifts, its lambda-homogeneous reduction
//   M(x, y) = B(x, y, 1),
// and numerical checkers for the properties it must have.

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "dyshift/error.hpp"

namespace dyshift {

/// (t, A, lambda): function average, normalized Carleson mass, threshold.
struct BellmanPoint {
  double t = 0.0;
  double A = 0.0;
  double lambda = 1.0;
};

/// (x, y) = (t / lambda, A).
struct ReducedPoint {
  double x = 0.0;
  double y = 0.0;
};

enum class Regime { kLowerTriangle, kMiddleWedge, kObstacle };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::kLowerTriangle:
      return "lower_triangle";
    case Regime::kMiddleWedge:
      return "middle_wedge";
    case Regime::kObstacle:
      return "obstacle";
  }
  return "unknown";
}

namespace detail {

inline void require_bellman_domain(const BellmanPoint& p) {
  if (!(p.t >= 0.0) || !std::isfinite(p.t) || !(p.A >= 0.0 && p.A <= 1.0) ||
      !std::isfinite(p.lambda)) {
    throw DomainError("Bellman point outside {t >= 0, 0 <= A <= 1, lambda finite}");
  }
}

inline void require_reduced_domain(const ReducedPoint& q) {
  if (!(q.x >= 0.0) || !std::isfinite(q.x) || !(q.y >= 0.0 && q.y <= 1.0)) {
    throw DomainError("reduced point outside {x >= 0, 0 <= y <= 1}");
  }
}

inline double lower_branch(double x, double y) {
  const double s = x + y;
  return s == 0.0 ? 0.0 : 2.0 * x * y / s;
}

inline double wedge_branch(double x, double y) { return std::sqrt(x * y); }

inline Regime reduced_regime(double x, double y) {
  if (x <= y && x * y <= 1.0) return Regime::kLowerTriangle;
  if (y <= x && x * y <= 1.0) return Regime::kMiddleWedge;
  return Regime::kObstacle;
}

/// M without domain checks; the branches extend past y = 1, which the
/// central differences at the top edge rely on.
inline double reduced_formula(double x, double y) {
  switch (reduced_regime(x, y)) {
    case Regime::kLowerTriangle:
      return lower_branch(x, y);
    case Regime::kMiddleWedge:
      return wedge_branch(x, y);
    case Regime::kObstacle:
      break;
  }
  return 1.0;
}

}  // namespace detail

/// M(x, y): 2xy/(x+y) on 0 <= x <= y <= 1, sqrt(xy) on y <= min(x, 1/x),
/// and 1 on and beyond the hyperbola xy = 1.
inline double reduced_value(const ReducedPoint& q) {
  detail::require_reduced_domain(q);
  return detail::reduced_formula(q.x, q.y);
}

inline Regime classify_regime(const BellmanPoint& p) {
  detail::require_bellman_domain(p);
  if (p.lambda < 0.0) return Regime::kObstacle;
  if (p.lambda == 0.0) {
    // limits of the two explicit branches when the shift vanishes identically
    if (p.t == 0.0) return Regime::kLowerTriangle;
    if (p.A == 0.0) return Regime::kMiddleWedge;
    return Regime::kObstacle;
  }
  return detail::reduced_regime(p.t / p.lambda, p.A);
}

/// Exact supremum of |{A f > lambda}| over admissible pairs with average t
/// and mass A. At lambda = 0 the value is 1 unless t = 0 or A = 0.
inline double bellman_value(const BellmanPoint& p) {
  detail::require_bellman_domain(p);
  if (p.lambda < 0.0) return 1.0;
  if (p.lambda == 0.0) return (p.t > 0.0 && p.A > 0.0) ? 1.0 : 0.0;
  return detail::reduced_formula(p.t / p.lambda, p.A);
}

/// B(t, A, lambda) - (B(t1, A1, lambda') + B(t2, A2, lambda')) / 2 where
/// t = (t1 + t2)/2, A = (A1 + A2)/2 + alpha, lambda' = lambda - alpha t.
inline double check_main_inequality(double t1, double t2, double a1, double a2, double alpha,
                                    double lambda) {
  if (!(t1 >= 0.0 && t2 >= 0.0) || !(a1 >= 0.0 && a1 <= 1.0) || !(a2 >= 0.0 && a2 <= 1.0) ||
      !(alpha >= 0.0)) {
    throw DomainError("main inequality needs t1, t2, alpha >= 0 and A1, A2 in [0, 1]");
  }
  const double t = 0.5 * (t1 + t2);
  const double a = 0.5 * (a1 + a2) + alpha;
  if (a > 1.0) throw DomainError("(A1 + A2)/2 + alpha exceeds 1");
  const double shifted = lambda - alpha * t;
  return bellman_value({t, a, lambda}) -
         0.5 * (bellman_value({t1, a1, shifted}) + bellman_value({t2, a2, shifted}));
}

inline double check_homogeneity(const BellmanPoint& p, double eta) {
  if (!(eta > 0.0)) throw DomainError("homogeneity factor must be positive");
  return std::abs(bellman_value({eta * p.t, p.A, eta * p.lambda}) - bellman_value(p));
}

/// Closed-form gradient (M_x, M_y) of the branch containing q.
inline std::array<double, 2> reduced_gradient(const ReducedPoint& q) {
  const double x = q.x, y = q.y;
  switch (detail::reduced_regime(x, y)) {
    case Regime::kLowerTriangle: {
      const double s2 = (x + y) * (x + y);
      return {2.0 * y * y / s2, 2.0 * x * x / s2};
    }
    case Regime::kMiddleWedge:
      return {0.5 * std::sqrt(y / x), 0.5 * std::sqrt(x / y)};
    case Regime::kObstacle:
      break;
  }
  return {0.0, 0.0};
}

/// Closed-form M_y - x^2 M_x.
inline double characteristic_derivative(const ReducedPoint& q) {
  const double x = q.x, y = q.y;
  switch (detail::reduced_regime(x, y)) {
    case Regime::kLowerTriangle:
      return 2.0 * x * x * (1.0 - y * y) / ((x + y) * (x + y));
    case Regime::kMiddleWedge:
      return 0.5 * std::sqrt(x / y) * (1.0 - x * y);
    case Regime::kObstacle:
      break;
  }
  return 0.0;
}

/// Central finite-difference estimate of M_y - x^2 M_x at q. M has a kink
/// on xy = 1, so off the hyperbola the step shrinks until the stencil stays
/// on one side of it; on the hyperbola the two one-sided slopes cancel along
/// the characteristic direction and the full step is used.
inline double check_characteristic_monotonicity(const ReducedPoint& q, double h = 1e-5) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const auto m = detail::reduced_formula;
  const double gap = std::abs(1.0 - q.x * q.y);
  if (gap > 0.0) {
    const double reach = (q.x + q.y + h) * h;  // bound on |xy - (x +- h)(y +- h)|
    if (reach >= gap) h *= 0.5 * gap / reach;
  }
  const double mx = (m(q.x + h, q.y) - m(q.x - h, q.y)) / (2.0 * h);
  const double my = (m(q.x, q.y + h) - m(q.x, q.y - h)) / (2.0 * h);
  return my - q.x * q.x * mx;
}

/// Exact solution of x' = -x^2, y' = 1 after time s.
inline ReducedPoint characteristic_flow(const ReducedPoint& q, double s) {
  const double denom = 1.0 + s * q.x;
  if (!(denom > 0.0)) throw DomainError("characteristic blows up before time s");
  return {q.x / denom, q.y + s};
}

inline double check_midpoint_concavity(const ReducedPoint& q1, const ReducedPoint& q2) {
  const ReducedPoint mid{0.5 * (q1.x + q2.x), 0.5 * (q1.y + q2.y)};
  return reduced_value(mid) - 0.5 * (reduced_value(q1) + reduced_value(q2));
}

/// M(s x, s y) - s M(x, y) for s in [0, 1].
inline double check_superlinearity(const ReducedPoint& q, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("superlinearity scale must lie in [0, 1]");
  return reduced_value({s * q.x, s * q.y}) - s * reduced_value(q);
}

/// Euclidean norm of the difference between the one-sided gradients of the
/// two branches meeting on the seam y = x, each differenced into its own
/// region.
inline double check_c1_matching(double x, double h = 1e-5) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("seam abscissa must lie in (0, 1]");
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const double y = x;
  const auto low = detail::lower_branch;
  const auto wedge = detail::wedge_branch;
  // lower triangle sits at x <= y, the wedge at y <= x; three-point
  // one-sided stencils, second order in h
  auto ahead = [h](auto f0, auto f1, auto f2) { return (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h); };
  const double low_x = -ahead(low(x, y), low(x - h, y), low(x - 2 * h, y));
  const double low_y = ahead(low(x, y), low(x, y + h), low(x, y + 2 * h));
  const double wedge_x = ahead(wedge(x, y), wedge(x + h, y), wedge(x + 2 * h, y));
  const double wedge_y = -ahead(wedge(x, y), wedge(x, y - h), wedge(x, y - 2 * h));
  return std::hypot(low_x - wedge_x, low_y - wedge_y);
}

}  // namespace dyshift

#endif  // DYSHIFT_BELLMAN_HPP
