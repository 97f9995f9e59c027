#ifndef DYSHIFT_EXTREMIZER_HPP
#define DYSHIFT_EXTREMIZER_HPP

// Near-extremizing (f, alpha) pairs:
//  * obstacle-boundary examples with measure 1 - 2^-n on the hyperbola xy = 1,
//  * constant pairs past the obstacle,
//  * the self-similar step that turns a pair at average x(1+eps)/(1-eps) + 2eps
//    and mass 1 into one at average x and mass 1, losing a factor x/(x + 2eps)
//    in superlevel measure,
//  * the iterated construction reaching measure 2x/(x+1) + O(eps),
// together with the closed-form iteration, product and integral quantities
// that describe the limit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dyshift/dyadic_core.hpp"
#include "dyshift/dyadic_graph.hpp"
#include "dyshift/error.hpp"

namespace dyshift {

struct TruncationReport {
  int depth_used = 0;
  int bits = 0;
  int generations = -1;              // compressed pairs only
  double mass_error_bound = 0.0;     // |total mass - target mass|
  double bit_error_bound = 0.0;      // mass of binary digits dropped from theta, summed over steps
  double average_error = 0.0;        // |average - target_x|
  double measure_slack = 0.0;        // bound on |achieved - measure of the untruncated object|
  int fixed_point_iterations = 0;
  double fixed_point_change = 0.0;   // last L1 change of the T iteration
  double contraction_ratio = 0.0;    // largest observed ratio of successive changes
};

/// A constructed (f, alpha) pair. Dense pairs hold the whole object in
/// `pair`; compressed pairs hold it in `graph` (evaluated under `cutoff`) and
/// keep a shallow dense view in `pair`.
struct ExtremizerPair {
  std::string kind;
  DyadicPair pair;
  std::optional<DyadicGraph> graph;
  Cutoff cutoff;
  double target_x = 0.0;
  double eps = 0.0;
  double achieved_measure = 0.0;
  TruncationReport truncation;

  bool compressed() const { return graph.has_value(); }

  double average() const { return graph ? graph->average() : dyshift::average(pair.f); }
  double total_mass() const { return graph ? graph->total_mass() : dyshift::total_mass(pair.alpha); }
  double carleson_constant() const {
    return graph ? graph->carleson_constant() : dyshift::carleson_constant(pair.alpha);
  }

  /// |{A f > lambda}| of the stored (truncated) object.
  double measure(double lambda) const {
    if (graph) return graph->superlevel_measure(lambda, cutoff).truncated;
    return superlevel_measure(apply_shift(pair.f, pair.alpha), lambda);
  }
};

/// Depth-n pair on the hyperbola xy = 1: f = 2^n x/(2^n - 1) on [0, 1 - 2^-n)
/// and alpha = y/(1 - 2^-n) on each of the first 2^n - 1 leaves.
inline ExtremizerPair build_easy_obstacle(double x, int n) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("easy obstacle needs x > 0");
  if (n < 1 || n > kMaxDenseDepth) {
    throw DomainError("easy obstacle depth must lie in [1, " + std::to_string(kMaxDenseDepth) + "]");
  }
  const double y = 1.0 / x;
  const double support = 1.0 - std::ldexp(1.0, -n);
  if (y > support) {
    throw Infeasible("y = 1/x = " + std::to_string(y) + " exceeds 1 - 2^-n = " +
                     std::to_string(support) + "; Carleson constant would pass 1 (need x >= " +
                     std::to_string(1.0 / support) + " or a larger n)");
  }
  const std::size_t leaves = std::size_t{1} << n;
  const double height = std::ldexp(x, n) / static_cast<double>(leaves - 1);
  const double coeff = y / support;
  std::vector<double> f(leaves, height);
  f.back() = 0.0;
  CarlesonSequence::Map m;
  for (std::size_t k = 0; k + 1 < leaves; ++k) m.emplace(DyadicIndex(n, k), coeff);

  ExtremizerPair out;
  out.kind = "easy";
  out.pair = {StepFunction(n, std::move(f)), CarlesonSequence(n, std::move(m))};
  out.target_x = x;
  out.achieved_measure = out.measure(1.0);
  out.truncation.depth_used = n;
  out.truncation.average_error = std::abs(out.average() - x);
  out.truncation.mass_error_bound = std::abs(out.total_mass() - y);
  return out;
}

/// Depth-0 pair f = x, alpha_root = y, so that A f = xy everywhere.
inline ExtremizerPair build_constant_pair(double x, double y) {
  if (!(x >= 0.0) || !std::isfinite(x) || !(y >= 0.0 && y <= 1.0)) {
    throw DomainError("constant pair needs x >= 0 and 0 <= y <= 1");
  }
  ExtremizerPair out;
  out.kind = "constant";
  out.pair = {StepFunction(0, {x}), CarlesonSequence::single(0, DyadicIndex::root(), y)};
  out.target_x = x;
  out.achieved_measure = out.measure(1.0);
  return out;
}

/// x_0 = x, x_{n+1} = x_n (1+eps)/(1-eps) + 2 eps, stopped at the first
/// x_N >= 1.
struct IterationPlan {
  double x0 = 0.0;
  double eps = 0.0;
  double delta = 1.0;
  std::vector<double> xs;
  int steps = 0;
  bool degenerate = false;  // at most one step: eps too coarse to resolve the iteration
};

inline IterationPlan iterate_x_sequence(double x, double eps) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("iteration needs x > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("iteration needs 0 < eps < 1");
  IterationPlan plan;
  plan.x0 = x;
  plan.eps = eps;
  plan.delta = (1.0 + eps) / (1.0 - eps);
  plan.xs.push_back(x);
  while (plan.xs.back() < 1.0) {
    if (plan.xs.size() > 100'000'000) throw DomainError("iteration does not terminate");
    plan.xs.push_back(plan.xs.back() * plan.delta + 2.0 * eps);
  }
  plan.steps = static_cast<int>(plan.xs.size()) - 1;
  plan.degenerate = x < 1.0 && plan.steps <= 1;
  return plan;
}

/// Solution of the recurrence: its fixed point is -(1 - eps), so
/// x_n = delta^n (x + 1 - eps) - (1 - eps).
inline double iterate_closed_form(double x, double eps, int n) {
  const double delta = (1.0 + eps) / (1.0 - eps);
  return std::pow(delta, n) * (x + 1.0 - eps) - (1.0 - eps);
}

/// prod_{j=0}^{N} x_j / (x_j + 2 eps).
inline double product_lower_bound(const IterationPlan& plan) {
  double p = 1.0;
  for (double xj : plan.xs) p *= xj / (xj + 2.0 * plan.eps);
  return p;
}

struct IntegralCheck {
  double closed_form = 0.0;
  double quadrature = 0.0;
};

/// int_1^{2/(1+x)} dy / (y (1 - y(x+1))), in closed form log(2x/(x+1)) and by
/// Gauss-Kronrod quadrature.
inline IntegralCheck limit_integral(double x) {
  if (!(x > 0.0 && x <= 1.0)) throw DomainError("limit integral needs x in (0, 1]");
  IntegralCheck out;
  out.closed_form = std::log(2.0 * x / (x + 1.0));
  const double upper = 2.0 / (1.0 + x);
  if (upper > 1.0) {
    auto integrand = [x](double y) { return 1.0 / (y * (1.0 - y * (x + 1.0))); };
    out.quadrature =
        boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 1.0, upper, 15, 1e-14);
  }
  return out;
}

/// Greedy binary digits b_1..b_B of theta in [0, 1).
inline std::vector<int> binary_expansion(double theta, int bits) {
  if (!(theta >= 0.0 && theta < 1.0)) throw DomainError("binary expansion needs theta in [0, 1)");
  if (bits < 0) throw DomainError("bit count must be nonnegative");
  std::vector<int> out(static_cast<std::size_t>(bits), 0);
  double r = theta;
  for (auto& b : out) {
    r *= 2.0;  // exact
    if (r >= 1.0) {
      b = 1;
      r -= 1.0;
    }
  }
  return out;
}

inline double binary_value(std::span<const int> bits) {
  double v = 0.0;
  for (std::size_t j = bits.size(); j-- > 0;) v = 0.5 * (v + bits[j]);
  return v;
}

/// e_j = 1/2 - 2^-j.
inline double junction_endpoint(int j) { return 0.5 - std::ldexp(1.0, -j); }

/// I_j = [e_j, e_{j+1}), a dyadic interval of length 2^-(j+1).
inline DyadicIndex junction_interval(int j) {
  if (j < 1 || j > 61) throw DomainError("junction index out of range");
  return {j + 1, (std::uint64_t{1} << j) - 2};
}

struct SelfSimilarPlan {
  double x = 0.0;
  double eps = 0.0;
  double inner_average = 0.0;
  double alpha_root = 0.0;
  double theta = 0.0;              // 1 - 2 alpha_root
  std::vector<int> bits;           // b_1..b_B
  double theta_bits = 0.0;         // sum_j b_j 2^-j
  std::vector<DyadicIndex> junctions;
  double contraction = 0.0;        // (1 - eps)(1 - 2 alpha_root)/2
  double achievable_average = 0.0;
};

/// Coefficients of one self-similar step. With theta truncated to `bits`
/// digits the average reached is
///   (1-eps) <g+> / (2 - (1-eps) theta_B),
/// slightly below x; the root coefficient is eps divided by that average, so
/// the root contributes exactly eps to A f and the threshold 1 becomes 1-eps
/// on both halves. theta_B is the truncation of 1 - 2 alpha_root, which keeps
/// the total mass at most 1.
inline SelfSimilarPlan plan_self_similar_step(double x, double eps, double inner_average, int bits) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("self-similar step needs x in (0, 1)");
  if (!(eps > 0.0)) throw DomainError("self-similar step needs eps > 0");
  if (eps / x > 0.25) {
    throw Infeasible("eps/x = " + std::to_string(eps / x) + " exceeds 1/4 (need eps <= " +
                     std::to_string(0.25 * x) + ")");
  }
  if (bits < 1 || bits > 60) throw DomainError("bit budget must lie in [1, 60]");
  if (!(inner_average > 0.0)) throw DomainError("inner pair has zero average");
  const double s = 1.0 - eps;
  auto reach = [&](double theta_b) { return 0.5 * s * inner_average / (1.0 - 0.5 * s * theta_b); };

  std::vector<int> b = binary_expansion(1.0 - 2.0 * eps / x, bits);
  double xbar = reach(binary_value(b));
  for (int iter = 0; iter < 200; ++iter) {
    const double alpha = eps / xbar;
    if (!(alpha < 0.5)) throw Infeasible("inner average too small for a self-similar step");
    auto next = binary_expansion(1.0 - 2.0 * alpha, bits);
    if (next == b) break;
    b = std::move(next);
    xbar = reach(binary_value(b));
  }

  SelfSimilarPlan plan;
  plan.x = x;
  plan.eps = eps;
  plan.inner_average = inner_average;
  plan.achievable_average = xbar;
  plan.alpha_root = eps / xbar;
  plan.theta = 1.0 - 2.0 * plan.alpha_root;
  plan.bits = std::move(b);
  plan.theta_bits = binary_value(plan.bits);
  for (int j = 1; j <= bits; ++j) plan.junctions.push_back(junction_interval(j));
  plan.contraction = s * plan.theta / 2.0;
  return plan;
}

struct SelfSimilarOptions {
  int depth_budget = 16;   // dense output depth
  int bits = 24;
  double tol = 1e-10;      // L1 change at which the T iteration stops
  int max_iterations = 400;
  int generations = 0;     // compressed inner pairs: 0 = automatic
};

struct TheoremOptions {
  int bits = 24;
  int generations = 0;     // 0 = automatic
  int view_depth = 12;     // depth of the dense view kept alongside the graph
  double slack_target = 1e-9;
};

namespace detail {

/// Root coefficient whose product with `avg` rounds to exactly `eps`, so the
/// threshold seen below every copy of the step is bitwise the same.
inline double exact_offset_coefficient(double eps, double avg) {
  double a = eps / avg;
  for (int i = 0; i < 16 && a * avg != eps; ++i) {
    a = a * avg < eps ? std::nextafter(a, std::numeric_limits<double>::infinity())
                      : std::nextafter(a, 0.0);
  }
  return a;
}

/// Appends the step node and its chain of junction ancestors; returns the
/// step node. The root coefficient is left at zero.
///   step:     [ chain_1 | (1-eps) * inner ]
///   chain_j:  [ I_j: b_j ? (1-eps) * step : 0 | chain_{j+1} ]
inline std::size_t append_step(std::vector<GraphNode>& nodes, std::size_t inner_root,
                               const SelfSimilarPlan& plan) {
  const double s = 1.0 - plan.eps;
  const std::size_t step = nodes.size();
  nodes.push_back({});
  int last = 0;
  for (int j = 1; j <= static_cast<int>(plan.bits.size()); ++j) {
    if (plan.bits[j - 1]) last = j;
  }
  GraphChild left = GraphChild::leaf(0.0);
  if (last > 0) {
    const std::size_t first_chain = nodes.size();
    for (int j = 1; j <= last; ++j) {
      GraphNode chain;
      chain.children[0] = plan.bits[j - 1] ? GraphChild::ref(step, s) : GraphChild::leaf(0.0);
      chain.children[1] = j < last ? GraphChild::ref(nodes.size() + 1, 1.0) : GraphChild::leaf(0.0);
      nodes.push_back(chain);
    }
    left = GraphChild::ref(first_chain, 1.0);
  }
  nodes[step].children = {left, GraphChild::ref(inner_root, s)};
  return step;
}

inline std::size_t finish_step(std::vector<GraphNode>& nodes, std::size_t step, double eps) {
  const DyadicGraph probe(nodes, step);
  nodes[step].alpha = exact_offset_coefficient(eps, probe.averages()[step]);
  return step;
}

inline Cutoff choose_generations(const DyadicGraph& g, int requested, int minimum, double slack_target) {
  if (requested > 0) {
    if (requested < minimum) {
      throw Infeasible("generation budget " + std::to_string(requested) + " cannot reach the " +
                       std::to_string(minimum) + " nested steps; use at least " +
                       std::to_string(minimum));
    }
    return Cutoff{-1, requested};
  }
  int gens = 4 * minimum + 64;
  while (true) {
    const auto m = g.superlevel_measure(1.0, Cutoff{-1, gens});
    if (m.upper - m.lower <= slack_target || gens >= (1 << 14)) break;
    gens *= 2;
  }
  return Cutoff{-1, gens};
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw Error("construction postcondition failed: " + what);
}

inline ExtremizerPair graph_self_similar_step(const ExtremizerPair& inner, double x, double eps,
                                              const SelfSimilarOptions& opt) {
  const DyadicGraph inner_graph = inner.graph ? *inner.graph : graph_from_pair(inner.pair);
  auto nodes = inner_graph.nodes();
  const auto plan = plan_self_similar_step(x, eps, inner_graph.average(), opt.bits);
  const std::size_t step = finish_step(nodes, append_step(nodes, inner_graph.root(), plan), eps);

  ExtremizerPair out;
  out.kind = "selfsim";
  out.graph = DyadicGraph(std::move(nodes), step);
  out.cutoff = choose_generations(*out.graph, opt.generations, 1, 1e-9);
  out.target_x = x;
  out.eps = eps;
  const auto m = out.graph->superlevel_measure(1.0, out.cutoff);
  out.achieved_measure = m.truncated;
  out.pair = out.graph->materialize(std::min(opt.depth_budget, 16));
  auto& t = out.truncation;
  t.depth_used = m.depth_reached;
  t.bits = opt.bits;
  t.generations = out.cutoff.max_generations;
  t.mass_error_bound = std::abs(out.total_mass() - 1.0);
  t.bit_error_bound = std::max(0.0, (1.0 - 2.0 * eps / x) - plan.theta_bits);
  t.average_error = std::abs(out.average() - x);
  t.measure_slack = (m.upper - m.lower) + t.bit_error_bound + inner.truncation.measure_slack;
  return out;
}

inline ExtremizerPair dense_self_similar_step(const ExtremizerPair& inner, double x, double eps,
                                              const SelfSimilarOptions& opt) {
  const int depth = opt.depth_budget;
  const int inner_depth = inner.pair.f.depth();
  if (depth < 2 || depth < inner_depth + 1) {
    throw Infeasible("depth budget " + std::to_string(depth) + " too small; need at least " +
                     std::to_string(std::max(2, inner_depth + 1)));
  }
  if (depth > 24) throw Infeasible("dense depth budget above 24; use the compressed builder");
  const int bits = std::min(opt.bits, depth - 1);
  const auto plan = plan_self_similar_step(x, eps, dyshift::average(inner.pair.f), bits);
  const double s = 1.0 - eps;

  const std::size_t n_leaves = std::size_t{1} << depth;
  const std::size_t half = n_leaves / 2;
  const DyadicPair fitted = refine(inner.pair, depth - 1);

  // fixed part: root coefficient and the scaled inner pair on the right half
  std::vector<std::vector<double>> fixed(depth + 1);
  for (int k = 0; k <= depth; ++k) fixed[k].assign(std::size_t{1} << k, 0.0);
  fixed[0][0] = plan.alpha_root;
  for (const auto& [index, value] : fitted.alpha.coeffs()) {
    fixed[index.level + 1][(std::uint64_t{1} << index.level) + index.position] = value;
  }
  std::vector<double> f(n_leaves, 0.0);
  std::vector<char> exact(n_leaves, 1);
  for (std::size_t i = 0; i < half; ++i) f[half + i] = s * fitted.f.leaf(i);

  std::vector<std::vector<double>> coef = fixed;

  double prev_change = 0.0, change = 0.0, ratio = 0.0;
  int iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    const StepFunction cur(depth, f);
    const auto avg = cur.average_tree();
    const auto masses = CarlesonSequence::from_levels(coef).mass_tree();

    // cells that carry no information below their level: exact leaves of a
    // single value and no coefficient strictly inside
    std::vector<std::vector<char>> uniform(depth + 1);
    uniform[depth].assign(exact.begin(), exact.end());
    for (int k = depth - 1; k >= 0; --k) {
      uniform[k].resize(std::size_t{1} << k);
      for (std::size_t p = 0; p < uniform[k].size(); ++p) {
        uniform[k][p] = uniform[k + 1][2 * p] && uniform[k + 1][2 * p + 1] &&
                        avg[k + 1][2 * p] == avg[k + 1][2 * p + 1];
      }
    }

    std::vector<double> next_f(n_leaves, 0.0);
    std::vector<char> next_exact(n_leaves, 1);
    std::copy(f.begin() + static_cast<std::ptrdiff_t>(half), f.end(),
              next_f.begin() + static_cast<std::ptrdiff_t>(half));
    auto next_coef = fixed;
    for (int j = 1; j <= bits; ++j) {
      if (!plan.bits[j - 1]) continue;
      const DyadicIndex ij = junction_interval(j);
      const int room = depth - ij.level;
      const std::uint64_t first = ij.position << room;
      for (std::size_t p = 0; p < (std::size_t{1} << room); ++p) {
        next_f[first + p] = s * avg[room][p];
        next_exact[first + p] = uniform[room][p] && masses[room][p] == coef[room][p];
      }
      for (int l = 0; l <= room; ++l) {
        const auto& src = l < room ? coef[l] : masses[room];
        auto& dst = next_coef[ij.level + l];
        const std::uint64_t base = ij.position << l;
        for (std::size_t p = 0; p < src.size(); ++p) dst[base + p] = src[p];
      }
    }

    double df = 0.0;
    for (std::size_t i = 0; i < n_leaves; ++i) df += std::abs(next_f[i] - f[i]);
    df = std::ldexp(df, -depth);
    double da = 0.0;
    for (int k = 0; k <= depth; ++k) {
      double level_sum = 0.0;
      for (std::size_t p = 0; p < coef[k].size(); ++p) level_sum += std::abs(next_coef[k][p] - coef[k][p]);
      da += std::ldexp(level_sum, -k);
    }
    f = std::move(next_f);
    exact = std::move(next_exact);
    coef = std::move(next_coef);
    prev_change = change;
    change = df;
    // below ~1e-6 the summed change is mostly rounding and its ratio means nothing
    if (iter >= 1 && change > 1e-6) ratio = std::max(ratio, change / prev_change);
    if (iter >= 1 && df < opt.tol && da < opt.tol) {
      ++iter;
      break;
    }
  }

  ExtremizerPair out;
  out.kind = "selfsim";
  out.pair = {StepFunction(depth, std::move(f)), CarlesonSequence::from_levels(coef)};
  out.target_x = x;
  out.eps = eps;
  out.achieved_measure = out.measure(1.0);
  auto& t = out.truncation;
  t.depth_used = depth;
  t.bits = bits;
  t.fixed_point_iterations = iter;
  t.fixed_point_change = change;
  t.contraction_ratio = ratio;
  t.mass_error_bound = std::abs(out.total_mass() - 1.0);
  t.bit_error_bound = std::max(0.0, (1.0 - 2.0 * eps / x) - plan.theta_bits);
  t.average_error = std::abs(out.average() - x);
  const auto inexact = std::count(exact.begin(), exact.end(), 0);
  t.measure_slack = std::ldexp(static_cast<double>(inexact), -depth) + t.bit_error_bound +
                    inner.truncation.measure_slack;
  const double ctol = plan.contraction;
  require(std::abs(out.average() - plan.achievable_average) <= 10.0 * opt.tol / (1.0 - ctol) + 1e-12,
          "average does not match the fixed point");
  return out;
}

}  // namespace detail

/// One self-similar step around `inner`, which must have average
/// x(1+eps)/(1-eps) + 2 eps and total mass 1. Dense inner pairs are extended
/// by iterating the contraction T on a dense tree of `depth_budget` levels;
/// compressed inner pairs get the exact fixed point as a cyclic graph.
inline ExtremizerPair build_self_similar_step(const ExtremizerPair& inner, double x, double eps,
                                              const SelfSimilarOptions& opt = {}) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("self-similar step needs x in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("self-similar step needs 0 < eps < 1");
  const double expected = x * (1.0 + eps) / (1.0 - eps) + 2.0 * eps;
  const double got = inner.average();
  if (std::abs(got - expected) > 1e-6 * expected) {
    throw DomainError("inner average " + std::to_string(got) + " differs from x(1+eps)/(1-eps) + 2eps = " +
                      std::to_string(expected));
  }
  if (std::abs(inner.total_mass() - 1.0) > 1e-6) throw DomainError("inner total mass must be 1");

  ExtremizerPair out = inner.compressed() ? detail::graph_self_similar_step(inner, x, eps, opt)
                                          : detail::dense_self_similar_step(inner, x, eps, opt);
  detail::require(out.carleson_constant() <= 1.0 + 1e-9, "Carleson constant exceeds 1");
  detail::require(out.total_mass() <= 1.0 + 1e-9, "total mass exceeds 1");
  detail::require(out.achieved_measure >=
                      x / (x + 2.0 * eps) * inner.achieved_measure - out.truncation.measure_slack - 1e-12,
                  "measure below x/(x+2eps) times the inner measure");
  return out;
}

/// The iterated construction: a constant pair at x_N >= 1 with unit root
/// coefficient, wrapped by self-similar steps at x_{N-1}, ..., x_0 = x.
inline ExtremizerPair build_theorem_extremizer(double x, double eps, const TheoremOptions& opt = {}) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("extremizer needs x in (0, 1)");
  if (!(eps > 0.0)) throw DomainError("extremizer needs eps > 0");
  if (eps / x > 0.25) {
    throw Infeasible("eps = " + std::to_string(eps) + " exceeds x/4 = " + std::to_string(0.25 * x));
  }
  if (opt.view_depth < 0 || opt.view_depth > 20) throw DomainError("view depth must lie in [0, 20]");
  const IterationPlan plan = iterate_x_sequence(x, eps);
  const int steps = plan.steps;

  std::vector<GraphNode> nodes;
  nodes.push_back({1.0, {GraphChild::leaf(plan.xs.back()), GraphChild::leaf(plan.xs.back())}});
  std::size_t root = 0;
  double bit_error = 0.0;
  double inner_average = plan.xs.back();
  for (int k = steps - 1; k >= 0; --k) {
    const auto sp = plan_self_similar_step(plan.xs[k], eps, inner_average, opt.bits);
    root = detail::finish_step(nodes, detail::append_step(nodes, root, sp), eps);
    inner_average = DyadicGraph(nodes, root).average();
    bit_error += std::max(0.0, (1.0 - 2.0 * eps / plan.xs[k]) - sp.theta_bits);
  }

  ExtremizerPair out;
  out.kind = "full";
  out.graph = DyadicGraph(std::move(nodes), root);
  out.cutoff = detail::choose_generations(*out.graph, opt.generations, steps, opt.slack_target);
  out.target_x = x;
  out.eps = eps;
  const auto m = out.graph->superlevel_measure(1.0, out.cutoff);
  out.achieved_measure = m.truncated;
  out.pair = out.graph->materialize(opt.view_depth);
  auto& t = out.truncation;
  t.depth_used = m.depth_reached;
  t.bits = opt.bits;
  t.generations = out.cutoff.max_generations;
  t.mass_error_bound = std::abs(out.total_mass() - 1.0);
  t.bit_error_bound = bit_error;
  t.average_error = std::abs(out.average() - x);
  t.measure_slack = (m.upper - m.lower) + bit_error;

  detail::require(out.carleson_constant() <= 1.0 + 1e-9, "Carleson constant exceeds 1");
  detail::require(out.achieved_measure >= product_lower_bound(plan) - t.measure_slack - 1e-12,
                  "measure below the product bound");
  return out;
}

/// max over the grid of lambda |{A f > lambda}| / <f> for a built pair.
inline double weak_norm_scan(const ExtremizerPair& p, std::span<const double> lambdas) {
  const double mass = p.average();
  if (!(mass > 0.0)) throw DomainError("weak norm ratio needs a function with positive L1 norm");
  double best = 0.0;
  for (double lambda : lambdas) best = std::max(best, lambda * p.measure(lambda));
  return best / mass;
}

}  // namespace dyshift

#endif  // DYSHIFT_EXTREMIZER_HPP
