#ifndef DYSHIFT_DYADIC_GRAPH_HPP
#define DYSHIFT_DYADIC_GRAPH_HPP

// Compressed (f, alpha) pairs with shared and self-referencing subtrees.
//
// Each node stands for a dyadic interval J together with a coefficient
// alpha_J. Each of its two halves is either a leaf (f constant there, no
// coefficients below) or a reference to another node whose whole pair is
// rescaled into that half with f multiplied by a scale factor. Cycles are
// allowed, so self-similar objects of infinite depth are represented
// exactly; evaluations truncate them by a cutoff that coarsens a subtree into
// a single leaf carrying its average and its normalized Carleson mass, which
// leaves every average and every subtree mass above it unchanged.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "dyshift/dyadic_core.hpp"
#include "dyshift/error.hpp"

namespace dyshift {

struct GraphChild {
  enum class Kind { kLeaf, kRef };
  Kind kind = Kind::kLeaf;
  double value = 0.0;       // leaf: f on the half; ref: scale applied to the target's f
  std::size_t target = 0;   // ref only

  static GraphChild leaf(double v) { return {Kind::kLeaf, v, 0}; }
  static GraphChild ref(std::size_t node, double scale) { return {Kind::kRef, scale, node}; }

  bool is_ref() const { return kind == Kind::kRef; }
  friend bool operator==(const GraphChild&, const GraphChild&) = default;
};

struct GraphNode {
  double alpha = 0.0;
  std::array<GraphChild, 2> children{GraphChild::leaf(0.0), GraphChild::leaf(0.0)};
  friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

/// Where an evaluation stops expanding references. A negative field is
/// disabled. A generation is one traversal of a reference whose scale is
/// below one; every cycle crosses at least one such reference.
struct Cutoff {
  int max_level = -1;
  int max_generations = -1;

  bool active() const { return max_level >= 0 || max_generations >= 0; }
  bool cuts(int level, int generations) const {
    return (max_level >= 0 && level >= max_level) ||
           (max_generations >= 0 && generations > max_generations);
  }
  friend bool operator==(const Cutoff&, const Cutoff&) = default;
};

/// Superlevel measure of a truncated graph pair. `truncated` is exact for the
/// coarsened finite object; [lower, upper] encloses the measure of the
/// untruncated object.
struct MeasureBounds {
  double truncated = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int depth_reached = 0;
};

class DyadicGraph {
 public:
  DyadicGraph() : DyadicGraph({GraphNode{}}, 0) {}

  DyadicGraph(std::vector<GraphNode> nodes, std::size_t root)
      : nodes_(std::move(nodes)), root_(root) {
    validate();
    solve_averages();
    solve_masses();
  }

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  std::size_t root() const { return root_; }

  /// Average of f over each node's interval (node-local units).
  const std::vector<double>& averages() const { return averages_; }
  /// Normalized Carleson mass of each node's subtree.
  const std::vector<double>& masses() const { return masses_; }

  double average() const { return averages_[root_]; }
  double total_mass() const { return masses_[root_]; }

  /// Supremum of the normalized subtree masses over all reachable nodes.
  /// Coarsening never increases it, so it bounds every truncation too.
  double carleson_constant() const {
    double best = 0.0;
    for (std::size_t n : reachable()) best = std::max(best, masses_[n]);
    return best;
  }

  MeasureBounds superlevel_measure(double lambda, const Cutoff& cutoff) const {
    if (!cutoff.active()) {
      throw DomainError("graph has cycles; a cutoff is required to evaluate measures");
    }
    if (ceilings_.empty()) solve_ceilings();
    Evaluator ev{*this, cutoff, {}, 0};
    MeasureBounds out;
    Triple r;
    if (cutoff.cuts(0, 0)) {
      r = ev.coarse(root_, lambda);
    } else {
      r = ev.eval(root_, lambda, 0, 0);
    }
    out.truncated = r.truncated;
    out.lower = r.lower;
    out.upper = r.upper;
    out.depth_reached = ev.max_level;
    return out;
  }

  /// Dense depth-`depth` realization: references below level `depth` are
  /// coarsened exactly as in a level cutoff.
  DyadicPair materialize(int depth) const {
    std::vector<double> leaves(detail::leaf_count(depth), 0.0);
    std::vector<std::vector<double>> coeff(depth + 1);
    for (int k = 0; k <= depth; ++k) coeff[k].assign(std::size_t{1} << k, 0.0);
    std::function<void(std::size_t, int, std::uint64_t, double)> fill =
        [&](std::size_t n, int level, std::uint64_t pos, double scale) {
          if (level == depth) {
            leaves[pos] = scale * averages_[n];
            coeff[level][pos] = masses_[n];
            return;
          }
          const GraphNode& node = nodes_[n];
          coeff[level][pos] = node.alpha;
          for (int b = 0; b < 2; ++b) {
            const GraphChild& c = node.children[b];
            const std::uint64_t cpos = 2 * pos + static_cast<std::uint64_t>(b);
            if (c.is_ref()) {
              fill(c.target, level + 1, cpos, scale * c.value);
            } else {
              const int below = depth - level - 1;
              const std::uint64_t first = cpos << below;
              std::fill(leaves.begin() + static_cast<std::ptrdiff_t>(first),
                        leaves.begin() + static_cast<std::ptrdiff_t>(first + (1ull << below)),
                        scale * c.value);
            }
          }
        };
    fill(root_, 0, 0, 1.0);
    return {StepFunction(depth, std::move(leaves)), CarlesonSequence::from_levels(coeff)};
  }

  /// Nodes reachable from the root, root first.
  std::vector<std::size_t> reachable() const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::size_t> order{root_};
    seen[root_] = 1;
    for (std::size_t i = 0; i < order.size(); ++i) {
      for (const auto& c : nodes_[order[i]].children) {
        if (c.is_ref() && !seen[c.target]) {
          seen[c.target] = 1;
          order.push_back(c.target);
        }
      }
    }
    return order;
  }

  friend bool operator==(const DyadicGraph& a, const DyadicGraph& b) {
    return a.root_ == b.root_ && a.nodes_ == b.nodes_;
  }

 private:
  struct Triple {
    double truncated = 0.0;
    double lower = 0.0;
    double upper = 0.0;
  };

  struct Key {
    std::size_t node;
    std::uint64_t lambda_bits;
    int level;
    int generations;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = k.lambda_bits * 0x9E3779B97F4A7C15ull;
      h ^= (static_cast<std::uint64_t>(k.node) + 0x632BE59BD9B4E019ull) + (h << 6) + (h >> 2);
      h ^= (static_cast<std::uint64_t>(static_cast<std::uint32_t>(k.level)) << 32 |
            static_cast<std::uint32_t>(k.generations)) +
           (h << 6) + (h >> 2);
      return static_cast<std::size_t>(h);
    }
  };

  struct Evaluator {
    const DyadicGraph& g;
    Cutoff cutoff;
    std::unordered_map<Key, Triple, KeyHash> memo;
    int max_level;

    static Triple all(bool above) {
      const double v = above ? 1.0 : 0.0;
      return {v, v, v};
    }

    // The leaf that replaces node n at a cutoff: f = average, alpha = mass.
    Triple coarse(std::size_t n, double lambda) const {
      if (lambda < 0.0) return all(true);
      const double value = g.masses_[n] * g.averages_[n];
      return {value > lambda ? 1.0 : 0.0, 0.0, 1.0};
    }

    Triple eval(std::size_t n, double lambda, int level, int gens) {
      max_level = std::max(max_level, level);
      if (lambda < 0.0) return all(true);  // A f >= 0 everywhere
      if (lambda >= g.ceilings_[n]) return all(false);
      Key key{n, 0, cutoff.max_level >= 0 ? level : -1, cutoff.max_generations >= 0 ? gens : -1};
      std::memcpy(&key.lambda_bits, &lambda, sizeof lambda);
      if (auto it = memo.find(key); it != memo.end()) return it->second;

      const GraphNode& node = g.nodes_[n];
      const double rest = lambda - node.alpha * g.averages_[n];
      Triple sum;
      for (const GraphChild& c : node.children) {
        Triple part;
        if (!c.is_ref() || c.value == 0.0) {
          part = all(rest < 0.0);
        } else {
          const double next = rest / c.value;
          const int next_gens = gens + (c.value < 1.0 ? 1 : 0);
          if (cutoff.cuts(level + 1, next_gens)) {
            max_level = std::max(max_level, level + 1);
            part = coarse(c.target, next);
          } else {
            part = eval(c.target, next, level + 1, next_gens);
          }
        }
        sum.truncated += 0.5 * part.truncated;
        sum.lower += 0.5 * part.lower;
        sum.upper += 0.5 * part.upper;
      }
      memo.emplace(key, sum);
      return sum;
    }
  };

  void validate() const {
    if (nodes_.empty() || root_ >= nodes_.size()) throw DomainError("graph root out of range");
    for (const auto& node : nodes_) {
      if (!(node.alpha >= 0.0) || !std::isfinite(node.alpha)) {
        throw DomainError("graph coefficients must be finite and nonnegative");
      }
      for (const auto& c : node.children) {
        if (c.is_ref()) {
          if (c.target >= nodes_.size()) throw DomainError("graph reference out of range");
          if (!(c.value >= 0.0 && c.value <= 1.0)) {
            throw DomainError("reference scales must lie in [0, 1]");
          }
        } else if (!(c.value >= 0.0) || !std::isfinite(c.value)) {
          throw DomainError("leaf values must be finite and nonnegative");
        }
      }
    }
    // scale-one references must not form a cycle
    std::vector<int> state(nodes_.size(), 0);
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
      state[n] = 1;
      for (const auto& c : nodes_[n].children) {
        if (!c.is_ref() || c.value < 1.0) continue;
        if (state[c.target] == 1) throw DomainError("cycle of unscaled references");
        if (state[c.target] == 0) visit(c.target);
      }
      state[n] = 2;
    };
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      if (state[n] == 0) visit(n);
    }
  }

  // Children-first order, which makes Gauss-Seidel sweeps exact on acyclic parts.
  std::vector<std::size_t> sweep_order() const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<std::size_t> order;
    std::function<void(std::size_t)> visit = [&](std::size_t n) {
      seen[n] = 1;
      for (const auto& c : nodes_[n].children) {
        if (c.is_ref() && !seen[c.target]) visit(c.target);
      }
      order.push_back(n);
    };
    for (std::size_t n = 0; n < nodes_.size(); ++n) {
      if (!seen[n]) visit(n);
    }
    return order;
  }

  template <class Update>
  void fixed_point(std::vector<double>& v, Update update, const char* what) {
    const auto order = sweep_order();
    v.assign(nodes_.size(), 0.0);
    for (int sweep = 0; sweep < 100000; ++sweep) {
      bool changed = false;
      for (std::size_t n : order) {
        const double next = update(n, v);
        if (!std::isfinite(next)) throw DomainError(std::string("graph does not define a finite ") + what);
        if (next != v[n]) {
          // stop at the last few ulps; the iteration can cycle between neighbours
          if (std::abs(next - v[n]) > 4e-16 * std::max(1.0, std::abs(next))) changed = true;
          v[n] = next;
        }
      }
      if (!changed) return;
    }
    throw DomainError(std::string("graph does not define a finite ") + what);
  }

  void solve_averages() {
    fixed_point(
        averages_,
        [this](std::size_t n, const std::vector<double>& v) {
          double s = 0.0;
          for (const auto& c : nodes_[n].children) s += c.is_ref() ? c.value * v[c.target] : c.value;
          return 0.5 * s;
        },
        "function");
  }

  void solve_masses() {
    fixed_point(
        masses_,
        [this](std::size_t n, const std::vector<double>& v) {
          double s = 0.0;
          for (const auto& c : nodes_[n].children) s += c.is_ref() ? v[c.target] : 0.0;
          return nodes_[n].alpha + 0.5 * s;
        },
        "Carleson sequence");
  }

  // Upper bound for A f inside each node, valid for the infinite object and for
  // every cutoff view (a cut node contributes mass * average). Without it,
  // thresholds above the supremum would be chased through every generation.
  void solve_ceilings() const {
    const auto order = sweep_order();
    std::vector<double> v(nodes_.size(), 0.0);
    bool converged = false;
    for (int sweep = 0; sweep < 200000 && !converged; ++sweep) {
      converged = true;
      for (std::size_t n : order) {
        double below = 0.0;
        for (const auto& c : nodes_[n].children) {
          if (c.is_ref()) below = std::max(below, c.value * v[c.target]);
        }
        const double next = std::max(masses_[n] * averages_[n], nodes_[n].alpha * averages_[n] + below);
        if (next - v[n] > 4e-16 * std::max(1.0, next)) converged = false;
        v[n] = std::max(v[n], next);
      }
    }
    const double inf = std::numeric_limits<double>::infinity();
    for (auto& c : v) c = converged ? c * (1.0 + 1e-9) + 1e-300 : inf;
    ceilings_ = std::move(v);
  }

  std::vector<GraphNode> nodes_;
  std::size_t root_ = 0;
  std::vector<double> averages_;
  std::vector<double> masses_;
  mutable std::vector<double> ceilings_;
};

/// Exact graph form of a dense pair: one node per interval down to the
/// leaves, plus a leaf-level node wherever a leaf carries a coefficient.
inline DyadicGraph graph_from_pair(const DyadicPair& pair) {
  const int depth = pair.f.depth();
  if (pair.alpha.depth() != depth) throw DepthMismatch("pair function and sequence depths differ");
  const auto coeff = pair.alpha.levels();
  std::vector<GraphNode> nodes;
  std::function<GraphChild(int, std::uint64_t)> build = [&](int level,
                                                            std::uint64_t pos) -> GraphChild {
    if (level == depth) {
      const double v = pair.f.leaf(pos);
      if (coeff[level][pos] == 0.0) return GraphChild::leaf(v);
      nodes.push_back({coeff[level][pos], {GraphChild::leaf(v), GraphChild::leaf(v)}});
      return GraphChild::ref(nodes.size() - 1, 1.0);
    }
    const GraphChild l = build(level + 1, 2 * pos);
    const GraphChild r = build(level + 1, 2 * pos + 1);
    nodes.push_back({coeff[level][pos], {l, r}});
    return GraphChild::ref(nodes.size() - 1, 1.0);
  };
  GraphChild top = build(0, 0);
  if (!top.is_ref()) {
    // depth-0 pair without a root coefficient
    nodes.push_back({0.0, {top, top}});
    const std::size_t root = nodes.size() - 1;
    return DyadicGraph(std::move(nodes), root);
  }
  const std::size_t root = top.target;
  return DyadicGraph(std::move(nodes), root);
}

}  // namespace dyshift

#endif  // DYSHIFT_DYADIC_GRAPH_HPP
