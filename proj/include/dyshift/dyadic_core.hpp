#ifndef DYSHIFT_DYADIC_CORE_HPP
#define DYSHIFT_DYADIC_CORE_HPP

// Finite-depth dyadic trees over the reference interval [0,1): leaf-constant
// step functions, sparse Carleson sequences, the positive shift
//   A f = sum_J alpha_J <f>_J 1_J
// and normalized superlevel measures. All measures are fractions of |[0,1)|.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dyshift/error.hpp"

namespace dyshift {

/// Largest supported depth of a dense tree (2^depth leaves).
inline constexpr int kMaxDenseDepth = 28;

/// Node (level, position) of the dyadic tree over [0,1); the interval
/// [position * 2^-level, (position + 1) * 2^-level).
struct DyadicIndex {
  int level = 0;
  std::uint64_t position = 0;

  constexpr DyadicIndex() = default;
  constexpr DyadicIndex(int lvl, std::uint64_t pos) : level(lvl), position(pos) {
    if (lvl < 0 || lvl > 62 || pos >= (std::uint64_t{1} << lvl)) {
      throw DomainError("dyadic index out of range: level " + std::to_string(lvl) +
                        ", position " + std::to_string(pos));
    }
  }

  static constexpr DyadicIndex root() { return {}; }

  constexpr DyadicIndex parent() const {
    if (level == 0) throw DomainError("the root has no parent");
    return {level - 1, position / 2};
  }
  constexpr DyadicIndex child(int right) const {
    return {level + 1, 2 * position + (right ? 1u : 0u)};
  }
  constexpr DyadicIndex left() const { return child(0); }
  constexpr DyadicIndex right() const { return child(1); }

  double length() const { return std::ldexp(1.0, -level); }
  double left_endpoint() const { return std::ldexp(static_cast<double>(position), -level); }

  /// True if `other` is this node or one of its descendants.
  constexpr bool contains(const DyadicIndex& other) const {
    if (other.level < level) return false;
    return (other.position >> (other.level - level)) == position;
  }

  constexpr auto operator<=>(const DyadicIndex&) const = default;
};

namespace detail {

inline std::size_t leaf_count(int depth) {
  if (depth < 0 || depth > kMaxDenseDepth) {
    throw DomainError("depth " + std::to_string(depth) + " outside [0, " +
                      std::to_string(kMaxDenseDepth) + "]");
  }
  return std::size_t{1} << depth;
}

}  // namespace detail

/// Nonnegative function constant on each of the 2^depth leaves of [0,1).
class StepFunction {
 public:
  StepFunction() : leaves_(1, 0.0) {}

  StepFunction(int depth, std::vector<double> leaves) : depth_(depth), leaves_(std::move(leaves)) {
    if (leaves_.size() != detail::leaf_count(depth_)) {
      throw DepthMismatch("step function of depth " + std::to_string(depth_) + " needs " +
                          std::to_string(detail::leaf_count(depth_)) + " leaves, got " +
                          std::to_string(leaves_.size()));
    }
    for (double v : leaves_) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError("step function values must be finite and nonnegative");
      }
    }
  }

  static StepFunction constant(int depth, double value) {
    return StepFunction(depth, std::vector<double>(detail::leaf_count(depth), value));
  }

  int depth() const { return depth_; }
  std::span<const double> leaves() const { return leaves_; }
  double leaf(std::size_t i) const { return leaves_.at(i); }
  std::size_t size() const { return leaves_.size(); }

  /// Per-level node averages, computed bottom-up by pairwise summation.
  /// Result[k][p] is <f> on DyadicIndex(k, p).
  std::vector<std::vector<double>> average_tree() const {
    std::vector<std::vector<double>> sums(depth_ + 1);
    sums[depth_] = leaves_;
    for (int k = depth_ - 1; k >= 0; --k) {
      const auto& below = sums[k + 1];
      auto& here = sums[k];
      here.resize(below.size() / 2);
      for (std::size_t p = 0; p < here.size(); ++p) here[p] = below[2 * p] + below[2 * p + 1];
    }
    for (int k = 0; k <= depth_; ++k) {
      for (double& s : sums[k]) s = std::ldexp(s, k - depth_);
    }
    return sums;
  }

  friend bool operator==(const StepFunction&, const StepFunction&) = default;

 private:
  int depth_ = 0;
  std::vector<double> leaves_;
};

/// Nonnegative coefficients alpha_J on the nodes of levels 0..depth, stored
/// sparsely. Zero coefficients are never stored.
class CarlesonSequence {
 public:
  using Map = std::map<DyadicIndex, double>;

  CarlesonSequence() = default;

  CarlesonSequence(int depth, Map coeffs) : depth_(depth) {
    detail::leaf_count(depth_);
    for (const auto& [index, value] : coeffs) {
      if (index.level > depth_) {
        throw DepthMismatch("coefficient at level " + std::to_string(index.level) +
                            " exceeds sequence depth " + std::to_string(depth_));
      }
      if (!(value >= 0.0) || !std::isfinite(value)) {
        throw DomainError("Carleson coefficients must be finite and nonnegative");
      }
      if (value != 0.0) coeffs_.emplace(index, value);
    }
  }

  /// Builds from per-level dense arrays (levels[k].size() == 2^k).
  static CarlesonSequence from_levels(const std::vector<std::vector<double>>& levels) {
    if (levels.empty()) throw DomainError("need at least the root level");
    Map m;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (levels[k].size() != (std::size_t{1} << k)) {
        throw DepthMismatch("level " + std::to_string(k) + " has wrong width");
      }
      for (std::size_t p = 0; p < levels[k].size(); ++p) {
        if (levels[k][p] != 0.0) m.emplace(DyadicIndex(static_cast<int>(k), p), levels[k][p]);
      }
    }
    return CarlesonSequence(static_cast<int>(levels.size()) - 1, std::move(m));
  }

  static CarlesonSequence single(int depth, DyadicIndex at, double value) {
    return CarlesonSequence(depth, Map{{at, value}});
  }

  int depth() const { return depth_; }
  const Map& coeffs() const { return coeffs_; }
  bool empty() const { return coeffs_.empty(); }

  double at(const DyadicIndex& j) const {
    auto it = coeffs_.find(j);
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  std::vector<std::vector<double>> levels() const {
    std::vector<std::vector<double>> out(depth_ + 1);
    for (int k = 0; k <= depth_; ++k) out[k].assign(std::size_t{1} << k, 0.0);
    for (const auto& [index, value] : coeffs_) out[index.level][index.position] = value;
    return out;
  }

  /// Normalized subtree masses (1/|J|) sum_{K subset J} alpha_K |K| for every
  /// node, bottom-up.
  std::vector<std::vector<double>> mass_tree() const {
    auto m = levels();
    for (int k = depth_ - 1; k >= 0; --k) {
      for (std::size_t p = 0; p < m[k].size(); ++p) {
        m[k][p] += 0.5 * (m[k + 1][2 * p] + m[k + 1][2 * p + 1]);
      }
    }
    return m;
  }

  friend bool operator==(const CarlesonSequence&, const CarlesonSequence&) = default;

 private:
  int depth_ = 0;
  Map coeffs_;
};

/// Values of A f, one per leaf.
struct ShiftResult {
  int depth = 0;
  std::vector<double> leaf_values;
};

/// A function together with the Carleson sequence it is shifted by.
struct DyadicPair {
  StepFunction f;
  CarlesonSequence alpha;
};

/// Mean of f over J.
inline double average(const StepFunction& f, const DyadicIndex& j) {
  if (j.level > f.depth()) {
    throw DepthMismatch("index level " + std::to_string(j.level) + " deeper than function depth " +
                        std::to_string(f.depth()));
  }
  const int span_levels = f.depth() - j.level;
  const std::size_t width = std::size_t{1} << span_levels;
  std::vector<double> block(f.leaves().begin() + j.position * width,
                            f.leaves().begin() + (j.position + 1) * width);
  for (std::size_t w = width; w > 1; w /= 2) {
    for (std::size_t p = 0; p < w / 2; ++p) block[p] = block[2 * p] + block[2 * p + 1];
  }
  return std::ldexp(block[0], -span_levels);
}

inline double average(const StepFunction& f) { return average(f, DyadicIndex::root()); }

/// Leafwise A f by a single root-to-leaf accumulation of alpha_J <f>_J.
inline ShiftResult apply_shift(const StepFunction& f, const CarlesonSequence& alpha) {
  if (f.depth() != alpha.depth()) {
    throw DepthMismatch("function depth " + std::to_string(f.depth()) +
                        " differs from sequence depth " + std::to_string(alpha.depth()));
  }
  const auto avg = f.average_tree();
  const auto coeff = alpha.levels();
  std::vector<double> acc{coeff[0][0] * avg[0][0]};
  for (int k = 1; k <= f.depth(); ++k) {
    std::vector<double> next(acc.size() * 2);
    for (std::size_t p = 0; p < next.size(); ++p) next[p] = acc[p / 2] + coeff[k][p] * avg[k][p];
    acc = std::move(next);
  }
  return ShiftResult{f.depth(), std::move(acc)};
}

inline double carleson_constant(const CarlesonSequence& alpha) {
  double best = 0.0;
  for (const auto& level : alpha.mass_tree()) {
    for (double m : level) best = std::max(best, m);
  }
  return best;
}

inline double total_mass(const CarlesonSequence& alpha) { return alpha.mass_tree()[0][0]; }

/// Normalized measure of {g > lambda} (strict).
inline double superlevel_measure(const ShiftResult& g, double lambda) {
  const auto count = std::count_if(g.leaf_values.begin(), g.leaf_values.end(),
                                   [lambda](double v) { return v > lambda; });
  return std::ldexp(static_cast<double>(count), -g.depth);
}

/// max over the grid of lambda * |{A f > lambda}| / <f>.
inline double weak_norm_scan(const StepFunction& f, const CarlesonSequence& alpha,
                             std::span<const double> lambdas) {
  const double mass = average(f);
  if (!(mass > 0.0)) throw DomainError("weak norm ratio needs a function with positive L1 norm");
  const auto g = apply_shift(f, alpha);
  double best = 0.0;
  for (double lambda : lambdas) best = std::max(best, lambda * superlevel_measure(g, lambda));
  return best / mass;
}

/// sup_{lambda > 0} lambda |{g > lambda}|, attained as lambda increases to one
/// of the values of g.
inline double weak_norm(const ShiftResult& g) {
  std::vector<double> v = g.leaf_values;
  std::sort(v.begin(), v.end(), std::greater<>());
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= 0.0) break;
    // all entries 0..i are >= v[i]; ties extend the count
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    best = std::max(best, v[i] * std::ldexp(static_cast<double>(j + 1), -g.depth));
    i = j;
  }
  return best;
}

/// Replicates every leaf so that the pair lives at `depth` >= its own depth.
inline DyadicPair refine(const DyadicPair& pair, int depth) {
  const int from = pair.f.depth();
  if (depth < from) throw DepthMismatch("refine target shallower than the pair");
  const int extra = depth - from;
  std::vector<double> leaves(detail::leaf_count(depth));
  for (std::size_t i = 0; i < leaves.size(); ++i) leaves[i] = pair.f.leaf(i >> extra);
  return {StepFunction(depth, std::move(leaves)),
          CarlesonSequence(depth, pair.alpha.coeffs())};
}

/// Collapses the pair to `depth`: f is averaged over the new leaves and the
/// coefficients below `depth` are folded into the new leaf coefficient as
/// their normalized mass. Averages and subtree masses at levels <= depth are
/// unchanged.
inline DyadicPair coarsen(const DyadicPair& pair, int depth) {
  const int from = pair.f.depth();
  if (depth > from) throw DepthMismatch("coarsen target deeper than the pair");
  if (depth == from) return pair;
  auto avg = pair.f.average_tree();
  auto masses = pair.alpha.mass_tree();
  CarlesonSequence::Map m;
  for (const auto& [index, value] : pair.alpha.coeffs()) {
    if (index.level < depth) m.emplace(index, value);
  }
  for (std::size_t p = 0; p < masses[depth].size(); ++p) {
    if (masses[depth][p] != 0.0) m.emplace(DyadicIndex(depth, p), masses[depth][p]);
  }
  return {StepFunction(depth, std::move(avg[depth])), CarlesonSequence(depth, std::move(m))};
}

/// The part of the pair that lives on J, rescaled to [0,1).
inline DyadicPair restrict_to(const DyadicPair& pair, const DyadicIndex& j) {
  const int depth = pair.f.depth();
  if (j.level > depth) throw DepthMismatch("restriction node deeper than the pair");
  const int sub = depth - j.level;
  const std::size_t width = std::size_t{1} << sub;
  std::vector<double> leaves(pair.f.leaves().begin() + j.position * width,
                             pair.f.leaves().begin() + (j.position + 1) * width);
  CarlesonSequence::Map m;
  for (const auto& [index, value] : pair.alpha.coeffs()) {
    if (j.contains(index)) {
      const int rel = index.level - j.level;
      m.emplace(DyadicIndex(rel, index.position - (j.position << rel)), value);
    }
  }
  return {StepFunction(sub, std::move(leaves)), CarlesonSequence(sub, std::move(m))};
}

/// Writes the affinely rescaled copy of `src` into the subtree of `dst`
/// rooted at J, replacing whatever `dst` held there. The source is refined if
/// it is shallower than the room available under J.
inline DyadicPair rescale_embed(const DyadicPair& src, const DyadicIndex& j, const DyadicPair& dst) {
  const int depth = dst.f.depth();
  if (dst.alpha.depth() != depth || src.alpha.depth() != src.f.depth()) {
    throw DepthMismatch("pair function and sequence depths differ");
  }
  const int room = depth - j.level;
  if (room < src.f.depth()) {
    throw DepthMismatch("destination needs depth >= " + std::to_string(j.level + src.f.depth()) +
                        " to embed under level " + std::to_string(j.level));
  }
  const DyadicPair fitted = refine(src, room);
  std::vector<double> leaves(dst.f.leaves().begin(), dst.f.leaves().end());
  const std::size_t width = std::size_t{1} << room;
  std::copy(fitted.f.leaves().begin(), fitted.f.leaves().end(),
            leaves.begin() + static_cast<std::ptrdiff_t>(j.position * width));
  CarlesonSequence::Map m;
  for (const auto& [index, value] : dst.alpha.coeffs()) {
    if (!j.contains(index)) m.emplace(index, value);
  }
  for (const auto& [index, value] : fitted.alpha.coeffs()) {
    m.emplace(DyadicIndex(j.level + index.level, (j.position << index.level) + index.position),
              value);
  }
  return {StepFunction(depth, std::move(leaves)), CarlesonSequence(depth, std::move(m))};
}

}  // namespace dyshift

#endif  // DYSHIFT_DYADIC_CORE_HPP
