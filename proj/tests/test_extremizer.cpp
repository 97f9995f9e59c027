#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dyshift/bellman.hpp"
#include "dyshift/dyadic_core.hpp"
#include "dyshift/extremizer.hpp"

using namespace dyshift;

TEST(EasyObstacle, DepthThree) {
  const auto e = build_easy_obstacle(2.0, 3);
  EXPECT_EQ(e.achieved_measure, 7.0 / 8.0);
  const auto g = apply_shift(e.pair.f, e.pair.alpha);
  for (std::size_t i = 0; i + 1 < g.leaf_values.size(); ++i) {
    EXPECT_NEAR(g.leaf_values[i], (8.0 / 7.0) * (8.0 / 7.0), 1e-15);
  }
  EXPECT_EQ(g.leaf_values.back(), 0.0);
  EXPECT_DOUBLE_EQ(e.average(), 2.0);
  EXPECT_DOUBLE_EQ(e.total_mass(), 0.5);
}

TEST(EasyObstacle, DepthTen) {
  const auto e = build_easy_obstacle(2.0, 10);
  EXPECT_EQ(e.achieved_measure, 0.9990234375);
  EXPECT_DOUBLE_EQ(e.total_mass(), 0.5);
  EXPECT_NEAR(e.carleson_constant(), 0.5 / (1.0 - std::ldexp(1.0, -10)), 1e-15);
  EXPECT_LE(e.carleson_constant(), 1.0);
}

TEST(EasyObstacle, Rejects) {
  // 1/x = 0.8 cannot fit on a support of 3/4
  EXPECT_THROW(build_easy_obstacle(1.25, 2), Infeasible);
  EXPECT_THROW(build_easy_obstacle(0.0, 4), DomainError);
  EXPECT_NO_THROW(build_easy_obstacle(1.25, 3));
}

TEST(ConstantPair, Examples) {
  const auto e = build_constant_pair(2.0, 0.6);
  EXPECT_EQ(e.achieved_measure, 1.0);
  EXPECT_EQ(build_constant_pair(0.5, 1.0).achieved_measure, 0.0);
  EXPECT_EQ(build_constant_pair(1.0, 1.0).achieved_measure, 0.0);
  EXPECT_DOUBLE_EQ(e.carleson_constant(), 0.6);
}

TEST(Iteration, Examples) {
  const auto p = iterate_x_sequence(0.5, 0.1);
  ASSERT_EQ(p.steps, 2);
  ASSERT_EQ(p.xs.size(), 3u);
  EXPECT_NEAR(p.xs[1], 0.5 * 11.0 / 9.0 + 0.2, 1e-15);
  EXPECT_NEAR(p.xs[1], 0.81111111111111111, 1e-15);
  EXPECT_NEAR(p.xs[2], 1.1913580246913580, 1e-14);
  EXPECT_GE(p.xs[2], 1.0);
  EXPECT_FALSE(p.degenerate);
  EXPECT_NEAR(product_lower_bound(p), 0.490633083484, 1e-11);
}

TEST(Iteration, ClosedFormMatchesRecurrence) {
  for (double x : {0.05, 0.3, 0.7}) {
    for (double eps : {0.01, 0.003}) {
      const auto p = iterate_x_sequence(x, eps);
      for (std::size_t n = 0; n < p.xs.size(); ++n) {
        EXPECT_NEAR(iterate_closed_form(x, eps, static_cast<int>(n)), p.xs[n], 1e-12 * (1.0 + n));
      }
      EXPECT_LT(p.xs[p.xs.size() - 2], 1.0);
      EXPECT_GE(p.xs.back(), 1.0);
    }
  }
}

TEST(Iteration, StepCountScalesLikeLog) {
  for (double x : {0.2, 0.5, 0.8}) {
    const double eps = 1e-4;
    const auto p = iterate_x_sequence(x, eps);
    EXPECT_NEAR(p.steps * eps, 0.5 * std::log(2.0 / (1.0 + x)), 2e-4);
  }
}

TEST(Iteration, AboveOneAndDegenerate) {
  const auto p = iterate_x_sequence(1.5, 0.1);
  EXPECT_EQ(p.steps, 0);
  EXPECT_DOUBLE_EQ(product_lower_bound(p), 1.5 / 1.7);
  // one step already lands on the obstacle
  EXPECT_TRUE(iterate_x_sequence(0.9, 0.1).degenerate);
  EXPECT_THROW(iterate_x_sequence(0.5, 1.0), DomainError);
  EXPECT_THROW(iterate_x_sequence(-0.5, 0.1), DomainError);
}

TEST(Iteration, ProductApproachesTarget) {
  for (double x : {0.2, 0.5, 0.8}) {
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const double p = product_lower_bound(iterate_x_sequence(x, eps));
      EXPECT_LE(p, 2.0 * x / (x + 1.0));
      EXPECT_GT(p, prev);
      prev = p;
    }
    EXPECT_NEAR(prev, 2.0 * x / (x + 1.0), 1e-3);
  }
}

TEST(LimitIntegral, MatchesClosedForm) {
  for (double x : {0.01, 0.3, 0.5, 1.0}) {
    const auto c = limit_integral(x);
    EXPECT_NEAR(c.quadrature, c.closed_form, 1e-12);
  }
  EXPECT_EQ(limit_integral(1.0).closed_form, 0.0);
  EXPECT_THROW(limit_integral(0.0), DomainError);
  EXPECT_THROW(limit_integral(1.5), DomainError);
}

TEST(Binary, Expansion) {
  const std::vector<int> want{1, 1, 0, 0, 1, 1, 0, 0};
  EXPECT_EQ(binary_expansion(0.8, 8), want);
  EXPECT_EQ(binary_expansion(0.5, 3), (std::vector<int>{1, 0, 0}));
  EXPECT_EQ(binary_value(want), 0.796875);
  for (double t : {0.1, 0.37, 0.999}) {
    const auto b = binary_expansion(t, 30);
    EXPECT_LE(binary_value(b), t);
    EXPECT_LT(t - binary_value(b), std::ldexp(1.0, -30));
  }
  EXPECT_THROW(binary_expansion(1.0, 4), DomainError);
}

TEST(Junctions, Geometry) {
  for (int j = 1; j <= 10; ++j) {
    const auto idx = junction_interval(j);
    EXPECT_EQ(idx.left_endpoint(), junction_endpoint(j));
    EXPECT_EQ(idx.length(), std::ldexp(1.0, -j - 1));
    // the junctions tile [0, 1/2) from the left
    EXPECT_EQ(idx.left_endpoint() + idx.length(), 0.5 - std::ldexp(1.0, -j - 1));
  }
  EXPECT_EQ(junction_interval(1), DyadicIndex(2, 0));
  EXPECT_EQ(junction_interval(3), DyadicIndex(4, 6));
  EXPECT_THROW(junction_interval(0), DomainError);
}

TEST(SelfSimilarPlan, Identities) {
  const double x = 0.5, eps = 0.04;
  const double inner = x * (1 + eps) / (1 - eps) + 2 * eps;
  const auto p = plan_self_similar_step(x, eps, inner, 20);
  EXPECT_NEAR(p.alpha_root + 0.5 * p.theta + 0.5, 1.0, 1e-15);
  EXPECT_LE(std::abs(p.theta_bits - (1.0 - 2.0 * eps / x)), std::ldexp(1.0, -20));
  EXPECT_NEAR(p.achievable_average, x, 1e-5);
  EXPECT_NEAR(p.alpha_root * p.achievable_average, eps, 1e-17);
  EXPECT_EQ(p.junctions.size(), 20u);
  EXPECT_NEAR(p.contraction, (1 - eps) * p.theta / 2, 1e-15);
  EXPECT_LT(p.contraction, 0.5);
  EXPECT_THROW(plan_self_similar_step(0.1, 0.03, 1.0, 20), Infeasible);
  EXPECT_THROW(plan_self_similar_step(1.2, 0.03, 1.0, 20), DomainError);
}

namespace {

ExtremizerPair dense_step(int depth) {
  const double x = 0.8, eps = 0.1;
  const auto inner = build_constant_pair(x * (1 + eps) / (1 - eps) + 2 * eps, 1.0);
  SelfSimilarOptions o;
  o.depth_budget = depth;
  return build_self_similar_step(inner, x, eps, o);
}

}  // namespace

TEST(DenseStep, Invariants) {
  const auto e = dense_step(14);
  EXPECT_NEAR(e.average(), 0.8, 1e-9);
  EXPECT_NEAR(e.total_mass(), 1.0, 1e-9);
  EXPECT_LE(e.carleson_constant(), 1.0 + 1e-9);
  EXPECT_GE(e.achieved_measure, 0.8 - e.truncation.measure_slack);
  EXPECT_LT(e.truncation.measure_slack, 0.01);
  EXPECT_LE(e.achieved_measure, reduced_value({e.average(), 1.0}));
  EXPECT_NEAR(e.achieved_measure, 0.798095703125, 1e-12);
  EXPECT_EQ(e.truncation.depth_used, 14);
}

TEST(DenseStep, RightHalfIsScaledInner) {
  const auto e = dense_step(10);
  const double inner = 0.8 * 1.1 / 0.9 + 0.2;
  const std::size_t half = e.pair.f.size() / 2;
  for (std::size_t i = half; i < e.pair.f.size(); ++i) EXPECT_NEAR(e.pair.f.leaf(i), 0.9 * inner, 1e-15);
  EXPECT_NEAR(e.pair.alpha.at(DyadicIndex(1, 1)), 1.0, 1e-15);
}

TEST(DenseStep, SplittingIdentity) {
  const auto e = dense_step(12);
  const double threshold = 1.0 - e.pair.alpha.at(DyadicIndex::root()) * e.average();
  EXPECT_NEAR(threshold, 0.9, 1e-12);
  double halves = 0.0;
  for (std::uint64_t side : {0u, 1u}) {
    const auto h = restrict_to(e.pair, DyadicIndex(1, side));
    halves += 0.5 * superlevel_measure(apply_shift(h.f, h.alpha), threshold);
  }
  EXPECT_EQ(halves, e.achieved_measure);
}

TEST(DenseStep, ChainAncestorsCarryNothing) {
  const auto e = dense_step(10);
  for (int j = 1; j < 10; ++j) {
    EXPECT_EQ(e.pair.alpha.at(DyadicIndex(j, (std::uint64_t{1} << (j - 1)) - 1)), 0.0) << j;
  }
}

TEST(DenseStep, ContractionBelowPlanRatio) {
  const auto e = dense_step(12);
  const double inner = 0.8 * 1.1 / 0.9 + 0.2;
  const auto p = plan_self_similar_step(0.8, 0.1, inner, 11);
  EXPECT_GT(e.truncation.fixed_point_iterations, 1);
  // copies land on the junctions that carry a bit, each shrunk by 1 - eps
  EXPECT_LE(e.truncation.contraction_ratio, 0.9 * p.theta_bits / 2 + 1e-9);
  EXPECT_LE(std::abs(p.contraction - 0.9 * p.theta_bits / 2), 1e-3);
  EXPECT_LT(e.truncation.fixed_point_change, 1e-10);
}

TEST(DenseStep, Errors) {
  const auto inner = build_constant_pair(0.8 * 1.1 / 0.9 + 0.2, 1.0);
  SelfSimilarOptions o;
  o.depth_budget = 1;
  EXPECT_THROW(build_self_similar_step(inner, 0.8, 0.1, o), Infeasible);
  o.depth_budget = 25;
  EXPECT_THROW(build_self_similar_step(inner, 0.8, 0.1, o), Infeasible);
  EXPECT_THROW(build_self_similar_step(build_constant_pair(1.5, 1.0), 0.8, 0.1), DomainError);
  EXPECT_THROW(build_self_similar_step(build_constant_pair(inner.average(), 0.5), 0.8, 0.1), DomainError);
}

TEST(GraphStep, AgreesWithDenseStep) {
  const auto dense = dense_step(14);
  auto inner = build_constant_pair(0.8 * 1.1 / 0.9 + 0.2, 1.0);
  inner.graph = graph_from_pair(inner.pair);
  const auto g = build_self_similar_step(inner, 0.8, 0.1);
  ASSERT_TRUE(g.compressed());
  EXPECT_NEAR(g.achieved_measure, 0.8, 1e-12);
  EXPECT_NEAR(g.average(), 0.8, 1e-12);
  EXPECT_NEAR(g.total_mass(), 1.0, 1e-12);
  EXPECT_LE(std::abs(g.achieved_measure - dense.achieved_measure), dense.truncation.measure_slack);
  EXPECT_NEAR(g.average(), dense.average(), 1e-9);
}

TEST(FullExtremizer, PinnedAtHalf) {
  const double eps[] = {0.04, 0.02, 0.01};
  const double want[] = {0.63388927422959118, 0.63970705811013007, 0.65542592308079728};
  double prev = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto e = build_theorem_extremizer(0.5, eps[k]);
    EXPECT_NEAR(e.achieved_measure, want[k], 1e-12);
    EXPECT_GT(e.achieved_measure, prev);
    prev = e.achieved_measure;
    EXPECT_NEAR(e.average(), 0.5, 1e-6);
    EXPECT_NEAR(e.total_mass(), 1.0, 1e-6);
    EXPECT_LE(e.carleson_constant(), 1.0 + 1e-9);
    EXPECT_GE(e.achieved_measure,
              product_lower_bound(iterate_x_sequence(0.5, eps[k])) - e.truncation.measure_slack);
    EXPECT_LE(e.achieved_measure, reduced_value({e.average(), 1.0}) + e.truncation.measure_slack);
    EXPECT_LT(e.truncation.measure_slack, 1e-6);
  }
}

TEST(FullExtremizer, DeepStack) {
  const auto e = build_theorem_extremizer(0.1, 0.005);
  EXPECT_EQ(iterate_x_sequence(0.1, 0.005).steps, 60);
  EXPECT_GE(e.truncation.generations, 60);
  EXPECT_NEAR(e.achieved_measure, 0.179143476154, 1e-11);
  EXPECT_GE(e.achieved_measure / e.average(), 1.79);
  EXPECT_LE(e.achieved_measure, reduced_value({e.average(), 1.0}));
}

TEST(FullExtremizer, NearOne) {
  const auto e = build_theorem_extremizer(0.99, 0.01);
  EXPECT_TRUE(iterate_x_sequence(0.99, 0.01).degenerate);
  EXPECT_GE(e.achieved_measure, 0.99 / 1.01 - e.truncation.measure_slack);
  EXPECT_LE(e.achieved_measure, 2 * 0.99 / 1.99 + 1e-9);
}

TEST(FullExtremizer, ViewMatchesGraph) {
  TheoremOptions o;
  o.view_depth = 10;
  const auto e = build_theorem_extremizer(0.25, 0.05, o);
  EXPECT_EQ(e.pair.f.depth(), 10);
  EXPECT_NEAR(average(e.pair.f), e.average(), 1e-13);
  EXPECT_NEAR(total_mass(e.pair.alpha), e.total_mass(), 1e-13);
  EXPECT_NEAR(e.achieved_measure, 0.367609852747, 1e-11);
}

TEST(FullExtremizer, Rejects) {
  EXPECT_THROW(build_theorem_extremizer(0.1, 0.03), Infeasible);
  EXPECT_THROW(build_theorem_extremizer(1.0, 0.01), DomainError);
  TheoremOptions o;
  o.generations = 2;
  EXPECT_THROW(build_theorem_extremizer(0.5, 0.01, o), Infeasible);
  o.generations = 0;
  o.view_depth = 30;
  EXPECT_THROW(build_theorem_extremizer(0.5, 0.01, o), DomainError);
}

TEST(WeakNorm, ObstacleAndFullPair) {
  const auto easy = build_easy_obstacle(2.0, 10);
  const std::vector<double> grid{0.5, 1.0, 1.2};
  // A f = (1024/1023)^2 on the support, so lambda = 1.2 sees nothing
  EXPECT_NEAR(weak_norm_scan(easy, grid), 0.9990234375 / 2.0, 1e-15);
  const auto e = build_theorem_extremizer(0.5, 0.02);
  std::vector<double> lambdas;
  for (int k = 20; k <= 60; ++k) lambdas.push_back(k / 40.0);
  const double r = weak_norm_scan(e, lambdas);
  EXPECT_GE(r, e.achieved_measure / e.average());
  EXPECT_LE(r, 2.0);
  EXPECT_NEAR(r, 1.3113965383716022, 1e-12);
}
