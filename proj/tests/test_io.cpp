#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "dyshift/io.hpp"

using namespace dyshift;

namespace {

int count_lines(const std::string& s) {
  int n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST(FormatReal, SeventeenDigits) {
  EXPECT_EQ(format_real(0.5), "0.5");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(0.9990234375), "0.9990234375");
  EXPECT_EQ(std::stod(format_real(2.0 / 3.0)), 2.0 / 3.0);
}

TEST(PairJson, RoundTripIsExact) {
  const auto e = build_easy_obstacle(2.0, 6);
  const auto back = pair_from_json(json::parse(pair_to_json(e.pair).dump()));
  EXPECT_EQ(back.f.depth(), 6);
  for (std::size_t i = 0; i < back.f.size(); ++i) EXPECT_EQ(back.f.leaf(i), e.pair.f.leaf(i));
  EXPECT_EQ(back.alpha.coeffs(), e.pair.alpha.coeffs());
  EXPECT_THROW(pair_from_json(json::parse(R"({"depth": 1})")), DomainError);
}

TEST(ExtremizerJson, DenseRoundTrip) {
  const auto e = build_easy_obstacle(2.0, 10);
  const auto j = extremizer_to_json(e);
  EXPECT_EQ(j["metadata"]["kind"], "easy");
  const auto back = extremizer_from_json(json::parse(j.dump()));
  EXPECT_EQ(back.achieved_measure, e.achieved_measure);
  EXPECT_FALSE(back.compressed());
}

TEST(ExtremizerJson, GraphRoundTrip) {
  TheoremOptions o;
  o.view_depth = 6;
  const auto e = build_theorem_extremizer(0.5, 0.04, o);
  const auto j = extremizer_to_json(e);
  ASSERT_TRUE(j.contains("graph"));
  const auto back = extremizer_from_json(json::parse(j.dump()));
  ASSERT_TRUE(back.compressed());
  EXPECT_EQ(back.achieved_measure, e.achieved_measure);
  EXPECT_EQ(back.cutoff.max_generations, e.cutoff.max_generations);
  EXPECT_EQ(back.graph->nodes().size(), e.graph->nodes().size());
  EXPECT_EQ(back.truncation.generations, e.truncation.generations);
}

TEST(ExtremizerJson, DetectsTampering) {
  auto j = extremizer_to_json(build_easy_obstacle(2.0, 4));
  j["metadata"]["achieved_measure"] = 0.99;
  EXPECT_THROW(extremizer_from_json(j), Error);
  j["metadata"].erase("eps");
  EXPECT_THROW(extremizer_from_json(j), DomainError);
}

TEST(Csv, Shift) {
  const auto e = build_easy_obstacle(2.0, 2);
  std::ostringstream os;
  write_shift_csv(os, apply_shift(e.pair.f, e.pair.alpha));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "leaf_index,left_endpoint,value");
  EXPECT_EQ(count_lines(s), 5);
  EXPECT_NE(s.find("\n3,0.75,0\n"), std::string::npos);
}

TEST(Csv, Surface) {
  std::ostringstream os;
  write_surface_csv(os, 4, 2, 2.0);
  const std::string s = os.str();
  EXPECT_EQ(count_lines(s), 1 + 5 * 3);
  EXPECT_NE(s.find("\n2,1,1,obstacle\n"), std::string::npos);
  EXPECT_NE(s.find("\n0.5,0.5,0.5,lower_triangle\n"), std::string::npos);
  EXPECT_THROW(write_surface_csv(os, 0, 2, 2.0), DomainError);
}

TEST(Csv, DpGrid) {
  DpParams p;
  p.dx = p.da = 0.5;
  p.x_max = 2.0;
  std::ostringstream os;
  write_dp_csv(os, dp_base(p));
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')), "x,A,E_n,M,gap");
  EXPECT_EQ(count_lines(s), 1 + 5 * 3);
  EXPECT_NE(s.find("\n1,1,0,1,1\n"), std::string::npos);
}

TEST(Csv, SuiteAndScan) {
  SuiteOptions o;
  o.samples = 10;
  o.record = true;
  std::ostringstream os;
  const auto r = run_suite("homogeneity", o);
  write_suite_csv(os, r);
  EXPECT_EQ(count_lines(os.str()), 1 + static_cast<int>(r.rows.size()));
  std::ostringstream scan;
  write_scan_csv(scan, {{0.5, 0.01, 0.6, 0.5, 1.2}});
  EXPECT_EQ(scan.str(), "x,eps,measure,product_bound,ratio\n0.5,0.01,0.59999999999999998,0.5,1.2\n");
}
