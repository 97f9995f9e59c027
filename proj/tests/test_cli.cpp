#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::initializer_list<const char*> args) {
  std::vector<const char*> argv{"dyshift"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = dyshift::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dyshift_cli_" + name);
}

}  // namespace

TEST(CliEval, PrintsValueAndRegime) {
  auto r = invoke({"eval", "--t", "0.5", "--A", "0.2", "--lambda", "1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.substr(0, r.out.find(' ')), dyshift::format_real(std::sqrt(0.1)));
  EXPECT_NE(r.out.find("middle_wedge"), std::string::npos);
  r = invoke({"eval", "--t", "-1", "--A", "0.5"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(CliEval, SurfaceFile) {
  const auto path = scratch("surface.csv");
  const auto r = invoke({"eval", "--t", "1", "--A", "1", "--out", path.c_str(), "--grid", "4"});
  EXPECT_EQ(r.code, 0);
  const auto s = slurp(path);
  EXPECT_EQ(s.substr(0, s.find('\n')), "x,y,M,regime");
  std::filesystem::remove(path);
}

TEST(CliCheck, PassAndFail) {
  auto r = invoke({"check", "--suite", "concavity", "--samples", "500"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  // the seam gradients only agree to finite-difference accuracy
  r = invoke({"check", "--suite", "c1", "--tol", "1e-12"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(invoke({"check", "--suite", "nope"}).code, 2);
  EXPECT_EQ(invoke({"check"}).code, 2);
}

TEST(CliCheck, RecordsRows) {
  const auto path = scratch("rows.csv");
  const auto r = invoke({"check", "--suite", "main-inequality", "--samples", "20", "--out", path.c_str()});
  EXPECT_EQ(r.code, 0);
  const auto s = slurp(path);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 21);
  std::filesystem::remove(path);
}

TEST(CliExtremal, Easy) {
  const auto r = invoke({"extremal", "--kind", "easy", "--x", "2", "--n", "10"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("measure=0.9990234375 bound=1-2^-n=0.9990234375"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(CliExtremal, FullWritesJson) {
  const auto path = scratch("full.json");
  const auto r = invoke({"extremal", "--kind", "full", "--x", "0.5", "--eps", "0.04", "--depth", "6", "--out",
                         path.c_str()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("measure=0.63388927422959118"), std::string::npos);
  const auto e = dyshift::extremizer_from_json(dyshift::json::parse(slurp(path)));
  EXPECT_EQ(e.achieved_measure, 0.63388927422959118);
  std::filesystem::remove(path);
}

TEST(CliExtremal, SelfSimilarCsv) {
  const auto path = scratch("step.csv");
  const auto r = invoke({"extremal", "--kind", "selfsim", "--x", "0.8", "--eps", "0.1", "--depth", "10", "--format",
                         "csv", "--out", path.c_str()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  const auto s = slurp(path);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 1024);
  std::filesystem::remove(path);
}

TEST(CliExtremal, Rejections) {
  auto r = invoke({"extremal", "--kind", "full", "--x", "0.5", "--eps", "0.4"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("infeasible"), std::string::npos);
  EXPECT_EQ(invoke({"extremal", "--kind", "easy", "--x", "1.25", "--n", "2"}).code, 2);
  EXPECT_EQ(invoke({"extremal", "--kind", "easy", "--x", "2"}).code, 2);
  EXPECT_EQ(invoke({"extremal", "--kind", "wide", "--x", "2"}).code, 2);
  EXPECT_EQ(invoke({"extremal", "--kind", "full", "--x", "0.5", "--generations", "3"}).code, 2);
}

TEST(CliDp, PerIterationFiles) {
  const auto pattern = scratch("dp_{n}.csv").string();
  const auto r = invoke({"dp", "--dx", "0.25", "--da", "0.25", "--iterations", "2", "--out", pattern.c_str()});
  EXPECT_EQ(r.code, 0);
  for (int n = 0; n <= 2; ++n) {
    const auto p = scratch("dp_" + std::to_string(n) + ".csv");
    EXPECT_TRUE(std::filesystem::exists(p)) << p;
    std::filesystem::remove(p);
  }
  EXPECT_NE(r.out.find("n=2 max_excess="), std::string::npos);
  EXPECT_NE(r.out.find("dominance"), std::string::npos);
  EXPECT_EQ(invoke({"dp", "--dx", "0.3"}).code, 2);
}

TEST(CliScan, Rows) {
  const auto r = invoke({"scan", "--x", "0.5", "--eps", "0.04,0.02"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
  EXPECT_NE(r.out.find("0.5,0.040000000000000001,0.63388927422959118,"), std::string::npos);
}

TEST(CliUsage, HelpAndUnknown) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({"frobnicate"}).code, 2);
  EXPECT_EQ(invoke({}).code, 2);
}
