#ifndef DYSHIFT_TOOLS_CLI_HPP
#define DYSHIFT_TOOLS_CLI_HPP

// dyshift command line: eval, check, extremal, dp, scan.
// Exit codes: 0 all checks pass, 1 verification failure, 2 usage or
// infeasible parameters.

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dyshift/dyshift.hpp"

namespace dyshift::cli {

enum ExitCode { kPass = 0, kVerificationFailure = 1, kUsage = 2 };

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw DomainError("cannot open '" + path + "' for writing");
  return os;
}

inline const char* mark(bool ok) { return ok ? "ok" : "FAIL"; }

inline std::vector<double> default_lambdas() {
  std::vector<double> l;
  for (int k = 20; k <= 60; ++k) l.push_back(k / 40.0);
  return l;
}

struct EvalArgs {
  double t = 0.0, a = 0.0, lambda = 1.0;
  std::string out;
  int grid = 100;
  double x_max = 3.0;
};

inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const BellmanPoint p{a.t, a.a, a.lambda};
  out << format_real(bellman_value(p)) << ' ' << to_string(classify_regime(p)) << '\n';
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    write_surface_csv(os, a.grid, a.grid, a.x_max);
  }
  return kPass;
}

struct CheckArgs {
  std::string suite;
  std::size_t samples = 0;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> tol;
  std::string out;
};

inline int cmd_check(const CheckArgs& a, std::ostream& out) {
  SuiteOptions opt;
  opt.samples = a.samples;
  opt.seed = a.seed;
  opt.tol = a.tol.value_or(-1.0);
  opt.record = !a.out.empty();
  const SuiteReport r = run_suite(a.suite, opt);
  out << "suite=" << r.name << " samples=" << r.samples << " seed=" << a.seed << '\n';
  for (const auto& c : r.checks) {
    out << "  " << c.label << ": " << format_real(c.value) << (c.lower_bound ? " >= -" : " <= ")
        << format_real(c.tolerance) << ' ' << mark(c.passed()) << '\n';
  }
  out << (r.passed() ? "PASS" : "FAIL") << '\n';
  if (!a.out.empty()) {
    auto os = open_out(a.out);
    write_suite_csv(os, r);
  }
  return r.passed() ? kPass : kVerificationFailure;
}

struct ExtremalArgs {
  std::string kind;
  double x = 0.0;
  double eps = 0.01;
  std::optional<int> n;
  std::optional<int> depth;
  int bits = 24;
  int generations = 0;
  std::string out;
  std::string format = "json";
};

inline int cmd_extremal(const ExtremalArgs& a, std::ostream& out) {
  ExtremizerPair e;
  double bound = 0.0;
  std::string bound_label;
  double lower = 0.0;  // certified floor for the achieved measure
  bool exact_floor = false;
  double target_mass = 1.0;

  if (a.kind == "easy") {
    const int n = a.n ? *a.n : a.depth ? *a.depth : throw DomainError("--kind easy needs --n");
    e = build_easy_obstacle(a.x, n);
    bound = 1.0 - std::ldexp(1.0, -n);
    bound_label = "1-2^-n";
    lower = bound;
    exact_floor = true;
    target_mass = 1.0 / a.x;
  } else if (a.kind == "selfsim") {
    const double x_plus = a.x * (1.0 + a.eps) / (1.0 - a.eps) + 2.0 * a.eps;
    const auto inner = build_constant_pair(x_plus, 1.0);
    SelfSimilarOptions opt;
    opt.depth_budget = a.depth.value_or(16);
    opt.bits = a.bits;
    e = build_self_similar_step(inner, a.x, a.eps, opt);
    bound = 2.0 * a.x / (a.x + 1.0);
    bound_label = "2x/(x+1)";
    lower = a.x / (a.x + 2.0 * a.eps) * inner.achieved_measure - e.truncation.measure_slack;
  } else {
    TheoremOptions opt;
    opt.bits = a.bits;
    opt.generations = a.generations;
    opt.view_depth = a.depth.value_or(12);
    e = build_theorem_extremizer(a.x, a.eps, opt);
    bound = 2.0 * a.x / (a.x + 1.0);
    bound_label = "2x/(x+1)";
    lower = product_lower_bound(iterate_x_sequence(a.x, a.eps)) - e.truncation.measure_slack;
  }

  const int depth = e.compressed() ? e.truncation.depth_used : e.pair.f.depth();
  out << "x=" << format_real(a.x) << " eps=" << format_real(e.eps) << " depth=" << depth
      << " measure=" << format_real(e.achieved_measure) << " bound=" << bound_label << '='
      << format_real(bound) << '\n';

  // independent re-verification on the stored dense pair
  const DyadicPair& p = e.pair;
  const double c = carleson_constant(p.alpha);
  const double mass = total_mass(p.alpha);
  const double avg = average(p.f);
  const double view_measure = superlevel_measure(apply_shift(p.f, p.alpha), 1.0);
  const double recomputed = e.compressed() ? e.graph->superlevel_measure(1.0, e.cutoff).truncated : view_measure;
  const double tol = 1e-12;
  struct Line {
    std::string label;
    bool ok;
  };
  std::vector<Line> lines{
      {"carleson_constant=" + format_real(c) + " <= 1", c <= 1.0 + 1e-9},
      {"average=" + format_real(avg) + " error=" + format_real(std::abs(avg - a.x)),
       std::abs(avg - a.x) <= e.truncation.average_error + tol},
      {"total_mass=" + format_real(mass) + " target=" + format_real(target_mass),
       std::abs(mass - target_mass) <= e.truncation.mass_error_bound + tol},
      {"measure recomputed=" + format_real(recomputed), recomputed == e.achieved_measure},
      {std::string(exact_floor ? "measure == " : "measure >= ") + format_real(lower),
       exact_floor ? e.achieved_measure == lower : e.achieved_measure >= lower - tol},
  };
  if (e.compressed()) {
    lines.push_back({"dense view depth=" + std::to_string(p.f.depth()) + " measure=" + format_real(view_measure) +
                         " generations=" + std::to_string(e.truncation.generations) +
                         " slack=" + format_real(e.truncation.measure_slack),
                     true});
  }
  bool ok = true;
  for (const auto& l : lines) {
    out << "  " << l.label << ' ' << mark(l.ok) << '\n';
    ok = ok && l.ok;
  }

  if (!a.out.empty()) {
    auto os = open_out(a.out);
    if (a.format == "csv") write_shift_csv(os, apply_shift(p.f, p.alpha));
    else os << extremizer_to_json(e).dump(1) << '\n';
  }
  return ok ? kPass : kVerificationFailure;
}

struct DpArgs {
  DpParams params;
  double slack = 0.02;
  std::string out;  // "{n}" in the path expands to the iteration number
};

inline int cmd_dp(const DpArgs& a, std::ostream& out) {
  const std::vector<std::array<double, 2>> probes{{0.5, 1.0}, {0.25, 0.5}, {1.0, 1.0}, {0.25, 0.25}, {2.0, 0.5}};
  const auto placeholder = a.out.find("{n}");
  std::function<void(const DpGrid&)> dump;
  if (placeholder != std::string::npos) {
    dump = [&](const DpGrid& g) {
      std::string path = a.out;
      path.replace(placeholder, 3, std::to_string(g.iteration()));
      auto os = open_out(path);
      write_dp_csv(os, g);
    };
  }
  const DpReport rep = dp_run(a.params, probes, dump);
  if (!a.out.empty() && placeholder == std::string::npos) {
    auto os = open_out(a.out);
    write_dp_csv(os, rep.grid);
  }
  for (std::size_t n = 0; n < rep.max_violation.size(); ++n) {
    out << "n=" << n << " max_excess=" << format_real(rep.max_violation[n]);
    for (const auto& p : rep.probes) {
      out << " E(" << format_real(p.x) << ',' << format_real(p.a) << ")=" << format_real(p.values[n]);
    }
    out << '\n';
  }
  for (const auto& p : rep.probes) {
    out << "probe x=" << format_real(p.x) << " A=" << format_real(p.a) << " M=" << format_real(p.target)
        << " E=" << format_real(p.values.back()) << " gap=" << format_real(p.gap()) << '\n';
  }
  const bool dominated = rep.worst_violation() <= a.slack;
  out << "dominance max(E - M)=" << format_real(rep.worst_violation()) << " <= " << format_real(a.slack) << ' '
      << mark(dominated) << '\n';
  out << "monotone in n " << mark(rep.monotone_in_n) << ", in (x, A) " << mark(rep.monotone_in_coordinates)
      << ", closure used in " << rep.closure_iterations << " iterations\n";
  return dominated && rep.monotone_in_n && rep.monotone_in_coordinates ? kPass : kVerificationFailure;
}

struct ScanArgs {
  double x = 0.0;
  std::vector<double> eps;
  int bits = 24;
  int generations = 0;
  std::string out;
};

inline int cmd_scan(const ScanArgs& a, std::ostream& out) {
  std::vector<ScanRow> rows;
  const auto lambdas = default_lambdas();
  for (double eps : a.eps) {
    TheoremOptions opt;
    opt.bits = a.bits;
    opt.generations = a.generations;
    opt.view_depth = 0;
    const auto e = build_theorem_extremizer(a.x, eps, opt);
    rows.push_back({a.x, eps, e.achieved_measure, product_lower_bound(iterate_x_sequence(a.x, eps)),
                    weak_norm_scan(e, lambdas)});
  }
  if (a.out.empty()) {
    write_scan_csv(out, rows);
  } else {
    auto os = open_out(a.out);
    write_scan_csv(os, rows);
    out << rows.size() << " rows written to " << a.out << '\n';
  }
  return kPass;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Bellman function, extremizers and DP lower bounds for positive dyadic shifts", "dyshift"};
  app.require_subcommand(1);

  detail::EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "closed-form value B(t, A, lambda) and its regime");
  eval->add_option("--t", eval_args.t, "function average t >= 0")->required();
  eval->add_option("--A", eval_args.a, "Carleson mass A in [0, 1]")->required();
  eval->add_option("--lambda", eval_args.lambda, "threshold")->capture_default_str();
  eval->add_option("--out", eval_args.out, "write the surface M(x, y) as CSV");
  eval->add_option("--grid", eval_args.grid, "surface grid intervals per axis")->capture_default_str();
  eval->add_option("--x-max", eval_args.x_max, "surface x range")->capture_default_str();

  detail::CheckArgs check_args;
  std::vector<std::string> suites(suite_names().begin(), suite_names().end());
  auto* check = app.add_subcommand("check", "run a checker suite on the closed form");
  check->add_option("--suite", check_args.suite, "suite name")->required()->check(CLI::IsMember(suites));
  check->add_option("--samples", check_args.samples, "sample count (0 = suite default)");
  check->add_option("--seed", check_args.seed, "random seed")->capture_default_str();
  check->add_option("--tol", check_args.tol, "tolerance override");
  check->add_option("--out", check_args.out, "write per-sample rows as CSV");

  detail::ExtremalArgs ext_args;
  auto* extremal = app.add_subcommand("extremal", "build and verify an extremizing pair");
  extremal->add_option("--kind", ext_args.kind, "easy | selfsim | full")
      ->required()
      ->check(CLI::IsMember({"easy", "selfsim", "full"}));
  extremal->add_option("--x", ext_args.x, "target average")->required();
  extremal->add_option("--eps", ext_args.eps, "step parameter")->capture_default_str();
  extremal->add_option("--n", ext_args.n, "depth of the easy obstacle example");
  extremal->add_option("--depth", ext_args.depth, "dense depth (selfsim: budget, full: stored view)");
  extremal->add_option("--bits", ext_args.bits, "binary digits kept of theta")->capture_default_str();
  extremal->add_option("--generations", ext_args.generations, "self-similar generations (0 = automatic)")
      ->capture_default_str();
  extremal->add_option("--out", ext_args.out, "write the pair");
  extremal->add_option("--format", ext_args.format, "json | csv")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv"}));

  detail::DpArgs dp_args;
  auto* dp = app.add_subcommand("dp", "value iteration lower bound for E(x, A)");
  dp->add_option("--dx", dp_args.params.dx, "x step (1/m)")->capture_default_str();
  dp->add_option("--da", dp_args.params.da, "A step (1/m)")->capture_default_str();
  dp->add_option("--x-max", dp_args.params.x_max, "x cap")->capture_default_str();
  dp->add_option("--iterations", dp_args.params.iterations, "iterations")->capture_default_str();
  dp->add_option("--slack", dp_args.slack, "allowed excess of E_n over M")->capture_default_str();
  dp->add_option("--out", dp_args.out, "CSV path; {n} expands per iteration");

  detail::ScanArgs scan_args;
  auto* scan = app.add_subcommand("scan", "measures and weak-norm ratios of the full extremizer over eps");
  scan->add_option("--x", scan_args.x, "target average")->required();
  scan->add_option("--eps", scan_args.eps, "comma-separated eps values")->delimiter(',');
  scan->add_option("--bits", scan_args.bits, "binary digits kept of theta")->capture_default_str();
  scan->add_option("--generations", scan_args.generations, "self-similar generations (0 = automatic)")
      ->capture_default_str();
  scan->add_option("--out", scan_args.out, "CSV path (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*eval) return detail::cmd_eval(eval_args, out);
    if (*check) return detail::cmd_check(check_args, out);
    if (*extremal) return detail::cmd_extremal(ext_args, out);
    if (*dp) return detail::cmd_dp(dp_args, out);
    if (*scan) return detail::cmd_scan(scan_args, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kUsage;
  } catch (const DepthMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "verification failed: " << e.what() << '\n';
    return kVerificationFailure;
  }
  return kUsage;
}

}  // namespace dyshift::cli

#endif  // DYSHIFT_TOOLS_CLI_HPP
