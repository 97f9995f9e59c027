#ifndef DYSHIFT_IO_HPP
#define DYSHIFT_IO_HPP

// JSON for pairs and built extremizers, CSV emitters. Reals in CSV use 17
// significant digits and '.' as decimal separator regardless of locale.

#include <charconv>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "dyshift/bellman.hpp"
#include "dyshift/dp_oracle.hpp"
#include "dyshift/dyadic_core.hpp"
#include "dyshift/dyadic_graph.hpp"
#include "dyshift/error.hpp"
#include "dyshift/extremizer.hpp"
#include "dyshift/verification.hpp"

namespace dyshift {

using json = nlohmann::json;

inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (res.ec != std::errc{}) throw Error("could not format real");
  return {buf, res.ptr};
}

// --- pairs -----------------------------------------------------------------

inline json pair_to_json(const DyadicPair& p) {
  json alpha = json::array();
  for (const auto& [index, value] : p.alpha.coeffs()) {
    alpha.push_back({{"level", index.level}, {"pos", index.position}, {"value", value}});
  }
  return {{"depth", p.f.depth()},
          {"leaves", std::vector<double>(p.f.leaves().begin(), p.f.leaves().end())},
          {"alpha", std::move(alpha)}};
}

inline DyadicPair pair_from_json(const json& j) {
  try {
    const int depth = j.at("depth").get<int>();
    StepFunction f(depth, j.at("leaves").get<std::vector<double>>());
    CarlesonSequence::Map m;
    for (const auto& a : j.at("alpha")) {
      m[DyadicIndex(a.at("level").get<int>(), a.at("pos").get<std::uint64_t>())] = a.at("value").get<double>();
    }
    return {std::move(f), CarlesonSequence(depth, std::move(m))};
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed pair JSON: ") + e.what());
  }
}

inline json graph_to_json(const DyadicGraph& g, const Cutoff& cutoff) {
  json nodes = json::array();
  for (const auto& n : g.nodes()) {
    json children = json::array();
    for (const auto& c : n.children) {
      if (c.is_ref()) children.push_back({{"ref", c.target}, {"scale", c.value}});
      else children.push_back({{"leaf", c.value}});
    }
    nodes.push_back({{"alpha", n.alpha}, {"children", std::move(children)}});
  }
  return {{"root", g.root()},
          {"nodes", std::move(nodes)},
          {"cutoff", {{"max_level", cutoff.max_level}, {"max_generations", cutoff.max_generations}}}};
}

inline DyadicGraph graph_from_json(const json& j, Cutoff& cutoff) {
  try {
    std::vector<GraphNode> nodes;
    for (const auto& n : j.at("nodes")) {
      GraphNode node;
      node.alpha = n.at("alpha").get<double>();
      const auto& ch = n.at("children");
      if (ch.size() != 2) throw DomainError("graph nodes need two children");
      for (std::size_t b = 0; b < 2; ++b) {
        node.children[b] = ch[b].contains("ref")
                               ? GraphChild::ref(ch[b].at("ref").get<std::size_t>(), ch[b].at("scale").get<double>())
                               : GraphChild::leaf(ch[b].at("leaf").get<double>());
      }
      nodes.push_back(node);
    }
    cutoff.max_level = j.at("cutoff").at("max_level").get<int>();
    cutoff.max_generations = j.at("cutoff").at("max_generations").get<int>();
    return DyadicGraph(std::move(nodes), j.at("root").get<std::size_t>());
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed graph JSON: ") + e.what());
  }
}

// --- extremizers -------------------------------------------------------------

inline json truncation_to_json(const TruncationReport& t) {
  return {{"depth_used", t.depth_used},
          {"bits", t.bits},
          {"generations", t.generations},
          {"mass_error_bound", t.mass_error_bound},
          {"bit_error_bound", t.bit_error_bound},
          {"average_error", t.average_error},
          {"measure_slack", t.measure_slack},
          {"fixed_point_iterations", t.fixed_point_iterations},
          {"fixed_point_change", t.fixed_point_change},
          {"contraction_ratio", t.contraction_ratio}};
}

inline TruncationReport truncation_from_json(const json& j) {
  TruncationReport t;
  t.depth_used = j.value("depth_used", 0);
  t.bits = j.value("bits", 0);
  t.generations = j.value("generations", -1);
  t.mass_error_bound = j.value("mass_error_bound", 0.0);
  t.bit_error_bound = j.value("bit_error_bound", 0.0);
  t.average_error = j.value("average_error", 0.0);
  t.measure_slack = j.value("measure_slack", 0.0);
  t.fixed_point_iterations = j.value("fixed_point_iterations", 0);
  t.fixed_point_change = j.value("fixed_point_change", 0.0);
  t.contraction_ratio = j.value("contraction_ratio", 0.0);
  return t;
}

inline json extremizer_to_json(const ExtremizerPair& e) {
  json j = pair_to_json(e.pair);
  j["metadata"] = {{"kind", e.kind},
                   {"target_x", e.target_x},
                   {"eps", e.eps},
                   {"achieved_measure", e.achieved_measure},
                   {"truncation_report", truncation_to_json(e.truncation)}};
  if (e.graph) j["graph"] = graph_to_json(*e.graph, e.cutoff);
  return j;
}

/// Rebuilds a pair and recomputes its measure from the stored data; throws if
/// the recomputed value differs from the recorded one.
inline ExtremizerPair extremizer_from_json(const json& j) {
  ExtremizerPair e;
  e.pair = pair_from_json(j);
  try {
    const auto& meta = j.at("metadata");
    e.kind = meta.value("kind", std::string("custom"));
    e.target_x = meta.at("target_x").get<double>();
    e.eps = meta.at("eps").get<double>();
    e.truncation = truncation_from_json(meta.value("truncation_report", json::object()));
    if (j.contains("graph")) e.graph = graph_from_json(j.at("graph"), e.cutoff);
    e.achieved_measure = e.measure(1.0);
    if (e.achieved_measure != meta.at("achieved_measure").get<double>()) {
      throw Error("recomputed measure differs from the recorded achieved_measure");
    }
  } catch (const json::exception& ex) {
    throw DomainError(std::string("malformed extremizer JSON: ") + ex.what());
  }
  return e;
}

// --- CSV ---------------------------------------------------------------------

template <class Row>
void write_csv_row(std::ostream& os, const Row& cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    first = false;
    os << c;
  }
  os << '\n';
}

/// leaf_index, left_endpoint, value
inline void write_shift_csv(std::ostream& os, const ShiftResult& g) {
  os << "leaf_index,left_endpoint,value\n";
  for (std::size_t i = 0; i < g.leaf_values.size(); ++i) {
    os << i << ',' << format_real(std::ldexp(static_cast<double>(i), -g.depth)) << ','
       << format_real(g.leaf_values[i]) << '\n';
  }
}

/// x, y, M, regime on an (nx + 1) x (ny + 1) grid of [0, x_max] x [0, 1].
inline void write_surface_csv(std::ostream& os, int nx, int ny, double x_max) {
  if (nx < 1 || ny < 1 || !(x_max > 0.0)) throw DomainError("surface grid needs nx, ny >= 1 and x_max > 0");
  os << "x,y,M,regime\n";
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j <= ny; ++j) {
      const ReducedPoint q{x_max * i / nx, static_cast<double>(j) / ny};
      os << format_real(q.x) << ',' << format_real(q.y) << ',' << format_real(reduced_value(q)) << ','
         << to_string(classify_regime({q.x, q.y, 1.0})) << '\n';
    }
  }
}

/// x, A, E_n, M, gap
inline void write_dp_csv(std::ostream& os, const DpGrid& g) {
  os << "x,A,E_n,M,gap\n";
  for (std::size_t i = 0; i < g.nx(); ++i) {
    for (std::size_t j = 0; j < g.na(); ++j) {
      const double m = reduced_value({g.x(i), g.a(j)});
      os << format_real(g.x(i)) << ',' << format_real(g.a(j)) << ',' << format_real(g.at(i, j)) << ','
         << format_real(m) << ',' << format_real(m - g.at(i, j)) << '\n';
    }
  }
}

/// Recorded checker rows: inputs..., slack.
inline void write_suite_csv(std::ostream& os, const SuiteReport& r) {
  write_csv_row(os, r.columns);
  std::vector<std::string> cells;
  for (const auto& row : r.rows) {
    cells.clear();
    for (double v : row) cells.push_back(format_real(v));
    write_csv_row(os, cells);
  }
}

struct ScanRow {
  double x = 0.0;
  double eps = 0.0;
  double measure = 0.0;
  double product_bound = 0.0;
  double ratio = 0.0;
};

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << "x,eps,measure,product_bound,ratio\n";
  for (const auto& r : rows) {
    os << format_real(r.x) << ',' << format_real(r.eps) << ',' << format_real(r.measure) << ','
       << format_real(r.product_bound) << ',' << format_real(r.ratio) << '\n';
  }
}

}  // namespace dyshift

#endif  // DYSHIFT_IO_HPP
