// mrf: incremental min-cost flow toolkit CLI.
//
// Subcommands run an application over an update-stream file (see README for
// the format). Exit codes: 0 ok, 2 parse error, 3 infeasible/never-feasible,
// 4 internal invariant violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include "mrf/apps.hpp"
#include "mrf/hrg.hpp"
#include "mrf/spanner.hpp"
#include "mrf/stream.hpp"
#include "mrf/tree_oracle.hpp"

using json = nlohmann::json;
using namespace mrf;

namespace {

struct CommonOpts {
  std::string input;
  std::string json_out;
  std::string oracle = "auto";
  long long threshold = 0;
  double epsilon = 0.25;
  int source = 0, sink = 1;
  long long demand = 1;
  int delta = 8;
  std::uint64_t seed = 1;
  bool dump_hrg = false;
  bool trace = false;
};

UpdateStream loadStream(const std::string& path) {
  std::ifstream in(path);
  require(bool(in), Errc::parse_error, "cannot open input file " + path);
  return parseStream(in);
}

void emit(const CommonOpts& opt, const json& j) {
  if (opt.json_out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(opt.json_out);
    out << j.dump(2) << "\n";
  }
}

apps::OracleKind pickOracle(const CommonOpts& opt, int n) {
  if (opt.oracle == "exact") return apps::OracleKind::exact;
  if (opt.oracle == "tree") return apps::OracleKind::tree;
  return apps::defaultOracle(n);
}

std::vector<apps::StreamEdge> insertionsOnly(const UpdateStream& s) {
  std::vector<apps::StreamEdge> edges;
  for (const auto& r : s.records) {
    require(r.kind != StreamRecord::Kind::del_edge, Errc::parse_error,
            "this subcommand accepts insertion-only streams");
    if (r.kind == StreamRecord::Kind::add_edge)
      edges.push_back({r.tail, r.head, r.cap, r.cost});
  }
  return edges;
}

json dumpHrg(const UpdateStream& s, std::uint64_t seed) {
  DynGraph g;
  for (int i = 0; i < s.vertex_count; ++i) g.insertVertex();
  for (const auto& r : s.records)
    if (r.kind == StreamRecord::Kind::add_edge)
      g.insertEdge(r.tail, r.head, double(r.cap), double(r.cost),
                   std::max(1.0, std::fabs(double(r.cost))), double(r.cost));
  Hrg h(g, {.seed = seed});
  json layers = json::array();
  for (int lev = 1; lev < h.kappa(); ++lev) {
    const auto& cov = h.covers()[lev - 1];
    json clusters = json::array();
    for (const auto& cl : cov.clusters) {
      json c;
      c["center"] = cl.center;
      c["vertices"] = cl.vertices;
      c["tree_nodes"] = cl.tree.size();
      clusters.push_back(c);
    }
    layers.push_back({{"level", lev},
                      {"diameter_scale", std::pow(h.gammaDiam(), lev)},
                      {"clusters", clusters}});
  }
  json links = json::array();
  for (const auto& oe : h.outEdges())
    links.push_back({{"kind", "out"}, {"copy", oe.copy}, {"tree_node", oe.tree_node},
                     {"level", oe.level}});
  for (const auto& ie : h.inEdges())
    links.push_back({{"kind", "in"}, {"tree_node", ie.tree_node}, {"copy", ie.copy},
                     {"level", ie.level}});
  return {{"kappa", h.kappa()},
          {"gamma_hrg", h.gammaHrg()},
          {"gamma_diam", h.gammaDiam()},
          {"h_vertices", h.hVertexCount()},
          {"layers", layers},
          {"linking_edges", links}};
}

std::function<void(const IpmStepInfo&)> traceSink(const CommonOpts& opt) {
  if (!opt.trace) return {};
  return [](const IpmStepInfo& info) {
    json line = {{"step", info.step},     {"ratio", info.ratio},   {"eta", info.eta},
                 {"phi", info.phi},       {"cost", info.cost},     {"eprime", info.eprime},
                 {"rebuild", info.rebuilt}};
    std::cout << line.dump() << "\n";
  };
}

int runThresholdFlow(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  auto edges = insertionsOnly(s);
  auto kind = pickOracle(opt, s.vertex_count);
  auto t0 = std::chrono::steady_clock::now();
  auto r = apps::thresholdedMincost(s.vertex_count, edges, opt.threshold, kind,
                                    traceSink(opt));
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json out = {{"subcommand", "threshold-flow"},
              {"threshold", opt.threshold},
              {"insertions", edges.size()},
              {"steps", r.steps},
              {"rebuilds", r.rebuilds},
              {"seconds", dt}};
  if (r.first_feasible) {
    out["first_feasible"] = *r.first_feasible;
    out["witness_cost"] = r.witness_cost;
    json w = json::array();
    for (auto& [e, v] : r.witness)
      if (v != 0) w.push_back({{"edge", e}, {"flow", v}});
    out["witness"] = w;
  } else {
    out["first_feasible"] = nullptr;
  }
  if (opt.dump_hrg) out["hrg"] = dumpHrg(s, opt.seed);
  emit(opt, out);
  return r.first_feasible ? 0 : 3;
}

int runCycleDetect(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  std::vector<std::pair<int, int>> arcs;
  for (const auto& r : s.records) {
    require(r.kind != StreamRecord::Kind::del_edge, Errc::parse_error,
            "cycle-detect accepts insertion-only streams");
    if (r.kind == StreamRecord::Kind::add_edge) arcs.push_back({r.tail, r.head});
  }
  auto idx = apps::cycleDetect(s.vertex_count, arcs, pickOracle(opt, s.vertex_count));
  json out = {{"subcommand", "cycle-detect"}, {"insertions", arcs.size()}};
  out["first_cycle"] = idx ? json(*idx) : json(nullptr);
  if (opt.dump_hrg) out["hrg"] = dumpHrg(s, opt.seed);
  emit(opt, out);
  return idx ? 0 : 3;
}

int runScc(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  std::size_t m = s.edge_count;
  apps::SccMaintainer scc(s.vertex_count, m, pickOracle(opt, s.vertex_count));
  json checkpoints = json::array();
  std::size_t inserted = 0;
  for (const auto& r : s.records) {
    require(r.kind != StreamRecord::Kind::del_edge, Errc::parse_error,
            "scc accepts insertion-only streams");
    if (r.kind == StreamRecord::Kind::add_edge) {
      scc.insert(r.tail, r.head);
      ++inserted;
    } else if (r.kind == StreamRecord::Kind::query) {
      checkpoints.push_back({{"after", inserted}, {"components", scc.components()}});
    }
  }
  json out = {{"subcommand", "scc"},
              {"insertions", inserted},
              {"components", scc.components()},
              {"checkpoints", checkpoints}};
  emit(opt, out);
  return 0;
}

int runApproxFlow(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  auto edges = insertionsOnly(s);
  long long max_cost = 1, max_cap = 1;
  for (auto& e : edges) {
    require(e.cost >= 1, Errc::parse_error, "approx-flow needs positive costs");
    max_cost = std::max(max_cost, e.cost);
    max_cap = std::max(max_cap, e.cap);
  }
  apps::ApproxMincostFlow ap(s.vertex_count, edges.size(), opt.epsilon, opt.source, opt.sink,
                             opt.demand, max_cost, max_cap, pickOracle(opt, s.vertex_count));
  json steps = json::array();
  std::size_t i = 0;
  for (const auto& r : s.records) {
    if (r.kind == StreamRecord::Kind::add_edge) {
      ap.insert(r.tail, r.head, r.cap, r.cost);
      ++i;
      auto v = ap.maintainedCost();
      steps.push_back({{"after", i}, {"maintained_cost", v ? json(*v) : json(nullptr)}});
    }
  }
  auto final_v = ap.maintainedCost();
  json out = {{"subcommand", "approx-flow"},
              {"epsilon", opt.epsilon},
              {"demand", opt.demand},
              {"per_insertion", steps}};
  out["maintained_cost"] = final_v ? json(*final_v) : json(nullptr);
  emit(opt, out);
  return final_v ? 0 : 3;
}

int runShortestPath(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  auto edges = insertionsOnly(s);
  long long max_len = 1;
  for (auto& e : edges) {
    require(e.cost >= 1, Errc::parse_error, "shortest-path needs positive lengths");
    max_len = std::max(max_len, e.cost);
  }
  apps::IncrementalShortestPath sp(s.vertex_count, edges.size(), opt.epsilon, opt.source,
                                   opt.sink, max_len, pickOracle(opt, s.vertex_count));
  json steps = json::array();
  std::size_t i = 0;
  for (auto& e : edges) {
    sp.insert(e.tail, e.head, e.cost);
    ++i;
    auto d = sp.distance();
    steps.push_back({{"after", i}, {"distance", d ? json(*d) : json(nullptr)}});
  }
  auto d = sp.distance();
  json out = {{"subcommand", "shortest-path"},
              {"source", opt.source},
              {"sink", opt.sink},
              {"epsilon", opt.epsilon},
              {"per_insertion", steps}};
  out["distance"] = d ? json(*d) : json(nullptr);
  emit(opt, out);
  return d ? 0 : 3;
}

int runSpannerSim(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  DynSpanner dyn(s.vertex_count, opt.delta);
  json steps = json::array();
  double gamma_running = 1.0;
  std::size_t step = 0;
  for (const auto& r : s.records) {
    if (r.kind == StreamRecord::Kind::add_edge) {
      dyn.insert(r.tail, r.head);
    } else if (r.kind == StreamRecord::Kind::del_edge) {
      dyn.deleteEdge(r.edge);
    } else if (r.kind == StreamRecord::Kind::query) {
      gamma_running = dyn.inner().stretchCertificate().gamma;
    } else {
      continue;
    }
    ++step;
    auto st = dyn.inner().stats();
    std::size_t max_cong = 0;
    for (const auto& e : dyn.inner().edges())
      if (e.alive && !e.embedding.empty()) max_cong = std::max(max_cong, e.embedding.size());
    steps.push_back({{"step", step},
                     {"h_edges", st.h_edges},
                     {"recourse", dyn.totalRecourse()},
                     {"gamma_meas", gamma_running},
                     {"max_embedding_hops", max_cong}});
  }
  auto final_stretch = dyn.inner().stretchCertificate();
  json out = {{"subcommand", "spanner-sim"},
              {"delta", opt.delta},
              {"per_step", steps},
              {"final_gamma_meas", final_stretch.gamma},
              {"rebuilds", dyn.rebuildCount()},
              {"split_moved", dyn.inner().stats().split_moved}};
  emit(opt, out);
  return 0;
}

int runBench(const CommonOpts& opt) {
  auto s = loadStream(opt.input);
  auto edges = insertionsOnly(s);
  auto t0 = std::chrono::steady_clock::now();
  auto r = apps::thresholdedMincost(s.vertex_count, edges, opt.threshold,
                                    pickOracle(opt, s.vertex_count));
  double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json out = {{"subcommand", "bench"},
              {"vertices", s.vertex_count},
              {"insertions", edges.size()},
              {"threshold", opt.threshold},
              {"steps", r.steps},
              {"rebuilds", r.rebuilds},
              {"seconds", dt},
              {"steps_per_second", dt > 0 ? double(r.steps) / dt : 0.0}};
  out["first_feasible"] = r.first_feasible ? json(*r.first_feasible) : json(nullptr);
  emit(opt, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"incremental min-cost flow toolkit"};
  app.require_subcommand(1);
  CommonOpts opt;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("--input", opt.input, "update-stream file")->required();
    sub->add_option("--json-out", opt.json_out, "write the result JSON to a file");
    sub->add_option("--oracle", opt.oracle, "exact|tree|auto (auto: exact up to 64 vertices)");
    sub->add_option("--seed", opt.seed, "seed for the cover construction");
    sub->add_flag("--dump-hrg", opt.dump_hrg, "attach a JSON dump of the routing hierarchy");
    sub->add_flag("--trace", opt.trace, "stream per-step JSON lines to stdout");
  };

  auto* th = app.add_subcommand("threshold-flow", "first index where cost <= F is feasible");
  addCommon(th);
  th->add_option("--threshold", opt.threshold, "cost threshold F")->required();

  auto* cd = app.add_subcommand("cycle-detect", "first insertion closing a directed cycle");
  addCommon(cd);

  auto* sc = app.add_subcommand("scc", "maintain strongly connected components");
  addCommon(sc);

  auto* ap = app.add_subcommand("approx-flow", "(1+eps)-approximate incremental min-cost flow");
  addCommon(ap);
  ap->add_option("--epsilon", opt.epsilon, "approximation parameter");
  ap->add_option("--source", opt.source, "source vertex (default 0)");
  ap->add_option("--sink", opt.sink, "sink vertex (default 1)");
  ap->add_option("--demand", opt.demand, "units to route (default 1)");

  auto* sp = app.add_subcommand("shortest-path", "(1+eps) incremental s-t distance");
  addCommon(sp);
  sp->add_option("--epsilon", opt.epsilon, "approximation parameter");
  sp->add_option("--source", opt.source, "source vertex (default 0)");
  sp->add_option("--sink", opt.sink, "sink vertex (default 1)");

  auto* ss = app.add_subcommand("spanner-sim", "replay a stream through the dynamic spanner");
  addCommon(ss);
  ss->add_option("--delta", opt.delta, "degree bound of the stream");

  auto* be = app.add_subcommand("bench", "threshold-flow with timing instrumentation");
  addCommon(be);
  be->add_option("--threshold", opt.threshold, "cost threshold F");

  CLI11_PARSE(app, argc, argv);

  apps::treeOracleFactory() = [&] { return makeTreeOracle(); };

  try {
    if (th->parsed()) return runThresholdFlow(opt);
    if (cd->parsed()) return runCycleDetect(opt);
    if (sc->parsed()) return runScc(opt);
    if (ap->parsed()) return runApproxFlow(opt);
    if (sp->parsed()) return runShortestPath(opt);
    if (ss->parsed()) return runSpannerSim(opt);
    if (be->parsed()) return runBench(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.code == Errc::parse_error) return 2;
    if (e.code == Errc::never_feasible || e.code == Errc::disconnected) return 3;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
