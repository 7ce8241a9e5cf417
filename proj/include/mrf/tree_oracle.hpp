#pragma once

#include <limits>
#include <vector>

#include "mrf/graph.hpp"
#include "mrf/hrg.hpp"
#include "mrf/ipm.hpp"
#include "mrf/oracle.hpp"

namespace mrf {

// Min-ratio cycle oracle over the HRG tree collection: rebuilds covers, HRG
// and trees from the current working graph (lengths rescaled into [1, L]),
// scans every (tree, off-edge, sign) candidate with dynamic-forest path
// queries, and expands the winner into a host circulation.
struct TreeOracleConfig {
  Hrg::Params hrg;
};

inline IpmOracleResult treeOracleQuery(const DynGraph& g, double q_effective,
                                       const TreeOracleConfig& cfg) {
  IpmOracleResult out;
  if (g.liveEdgeCount() == 0) return out;
  double min_len = std::numeric_limits<double>::infinity();
  for (EdgeId e : g.liveEdges()) min_len = std::min(min_len, g.edge(e).length);
  require(min_len > 0.0, Errc::invariant_violation, "tree oracle requires positive lengths");
  const double scale = 1.0 / min_len;  // rescaled lengths sit in [1, L]

  DynGraph scaled;
  for (VertexId v = 0; std::size_t(v) < g.vertexCount(); ++v) scaled.insertVertex();
  std::vector<EdgeId> back(g.edgeSlots(), kNoEdge);
  for (EdgeId e : g.liveEdges()) {
    const EdgeRec& r = g.edge(e);
    EdgeId se = scaled.insertEdge(r.tail, r.head, r.capacity, r.cost, r.length * scale,
                                  r.gradient);
    back[se] = e;
  }

  Hrg hrg(scaled, cfg.hrg);
  auto [egraph, epair] = hrg.offTreeEdgeSets();

  double best_ratio = std::numeric_limits<double>::infinity();
  Circulation best_circ;
  hrg.forEachCollectionTree([&](const Hrg::CollectionTree& ct) {
    std::vector<FlatForest> trees{ct.forest};
    std::vector<std::vector<OffTreeEdge>> offs(1);
    for (const auto& eg : egraph) {
      const EdgeRec& r = scaled.edge(eg.host);
      offs[0].push_back({ct.node_of_h[eg.copy_tail], ct.node_of_h[eg.copy_head], r.gradient,
                         r.length, eg.host, +1});
    }
    for (const auto& ep : epair) {
      offs[0].push_back({ct.node_of_h[ep.node_a], ct.node_of_h[ep.node_b], 0.0, ep.length,
                         kNoEdge, 0});
    }
    if (offs[0].empty()) return;
    TreeCycleOracle oracle(trees, offs);
    auto ans = oracle.best();
    if (ans.ratio < best_ratio) {
      Circulation c = oracle.expand(scaled, ans);
      if (!c.empty()) {
        best_ratio = ans.ratio;
        best_circ = std::move(c);
      }
    }
  });

  if (!std::isfinite(best_ratio)) return out;
  // express on the working graph and re-evaluate there
  Circulation host;
  for (const auto& [se, v] : best_circ.entries) host.add(back[se], v);
  double num = gradientPairing(g, host);
  double den = weightedLength(g, host);
  if (den <= 0.0) return out;
  double ratio = num / den;
  if (ratio > q_effective) return out;  // certified: nothing below q_eff found
  out.found = true;
  out.cycle = std::move(host);
  out.ratio = ratio;
  return out;
}

inline IpmOracle makeTreeOracle(TreeOracleConfig cfg = {}) {
  return [cfg](const DynGraph& g, double q_effective) {
    return treeOracleQuery(g, q_effective, cfg);
  };
}

}  // namespace mrf
