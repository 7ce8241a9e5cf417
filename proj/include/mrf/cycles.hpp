#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include "mrf/circulation.hpp"
#include "mrf/graph.hpp"

namespace mrf {

// A cycle as (edge, direction) steps; direction +1 runs with the edge orientation.
struct SimpleCycle {
  std::vector<std::pair<EdgeId, int>> steps;

  Circulation toCirculation(double amount = 1.0) const {
    Circulation c;
    for (auto [e, dir] : steps) c.add(e, dir * amount);
    return c;
  }

  double gradient(const DynGraph& g) const {
    double s = 0.0;
    for (auto [e, dir] : steps) s += dir * g.edge(e).gradient;
    return s;
  }

  double length(const DynGraph& g) const {
    double s = 0.0;
    for (auto [e, dir] : steps) s += g.edge(e).length;
    return s;
  }

  double ratio(const DynGraph& g) const { return gradient(g) / length(g); }
};

struct WeightedCycle {
  SimpleCycle cycle;
  double amount = 0.0;
};

// Decomposes a circulation into vertex-simple weighted cycles (conservation assumed).
// Residues below `tol` are dropped.
inline std::vector<WeightedCycle> decomposeIntoCycles(const DynGraph& g, const Circulation& c,
                                                      double tol = 1e-12) {
  std::vector<WeightedCycle> out;
  std::map<EdgeId, double> residue;
  for (const auto& [e, v] : c.entries)
    if (std::fabs(v) > tol) residue[e] = v;

  // arcs out of a vertex per current residue signs
  auto findArc = [&](VertexId v) -> std::pair<EdgeId, int> {
    for (EdgeId e : g.incident(v)) {
      auto it = residue.find(e);
      if (it == residue.end()) continue;
      const EdgeRec& rec = g.edge(e);
      if (it->second > tol && rec.tail == v) return {e, +1};
      if (it->second < -tol && rec.head == v) return {e, -1};
    }
    return {kNoEdge, 0};
  };

  while (!residue.empty()) {
    auto start_it = residue.begin();
    EdgeId e0 = start_it->first;
    int d0 = start_it->second > 0 ? +1 : -1;
    const EdgeRec& rec0 = g.edge(e0);

    // self-loop carries its own cycle
    if (rec0.tail == rec0.head) {
      WeightedCycle wc;
      wc.cycle.steps = {{e0, d0}};
      wc.amount = std::fabs(start_it->second);
      out.push_back(wc);
      residue.erase(start_it);
      continue;
    }

    // walk forward until a vertex repeats
    std::vector<std::pair<EdgeId, int>> walk = {{e0, d0}};
    std::map<VertexId, std::size_t> seen;  // vertex -> index into walk where it was entered
    VertexId at = d0 > 0 ? rec0.head : rec0.tail;
    seen[d0 > 0 ? rec0.tail : rec0.head] = 0;
    while (!seen.count(at)) {
      seen[at] = walk.size();
      auto [e, dir] = findArc(at);
      require(e != kNoEdge, Errc::invariant_violation, "flow decomposition: dead end (not a circulation?)");
      walk.push_back({e, dir});
      const EdgeRec& rec = g.edge(e);
      at = dir > 0 ? rec.head : rec.tail;
    }

    // the loop is the suffix starting where `at` was first entered
    std::size_t from = seen[at];
    WeightedCycle wc;
    double amt = std::numeric_limits<double>::infinity();
    for (std::size_t i = from; i < walk.size(); ++i) {
      wc.cycle.steps.push_back(walk[i]);
      amt = std::min(amt, std::fabs(residue[walk[i].first]));
    }
    wc.amount = amt;
    out.push_back(wc);
    for (auto [e, dir] : wc.cycle.steps) {
      double& r = residue[e];
      r -= dir * amt;
      if (std::fabs(r) <= tol) residue.erase(e);
    }
  }
  return out;
}

}  // namespace mrf
