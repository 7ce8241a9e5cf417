#pragma once

#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "helpers.hpp"
#include "mrf/hrg.hpp"

namespace mrf::testing {

DynGraph randomLengthGraph(Rng& rng, int n, int m, int lmax = 6, int gmax = 4) {
  DynGraph g;
  for (int i = 0; i < n; ++i) g.insertVertex();
  for (int i = 0; i < m; ++i) {
    int a = randint(rng, 0, n - 1), b = randint(rng, 0, n - 1);
    if (a == b) b = (b + 1) % n;
    g.insertEdge(a, b, 1, 0, double(randint(rng, 1, lmax)), double(randint(rng, -gmax, gmax)));
  }
  return g;
}

// All monotone cycles of the abstracted HRG with (optionally) the base edge
// of a host edge: pairs of ascending abstract paths joined at an apex,
// vertex-disjoint below it. Small instances only.
struct EnumeratedCycle {
  std::vector<int> up, down;  // abstraction indices
  int bottom_up, bottom_down; // copy ids the two paths start at
};

void ascendingPaths(const Hrg& h, const std::vector<Hrg::AbstractEdge>& abs,
                    const std::vector<std::vector<int>>& out_of, int from,
                    std::vector<int>& cur, std::vector<EnumeratedCycle>& sink,
                    const std::function<void(const std::vector<int>&)>& fn) {
  (void)sink;
  fn(cur);
  int at = cur.empty() ? from : abs[cur.back()].to_copy;
  if (std::size_t(at) < out_of.size()) {
    for (int ei : out_of[at]) {
      cur.push_back(ei);
      ascendingPaths(h, abs, out_of, from, cur, sink, fn);
      cur.pop_back();
    }
  }
}

std::vector<EnumeratedCycle> enumerateMonotoneCycles(const Hrg& h,
                                                     const std::vector<Hrg::AbstractEdge>& abs,
                                                     int bottom_up, int bottom_down) {
  std::vector<std::vector<int>> out_of(h.hVertexCount());
  for (int i = 0; i < int(abs.size()); ++i) out_of[abs[i].from_copy].push_back(i);
  std::vector<EnumeratedCycle> cycles;
  std::vector<std::vector<int>> ups, downs;
  std::vector<int> cur;
  ascendingPaths(h, abs, out_of, bottom_up, cur, cycles,
                 [&](const std::vector<int>& p) { if (!p.empty()) ups.push_back(p); });
  cur.clear();
  ascendingPaths(h, abs, out_of, bottom_down, cur, cycles,
                 [&](const std::vector<int>& p) { if (!p.empty()) downs.push_back(p); });
  for (const auto& up : ups) {
    for (const auto& down : downs) {
      if (abs[up.back()].to_copy != abs[down.back()].to_copy) continue;
      // interiors vertex-disjoint below the apex (internal cycles share the bottom)
      std::set<int> seen;
      bool ok = true;
      seen.insert(bottom_up);
      for (int e : up) seen.insert(abs[e].to_copy);
      if (bottom_down != bottom_up && !seen.insert(bottom_down).second) ok = false;
      if (bottom_down == bottom_up && up.front() == down.front()) ok = false;
      for (std::size_t i = 0; ok && i + 1 < down.size(); ++i)
        if (!seen.insert(abs[down[i]].to_copy).second) ok = false;
      if (ok) cycles.push_back({up, down, bottom_up, bottom_down});
    }
  }
  return cycles;
}

// Signed circulation over canonical H edge keys: sign +1 runs min(a,b) -> max.
using HCirc = std::map<std::pair<int, int>, int>;

void addSigned(HCirc& c, int from, int to, int mult) {
  auto k = std::make_pair(std::min(from, to), std::max(from, to));
  c[k] += (from < to ? mult : -mult);
  if (c[k] == 0) c.erase(k);
}

// Adds the H image of one abstract edge (out edge + tree path + in edge),
// traversed from from_copy to to_copy, scaled by mult into a signed circulation.
void addAbstractImage(HCirc& c, const Hrg& h, const Hrg::AbstractEdge& ae, int mult) {
  const auto& cl = h.covers()[ae.level - 1].clusters[ae.cluster];
  const auto& ie = h.inEdgeOf(ae.level, ae.cluster);
  NodeId x = cl.node_of.at(h.copyHost(ae.from_copy));
  NodeId y = NodeId(ie.tree_node - h.forestNodeId(ae.level, ae.cluster, 0));
  addSigned(c, ae.from_copy, h.forestNodeId(ae.level, ae.cluster, x), mult);
  cl.tree.forEachPathEdge(x, y, [&](NodeId child, int dir) {
    int hc = h.forestNodeId(ae.level, ae.cluster, child);
    int hp = h.forestNodeId(ae.level, ae.cluster, cl.tree.node(child).parent);
    // dir = +1 when the x -> y walk runs child -> parent
    if (dir > 0) addSigned(c, hc, hp, mult);
    else addSigned(c, hp, hc, mult);
  });
  addSigned(c, ie.tree_node, ie.copy, mult);
}


}  // namespace mrf::testing
