#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "mrf/circulation.hpp"
#include "mrf/cycles.hpp"
#include "mrf/graph.hpp"

namespace mrf::testing {

using Rng = std::mt19937_64;

inline int randint(Rng& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double randreal(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random multigraph with integer gradients in [-gmax, gmax] and integer
// lengths in [1, lmax]. Self-loops excluded unless asked for.
inline DynGraph randomGradientGraph(Rng& rng, int n, int m, int gmax = 8, int lmax = 8,
                                    bool self_loops = false) {
  DynGraph g;
  for (int i = 0; i < n; ++i) g.insertVertex();
  for (int i = 0; i < m; ++i) {
    int a = randint(rng, 0, n - 1);
    int b = randint(rng, 0, n - 1);
    if (!self_loops && a == b && n > 1) b = (a + 1 + randint(rng, 0, n - 2)) % n;
    g.insertEdge(a, b, 1.0, 0.0, double(randint(rng, 1, lmax)),
                 double(randint(rng, -gmax, gmax)));
  }
  return g;
}

// Every vertex-simple cycle, each undirected cycle emitted once (orientation
// normalization is the caller's business). Includes 2-cycles through
// parallel/antiparallel edge pairs and self-loops. Small n only.
inline std::vector<SimpleCycle> enumerateSimpleCycles(const DynGraph& g) {
  std::vector<SimpleCycle> out;
  for (EdgeId e : g.liveEdges()) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head) out.push_back({{{e, +1}}});
  }

  std::vector<std::pair<EdgeId, int>> path;
  std::set<VertexId> on_path;

  // Canonical form: start = smallest vertex on the cycle, and the first edge
  // id is smaller than the closing edge id (kills the reversed duplicate).
  std::function<void(VertexId, VertexId)> dfs = [&](VertexId start, VertexId at) {
    for (EdgeId e : g.incident(at)) {
      const EdgeRec& r = g.edge(e);
      if (r.tail == r.head) continue;
      if (!path.empty() && e == path.back().first) continue;
      VertexId to = r.tail == at ? r.head : r.tail;
      int dir = r.tail == at ? +1 : -1;
      if (to == start) {
        if (!path.empty() && path.front().first < e) {
          path.push_back({e, dir});
          out.push_back({path});
          path.pop_back();
        }
        continue;
      }
      if (to < start || on_path.count(to)) continue;
      path.push_back({e, dir});
      on_path.insert(to);
      dfs(start, to);
      on_path.erase(to);
      path.pop_back();
    }
  };

  for (VertexId s = 0; std::size_t(s) < g.vertexCount(); ++s) {
    if (!g.vertexAlive(s)) continue;
    on_path.clear();
    path.clear();
    dfs(s, s);
  }
  return out;
}

inline double exhaustiveMinRatio(const DynGraph& g) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : enumerateSimpleCycles(g)) {
    double r = c.ratio(g);
    best = std::min(best, std::min(r, -r));
  }
  return best;
}

// Undirected connectivity over live edges.
inline bool connectedInGraph(const DynGraph& g, VertexId a, VertexId b) {
  if (a == b) return true;
  std::set<VertexId> seen{a};
  std::vector<VertexId> q{a};
  while (!q.empty()) {
    VertexId v = q.back();
    q.pop_back();
    for (EdgeId e : g.incident(v)) {
      const EdgeRec& r = g.edge(e);
      VertexId w = r.tail == v ? r.head : r.tail;
      if (w == b) return true;
      if (seen.insert(w).second) q.push_back(w);
    }
  }
  return false;
}

}  // namespace mrf::testing
