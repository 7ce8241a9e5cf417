#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mrf/circulation.hpp"
#include "mrf/cycles.hpp"
#include "mrf/dyn_forest.hpp"
#include "mrf/flat_forest.hpp"
#include "mrf/graph.hpp"

namespace mrf {

struct CycleAnswer {
  SimpleCycle cycle;        // explicit representation
  Circulation circulation;  // same cycle as a flow
  double ratio = 0.0;       // <g,c>/||Lc||_1 recomputed from the cycle
};

namespace detail {

struct Arc {
  VertexId from, to;
  EdgeId edge;
  int dir;  // +1 with orientation (cost g), -1 against (cost -g)
};

inline std::vector<Arc> bidirectedArcs(const DynGraph& g, const std::vector<EdgeId>& edges) {
  std::vector<Arc> arcs;
  arcs.reserve(2 * edges.size());
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head) continue;  // self-loops handled as standalone candidates
    arcs.push_back({r.tail, r.head, e, +1});
    arcs.push_back({r.head, r.tail, e, -1});
  }
  return arcs;
}

// Bellman-Ford negative-cycle detection under weights dir*g(e) - lambda*l(e),
// from a virtual source (all distances start at 0). When improvements persist
// past n rounds a negative cycle exists; extra rounds let the predecessor
// graph wind around it, and marked predecessor walks extract it. Extracted
// cycles are re-evaluated exactly by the caller, so a (never observed) failed
// extraction only loses a candidate, it cannot fabricate one.
inline std::optional<std::vector<std::pair<EdgeId, int>>> negativeCycleWalk(
    const DynGraph& g, const std::vector<Arc>& arcs, double lambda) {
  const std::size_t n = g.vertexCount();
  if (n == 0 || arcs.empty()) return std::nullopt;
  std::vector<double> dist(n, 0.0);
  std::vector<std::int32_t> pred(n, -1);  // arc index into `arcs`
  auto weight = [&](const Arc& a) {
    const EdgeRec& r = g.edge(a.edge);
    return a.dir * r.gradient - lambda * r.length;
  };

  auto tryExtract = [&]() -> std::optional<std::vector<std::pair<EdgeId, int>>> {
    std::vector<std::int8_t> mark(n, 0);
    for (VertexId s = 0; std::size_t(s) < n; ++s) {
      if (pred[s] < 0 || mark[s]) continue;
      // walk predecessors, colouring this attempt's path
      std::vector<VertexId> path;
      VertexId x = s;
      while (x >= 0 && pred[x] >= 0 && !mark[x]) {
        mark[x] = 1;
        path.push_back(x);
        x = arcs[pred[x]].from;
      }
      if (x >= 0 && mark[x] == 1 &&
          std::find(path.begin(), path.end(), x) != path.end()) {
        // cycle: suffix of `path` from the first occurrence of x
        std::vector<std::pair<EdgeId, int>> walk;
        auto it = std::find(path.begin(), path.end(), x);
        for (auto p = it; p != path.end(); ++p) {
          const Arc& a = arcs[pred[*p]];
          walk.push_back({a.edge, a.dir});
        }
        std::reverse(walk.begin(), walk.end());
        return walk;
      }
      for (VertexId v : path) mark[v] = 2;  // exhausted, acyclic tail
    }
    return std::nullopt;
  };

  for (std::size_t round = 0; round < 3 * n + 2; ++round) {
    bool improved = false;
    for (std::size_t i = 0; i < arcs.size(); ++i) {
      const Arc& a = arcs[i];
      double nd = dist[a.from] + weight(a);
      if (nd < dist[a.to]) {
        dist[a.to] = nd;
        pred[a.to] = std::int32_t(i);
        improved = true;
      }
    }
    if (!improved) return std::nullopt;
    if (round + 1 >= n) {
      if (auto w = tryExtract()) return w;
    }
  }
  return std::nullopt;
}

// Best vertex-simple cycle hidden in a closed walk (cancelling +/- traversals).
inline std::optional<SimpleCycle> bestSimpleCycleInWalk(
    const DynGraph& g, const std::vector<std::pair<EdgeId, int>>& walk) {
  Circulation c;
  for (auto [e, dir] : walk) c.add(e, dir);
  if (c.empty()) return std::nullopt;
  auto pieces = decomposeIntoCycles(g, c);
  std::optional<SimpleCycle> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  for (const auto& wc : pieces) {
    double r = wc.cycle.ratio(g);
    if (r < best_ratio) {
      best_ratio = r;
      best = wc.cycle;
    }
  }
  return best;
}

// DFS for any undirected simple cycle (multigraph-aware).
inline std::optional<SimpleCycle> anyUndirectedCycle(const DynGraph& g,
                                                     const std::vector<EdgeId>& edges) {
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head) return SimpleCycle{{{e, +1}}};
  }
  std::map<VertexId, std::vector<EdgeId>> adj;
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    adj[r.tail].push_back(e);
    adj[r.head].push_back(e);
  }
  std::map<VertexId, EdgeId> via;  // vertex -> edge used to enter it
  std::map<VertexId, int> state;   // 0 new, 1 active, 2 done
  for (const auto& [s, _] : adj) {
    if (state[s]) continue;
    std::vector<std::pair<VertexId, std::size_t>> stack{{s, 0}};
    via[s] = kNoEdge;
    state[s] = 1;
    while (!stack.empty()) {
      auto& [v, idx] = stack.back();
      if (idx >= adj[v].size()) {
        state[v] = 2;
        stack.pop_back();
        continue;
      }
      EdgeId e = adj[v][idx++];
      if (e == via[v]) continue;  // do not bounce straight back over the same edge
      const EdgeRec& r = g.edge(e);
      VertexId w = r.tail == v ? r.head : r.tail;
      if (state[w] == 1) {
        // close the cycle w .. v + edge e
        SimpleCycle cyc;
        cyc.steps.push_back({e, r.tail == v ? +1 : -1});
        VertexId x = v;
        while (x != w) {
          EdgeId pe = via[x];
          const EdgeRec& pr = g.edge(pe);
          VertexId px = pr.tail == x ? pr.head : pr.tail;
          cyc.steps.push_back({pe, pr.head == x ? +1 : -1});
          x = px;
        }
        std::reverse(cyc.steps.begin(), cyc.steps.end());
        return cyc;
      }
      if (state[w] == 0) {
        state[w] = 1;
        via[w] = e;
        stack.push_back({w, 0});
      }
    }
  }
  return std::nullopt;
}

}  // namespace detail

// True iff some circulation has ratio < lambda (lambda <= 0). Single
// Bellman-Ford pass; used as the cheap no-good-cycle test.
inline bool hasCycleBelow(const DynGraph& g, double lambda) {
  auto edges = g.liveEdges();
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head &&
        std::min(r.gradient, -r.gradient) / r.length < lambda)
      return true;
  }
  auto arcs = detail::bidirectedArcs(g, edges);
  return detail::negativeCycleWalk(g, arcs, lambda).has_value();
}

// Exact minimum of <g,D>/||LD||_1 over circulations, attained by a simple
// cycle. Parametric search on lambda: a cycle of ratio < lambda exists iff
// the bidirected weighting g - lambda*l admits a negative cycle; 60 bisection
// steps with Bellman-Ford extraction, tracking the best extracted cycle.
inline CycleAnswer exactMinRatio(const DynGraph& g, int bisection_steps = 60) {
  auto edges = g.liveEdges();
  double max_abs_ratio = 0.0;
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    require(r.length > 0.0, Errc::invariant_violation,
            "exact oracle requires strictly positive lengths");
    max_abs_ratio = std::max(max_abs_ratio, std::fabs(r.gradient) / r.length);
  }

  std::optional<SimpleCycle> best;
  double best_ratio = std::numeric_limits<double>::infinity();
  auto consider = [&](const SimpleCycle& c) {
    double r = c.ratio(g);
    if (r < best_ratio) {
      best_ratio = r;
      best = c;
    }
  };

  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head) {
      consider(SimpleCycle{{{e, r.gradient <= 0 ? +1 : -1}}});
    }
  }

  auto arcs = detail::bidirectedArcs(g, edges);
  double lo = -max_abs_ratio - 1.0, hi = 0.0;
  if (auto walk = detail::negativeCycleWalk(g, arcs, hi)) {
    if (auto c = detail::bestSimpleCycleInWalk(g, *walk)) consider(*c);
    for (int it = 0; it < bisection_steps; ++it) {
      double mid = 0.5 * (lo + hi);
      if (auto w = detail::negativeCycleWalk(g, arcs, mid)) {
        if (auto c = detail::bestSimpleCycleInWalk(g, *w)) consider(*c);
        hi = mid;
      } else {
        lo = mid;
      }
      if (best_ratio <= lo) break;  // the tracked cycle is already optimal
    }
  } else if (!best) {
    // no strictly negative orientation anywhere: any cycle has gradient sum ~0
    auto c = detail::anyUndirectedCycle(g, edges);
    require(c.has_value(), Errc::no_cycle, "graph is a forest even undirected");
    if (c->ratio(g) > 0.0) {
      for (auto& [e, dir] : c->steps) dir = -dir;  // prefer the non-positive orientation
    }
    consider(*c);
  }

  require(best.has_value(), Errc::no_cycle, "no cycle found");
  CycleAnswer ans;
  ans.cycle = *best;
  ans.circulation = best->toCirculation();
  ans.ratio = best->ratio(g);
  return ans;
}

// ---------- min-ratio tree cycle over a collection of flat trees ----------

// Off-tree edge closing a fundamental cycle on one tree of a collection.
// `host_edge`/`host_dir` describe the host image (kNoEdge when the edge
// collapses onto one host vertex, e.g. pair edges).
struct OffTreeEdge {
  NodeId a = kNoNode, b = kNoNode;  // endpoints in the tree
  double gradient = 0.0;            // along a -> b
  double length = 0.0;
  EdgeId host_edge = kNoEdge;
  int host_dir = +1;  // host edge direction when traversing a -> b
};

struct TreeCycleAnswer {
  int tree = -1;
  int off_edge = -1;
  int sign = +1;  // +1: traverse off edge a -> b, then tree path b -> a
  double ratio = std::numeric_limits<double>::infinity();
  std::vector<EdgeId> edge_set;  // host edges involved (tie-break key)
};

// Scans every (tree, off-edge, sign) candidate; ratio evaluated via dynamic
// forest path queries. Ties broken by lexicographically smallest host edge set.
class TreeCycleOracle {
 public:
  TreeCycleOracle(const std::vector<FlatForest>& trees,
                  const std::vector<std::vector<OffTreeEdge>>& off_edges)
      : trees_(trees), off_edges_(off_edges) {
    forests_.resize(trees.size());
    for (std::size_t t = 0; t < trees.size(); ++t) {
      DynForest& df = forests_[t];
      const FlatForest& f = trees[t];
      for (NodeId x = 0; std::size_t(x) < f.size(); ++x) {
        const auto& n = f.node(x);
        if (n.parent != kNoNode) df.link(x, n.parent, n.gradient, n.length);
      }
    }
  }

  TreeCycleAnswer best() {
    TreeCycleAnswer out;
    bool any = false;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      for (std::size_t i = 0; i < off_edges_[t].size(); ++i) {
        const OffTreeEdge& e = off_edges_[t][i];
        require(trees_[t].sameTree(e.a, e.b), Errc::invariant_violation,
                "off-tree edge endpoints span tree components");
        any = true;
        double pg = e.a == e.b ? 0.0 : forests_[t].pathGradient(e.b, e.a);
        double pl = e.a == e.b ? 0.0 : forests_[t].pathLength(e.b, e.a);
        double grad = e.gradient + pg;  // cycle: off edge a->b, tree path b->a
        double len = e.length + pl;
        for (int sign : {+1, -1}) {
          double r = sign * grad / len;
          if (r < out.ratio || (r == out.ratio && lexSmaller(t, i, out))) {
            out.tree = int(t);
            out.off_edge = int(i);
            out.sign = sign;
            out.ratio = r;
            out.edge_set = hostEdgeSet(t, i);
          }
        }
      }
    }
    require(any, Errc::empty_candidate_set, "tree cycle oracle has no candidates");
    return out;
  }

  // Host circulation of a candidate (off edge a->b scaled by sign, tree path b->a).
  Circulation expand(const DynGraph& g, const TreeCycleAnswer& ans) const {
    const OffTreeEdge& e = off_edges_[ans.tree][ans.off_edge];
    Circulation c;
    if (e.host_edge != kNoEdge) c.add(e.host_edge, ans.sign * e.host_dir);
    trees_[ans.tree].accumulateHostPath(g, e.b, e.a, ans.sign, c);
    return c;
  }

  const std::vector<FlatForest>& trees() const { return trees_; }

 private:
  std::vector<EdgeId> hostEdgeSet(std::size_t t, std::size_t i) const {
    const OffTreeEdge& e = off_edges_[t][i];
    std::vector<EdgeId> set;
    if (e.host_edge != kNoEdge) set.push_back(e.host_edge);
    trees_[t].forEachPathEdge(e.b, e.a, [&](NodeId child, int) {
      EdgeId he = trees_[t].node(child).host_edge;
      if (he != kNoEdge) set.push_back(he);
    });
    std::sort(set.begin(), set.end());
    return set;
  }

  bool lexSmaller(std::size_t t, std::size_t i, const TreeCycleAnswer& cur) const {
    return hostEdgeSet(t, i) < cur.edge_set;
  }

  const std::vector<FlatForest>& trees_;
  const std::vector<std::vector<OffTreeEdge>>& off_edges_;
  std::vector<DynForest> forests_;
};

// ---------- averaging-bound diagnostic ----------

struct AveragingReport {
  double lhs = 0.0;            // min over edges/signs of g^T P 1_e / ||M 1_e||_1
  double rhs = 0.0;            // exact optimum scaled by 1/||M L^-1||_{1->1}
  double operator_norm = 0.0;  // ||M L^-1||_{1->1} = max_e ||M 1_e||_1 / l(e)
  double exact_opt = 0.0;
  bool holds = false;
};

// Verifies the averaging bound for a caller-supplied cycle projection:
// `project(e)` returns the circulation P 1_e, `column_norm(e)` the value
// ||M 1_e||_1 of the chosen norming matrix.
template <class Project, class ColumnNorm>
AveragingReport averagingBoundCheck(const DynGraph& g, Project&& project,
                                    ColumnNorm&& column_norm) {
  AveragingReport rep;
  rep.lhs = std::numeric_limits<double>::infinity();
  for (EdgeId e : g.liveEdges()) {
    Circulation pc = project(e);
    double denom = column_norm(e);
    if (denom <= 0.0) continue;
    double num = gradientPairing(g, pc);
    rep.lhs = std::min(rep.lhs, std::min(num, -num) / denom);
    rep.operator_norm = std::max(rep.operator_norm, denom / g.edge(e).length);
  }
  rep.exact_opt = exactMinRatio(g).ratio;
  rep.rhs = rep.exact_opt / rep.operator_norm;
  rep.holds = rep.lhs <= rep.rhs + 1e-9 * (1.0 + std::fabs(rep.rhs));
  return rep;
}

}  // namespace mrf
