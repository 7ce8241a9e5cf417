#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <vector>

#include "mrf/flat_forest.hpp"
#include "mrf/graph.hpp"

namespace mrf {

// Sparse neighborhood cover at one distance scale: clusters with low-diameter
// shortest-path trees (flat over the host), covering every radius-(D/gamma)
// ball, with each vertex in at most gamma clusters.
struct NeighborhoodCover {
  struct Cluster {
    VertexId center = kNoVertex;
    std::vector<VertexId> vertices;
    FlatForest tree;                    // shortest-path tree, root = center
    std::vector<NodeId> s_nodes;        // distinguished set S (here: all nodes)
    std::map<VertexId, NodeId> node_of; // host vertex -> tree node
  };

  double D = 0.0;
  double gamma_cov = 1.0;
  double ball_radius = 0.0;  // D / gamma_cov
  int rounds_used = 0;
  std::size_t rebuild_recourse = 0;  // clusters rebuilt across updates
  std::vector<Cluster> clusters;
  std::map<VertexId, std::vector<int>> membership;

  int maxMembership() const {
    int m = 0;
    for (const auto& [v, cs] : membership) m = std::max(m, int(cs.size()));
    return m;
  }
};

namespace detail {

struct ShiftedLabel {
  double key = std::numeric_limits<double>::infinity();
  VertexId center = kNoVertex;
  EdgeId via = kNoEdge;      // edge into this vertex on the winning path
  VertexId parent = kNoVertex;
};

// Multi-source Dijkstra on keys d(v,u) - shift(v), ties to the smaller center
// id; also tracks the best competing key from a different center (for the
// uncut-ball margin test).
inline std::pair<std::vector<ShiftedLabel>, std::vector<double>> shiftedVoronoi(
    const DynGraph& g, const std::vector<double>& shift) {
  std::size_t n = g.vertexCount();
  std::vector<ShiftedLabel> best(n);
  std::vector<double> second(n, std::numeric_limits<double>::infinity());
  using QE = std::tuple<double, VertexId, VertexId, EdgeId, VertexId>;  // key, center, vertex, via, parent
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  for (VertexId v = 0; std::size_t(v) < n; ++v) {
    if (!g.vertexAlive(v)) continue;
    pq.push({-shift[v], v, v, kNoEdge, kNoVertex});
  }
  while (!pq.empty()) {
    auto [key, center, v, via, parent] = pq.top();
    pq.pop();
    if (best[v].center != kNoVertex) {
      if (best[v].center != center) second[v] = std::min(second[v], key);
      continue;
    }
    best[v] = {key, center, via, parent};
    for (EdgeId e : g.incident(v)) {
      const EdgeRec& r = g.edge(e);
      VertexId w = r.tail == v ? r.head : r.tail;
      if (w == v) continue;
      if (best[w].center == kNoVertex || best[w].center != center)
        pq.push({key + r.length, center, w, e, v});
    }
  }
  return {std::move(best), std::move(second)};
}

inline std::vector<std::vector<VertexId>> components(const DynGraph& g) {
  std::size_t n = g.vertexCount();
  std::vector<int> comp(n, -1);
  std::vector<std::vector<VertexId>> out;
  for (VertexId s = 0; std::size_t(s) < n; ++s) {
    if (!g.vertexAlive(s) || comp[s] != -1) continue;
    int id = int(out.size());
    out.emplace_back();
    std::vector<VertexId> q{s};
    comp[s] = id;
    out[id].push_back(s);
    while (!q.empty()) {
      VertexId v = q.back();
      q.pop_back();
      for (EdgeId e : g.incident(v)) {
        const EdgeRec& r = g.edge(e);
        VertexId w = r.tail == v ? r.head : r.tail;
        if (comp[w] == -1) {
          comp[w] = id;
          out[id].push_back(w);
          q.push_back(w);
        }
      }
    }
  }
  return out;
}

// Shortest-path tree of `members` from `center`, as a flat forest cluster.
inline NeighborhoodCover::Cluster sssptCluster(const DynGraph& g, VertexId center,
                                               const std::vector<VertexId>& members) {
  NeighborhoodCover::Cluster c;
  c.center = center;
  std::map<VertexId, bool> inside;
  for (VertexId v : members) inside[v] = true;
  std::map<VertexId, std::pair<EdgeId, VertexId>> via;
  std::map<VertexId, double> dist;
  using QE = std::tuple<double, VertexId>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[center] = 0.0;
  pq.push({0.0, center});
  std::vector<VertexId> order;
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    order.push_back(v);
    for (EdgeId e : g.incident(v)) {
      const EdgeRec& r = g.edge(e);
      VertexId w = r.tail == v ? r.head : r.tail;
      if (w == v || !inside.count(w)) continue;
      double nd = d + r.length;
      auto it = dist.find(w);
      if (it == dist.end() || nd < it->second) {
        dist[w] = nd;
        via[w] = {e, v};
        pq.push({nd, w});
      }
    }
  }
  for (VertexId v : order) {
    if (v == center) {
      c.node_of[v] = c.tree.addRoot(v);
    } else {
      auto [e, parent] = via.at(v);
      const EdgeRec& r = g.edge(e);
      // gradient signed child -> parent
      double grad = r.tail == v ? r.gradient : -r.gradient;
      c.node_of[v] = c.tree.addChild(c.node_of.at(parent), v, e, r.length, grad);
    }
    c.vertices.push_back(v);
    c.s_nodes.push_back(c.node_of[v]);
  }
  return c;
}

}  // namespace detail

// Static sparse neighborhood cover by seeded exponential-shift partition
// rounds: each round is a partition (so the membership bound is the number of
// rounds), a ball is declared covered when its winner's margin clears 2*D/g,
// and rounds repeat until everything is covered. Deterministic for a fixed
// seed; restarts with seed+1 in the (never observed) event the round budget
// runs out.
inline NeighborhoodCover buildCover(const DynGraph& g, double D, std::uint64_t seed = 1) {
  for (EdgeId e : g.liveEdges())
    require(g.edge(e).length >= 1.0 && std::isfinite(g.edge(e).length),
            Errc::invariant_violation, "cover requires lengths >= 1");
  NeighborhoodCover cov;
  cov.D = D;
  std::size_t n = g.vertexCount();
  int k = int(std::ceil(std::log2(std::max<double>(double(n), 2.0)))) + 1;
  cov.gamma_cov = 4.0 * (k + 1);
  cov.ball_radius = D / cov.gamma_cov;

  std::vector<bool> satisfied(n, false);
  auto comps = detail::components(g);

  // whole-component clusters wherever the scale swallows the component
  auto seedWholeComponents = [&]() {
    for (const auto& comp : comps) {
      double total = 0.0;
      std::map<VertexId, bool> inside;
      for (VertexId v : comp) inside[v] = true;
      for (EdgeId e : g.liveEdges())
        if (inside.count(g.edge(e).tail)) total += g.edge(e).length;
      if (total <= cov.ball_radius || comp.size() == 1) {
        int id = int(cov.clusters.size());
        cov.clusters.push_back(detail::sssptCluster(g, comp.front(), comp));
        for (VertexId v : comp) {
          cov.membership[v].push_back(id);
          satisfied[v] = true;
        }
      }
    }
  };
  seedWholeComponents();

  const int round_budget = int(cov.gamma_cov);
  for (int restart = 0; restart < 8; ++restart) {
    std::mt19937_64 rng(seed + restart);
    std::exponential_distribution<double> expo(1.0 / (4.0 * cov.ball_radius));
    const double clamp = 4.0 * cov.ball_radius * std::log(double(n) + 1.0);
    for (int round = 0; round < round_budget; ++round) {
      bool all = true;
      for (VertexId v = 0; std::size_t(v) < n; ++v)
        if (g.vertexAlive(v) && !satisfied[v]) all = false;
      if (all) {
        cov.rounds_used = round;
        return cov;
      }
      std::vector<double> shift(n, 0.0);
      for (VertexId v = 0; std::size_t(v) < n; ++v) shift[v] = std::min(expo(rng), clamp);
      auto [label, second] = detail::shiftedVoronoi(g, shift);

      // group pieces by winning center
      std::map<VertexId, std::vector<VertexId>> piece;
      for (VertexId v = 0; std::size_t(v) < n; ++v)
        if (g.vertexAlive(v)) piece[label[v].center].push_back(v);

      for (auto& [center, members] : piece) {
        // does this piece newly cover someone? margin test: the runner-up key
        // trails by at least 2*ball_radius
        std::vector<VertexId> newly;
        for (VertexId v : members) {
          if (!satisfied[v] && second[v] - label[v].key >= 2.0 * cov.ball_radius)
            newly.push_back(v);
        }
        if (newly.empty()) continue;
        int id = int(cov.clusters.size());
        cov.clusters.push_back(detail::sssptCluster(g, center, members));
        for (VertexId v : members) cov.membership[v].push_back(id);
        for (VertexId v : newly) satisfied[v] = true;
      }
    }
    bool all = true;
    for (VertexId v = 0; std::size_t(v) < n; ++v)
      if (g.vertexAlive(v) && !satisfied[v]) all = false;
    if (all) {
      cov.rounds_used = round_budget;
      return cov;
    }
    // wipe everything and retry with the next seed
    cov.clusters.clear();
    cov.membership.clear();
    std::fill(satisfied.begin(), satisfied.end(), false);
    seedWholeComponents();
  }
  fail(Errc::invariant_violation, "cover construction exhausted its restarts");
}

// Rebuild-on-update stand-in for dynamic maintenance: an empty batch returns
// the same cover, anything else rebuilds from scratch and counts recourse.
inline NeighborhoodCover rebuildOnUpdate(NeighborhoodCover cov, const DynGraph& g,
                                         const std::vector<Update>& batch,
                                         std::uint64_t seed = 1) {
  if (batch.empty()) return cov;
  std::size_t old_recourse = cov.rebuild_recourse + cov.clusters.size();
  NeighborhoodCover fresh = buildCover(g, cov.D, seed);
  fresh.rebuild_recourse = old_recourse + fresh.clusters.size();
  return fresh;
}

}  // namespace mrf
