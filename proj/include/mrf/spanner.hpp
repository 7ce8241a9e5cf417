#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "mrf/errors.hpp"

namespace mrf {

// Incremental greedy spanner with layered degree classes (unweighted). Layer
// i admits an edge when no short path exists in its girth-protected subgraph
// H^_i and both master degrees stay within 32 * 2^i; otherwise the edge embeds
// along a found path and over-congested path edges are evicted from H^_i
// (they stay in H_i). Splits move the smaller side per layer; deletions are
// the only way an edge ever leaves H.
class IncrementalSpanner {
 public:
  struct Outcome {
    bool embedded = false;
    int layer = -1;  // admission layer, or the embedding layer
  };

  explicit IncrementalSpanner(int n, int delta, std::vector<int> masters = {})
      : n_(n), delta_(delta), hop_bound_(2.0 * std::log2(2.0 * std::max(n, 2))) {
    layers_ = int(std::ceil(10.0 * std::log2(std::max(n, 2)))) + 1;
    if (masters.empty()) {
      master_.resize(n);
      for (int v = 0; v < n; ++v) master_[v] = v;
    } else {
      require(int(masters.size()) == n, Errc::invariant_violation, "master vector size");
      master_ = std::move(masters);
    }
    layer_adj_.assign(layers_, {});
    hat_adj_.assign(layers_, {});
    master_deg_.assign(layers_, {});
  }

  int newVertex(int master_of = -1) {
    int v = int(master_.size());
    master_.push_back(master_of < 0 ? v : master_[master_of]);
    return v;
  }

  // --- spec surface ---

  Outcome insert(int u, int v) {
    int id = int(edges_.size());
    edges_.push_back({u, v, /*alive=*/true});
    return place(id);
  }

  void deleteEdge(int id) {
    Edge& e = edges_.at(id);
    require(e.alive, Errc::unknown_edge, "delete of dead edge");
    e.alive = false;
    ++deletions_;
    if (e.layer >= 0) {
      removeFromLayer(id, e.layer);
      e.layer = -1;
      ++h_removals_;
    }
    if (!e.embedding.empty()) {
      releaseCongestion(id);
      e.embedding.clear();
    }
    // embeddings running over e break; they are repaired only by a wrapper rebuild
    for (int eid : crossing_[id]) {
      if (edges_[eid].alive && !edges_[eid].embedding.empty()) edges_[eid].broken = true;
    }
    crossing_[id].clear();
  }

  // Splits v: edges in `moved` re-map their v-endpoints to the returned new
  // vertex; `crossing` self-loops become (v, v') and are inserted fresh.
  int split(int v, const std::vector<int>& moved, const std::vector<int>& crossing = {}) {
    int nv = newVertex(v);
    ++splits_;
    // per layer, count the smaller side for the recourse ledger
    for (int i = 0; i < layers_; ++i) {
      std::size_t deg = layer_adj_[i].count(v) ? layer_adj_[i][v].size() : 0;
      std::size_t moved_here = 0;
      for (int id : moved)
        if (edges_[id].alive && edges_[id].layer == i) ++moved_here;
      split_moved_ += std::min(moved_here, deg >= moved_here ? deg - moved_here : 0);
    }
    for (int id : moved) {
      Edge& e = edges_.at(id);
      require(e.alive, Errc::unknown_edge, "split moves a dead edge");
      if (e.layer >= 0) removeFromLayer(id, e.layer, /*keep_layer=*/true);
      if (e.u == v) e.u = nv;
      if (e.v == v) e.v = nv;
      if (e.layer >= 0) insertIntoLayer(id, e.layer, /*fresh=*/false);
      // embeddings keep their edge identities, but paths touching a moved
      // endpoint may no longer connect until a wrapper rebuild re-embeds them
      if (!e.embedding.empty()) e.broken = true;
      for (int eid : crossing_[id])
        if (edges_[eid].alive && !edges_[eid].embedding.empty()) edges_[eid].broken = true;
    }
    for (int id : crossing) {
      Edge& e = edges_.at(id);
      require(e.alive && e.u == v && e.v == v, Errc::unknown_edge, "crossing must be a loop");
      e.u = v;
      e.v = nv;
      place(id);  // delayed insertion of the former self-loop
    }
    return nv;
  }

  // --- instrumentation and checks ---

  struct Stats {
    std::size_t h_edges = 0, hat_edges = 0;
    std::size_t split_moved = 0, h_removals = 0;
    int layers_used = 0;
  };

  Stats stats() const {
    Stats s;
    s.split_moved = split_moved_;
    s.h_removals = h_removals_;
    for (int i = 0; i < layers_; ++i) {
      std::size_t h = 0, hat = 0;
      for (const auto& [v, es] : layer_adj_[i]) h += es.size();
      for (const auto& [v, es] : hat_adj_[i]) hat += es.size();
      s.h_edges += h / 2;
      s.hat_edges += hat / 2;
      if (h > 0) s.layers_used = i + 1;
    }
    return s;
  }

  std::size_t layerEdgeCount(int i) const {
    std::size_t h = 0;
    for (const auto& [v, es] : layer_adj_[i]) h += es.size();
    return h / 2;
  }

  int layerCount() const { return layers_; }
  double hopBound() const { return hop_bound_; }
  int vertexCount() const { return int(master_.size()); }
  int masterOf(int v) const { return master_.at(v); }

  struct Edge {
    int u, v;
    bool alive;
    int layer = -1;                // >= 0: lives in H_layer
    std::vector<int> embedding;    // edge ids of the path found at insertion
    bool broken = false;           // some embedding edge was deleted since
  };
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t masterDegree(int layer, int master) const {
    auto it = master_deg_[layer].find(master);
    return it == master_deg_[layer].end() ? 0 : it->second;
  }

  // hat-layer adjacency snapshots (girth checks live in the tests)
  const std::map<int, std::set<int>>& hatAdjacency(int layer) const { return hat_adj_[layer]; }

  // Max hop distance over live edges between their endpoints in H (all
  // layers), i.e. the measured stretch of the unweighted spanner.
  struct StretchReport {
    double gamma = 1.0;
    int worst_edge = -1;
  };
  StretchReport stretchCertificate() const {
    std::map<int, std::vector<int>> adj;  // vertex -> neighbours over H edges
    for (const Edge& e : edges_) {
      if (e.alive && e.layer >= 0) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
      }
    }
    auto hops = [&](int s, int t) -> double {
      if (s == t) return 0.0;
      std::deque<std::pair<int, int>> q{{s, 0}};
      std::set<int> seen{s};
      while (!q.empty()) {
        auto [v, d] = q.front();
        q.pop_front();
        auto it = adj.find(v);
        if (it == adj.end()) continue;
        for (int w : it->second) {
          if (w == t) return d + 1;
          if (seen.insert(w).second) q.push_back({w, d + 1});
        }
      }
      return std::numeric_limits<double>::infinity();
    };
    StretchReport rep;
    for (int id = 0; id < int(edges_.size()); ++id) {
      const Edge& e = edges_[id];
      if (!e.alive || e.u == e.v) continue;
      double d = hops(e.u, e.v);
      if (d > rep.gamma) {
        rep.gamma = d;
        rep.worst_edge = id;
      }
    }
    return rep;
  }

 private:
  Outcome place(int id) {
    Edge& e = edges_[id];
    if (e.u == e.v) return {true, -1};  // loops embed trivially (empty path)
    for (int i = 0; i < layers_; ++i) {
      auto path = hatPath(i, e.u, e.v);
      if (path) {
        e.embedding = *path;
        e.broken = false;
        for (int pe : *path) {
          ++econg_[pe];
          crossing_[pe].insert(id);
        }
        evictOverCongested(i, *path);
        return {true, i};
      }
      if (std::max(masterDegree(i, master_[e.u]), masterDegree(i, master_[e.v])) <=
          32.0 * std::pow(2.0, i)) {
        e.layer = i;
        insertIntoLayer(id, i, /*fresh=*/true);
        return {false, i};
      }
    }
    fail(Errc::master_degree_exceeded, "no layer admitted the edge");
  }

  void insertIntoLayer(int id, int i, bool fresh) {
    const Edge& e = edges_[id];
    layer_adj_[i][e.u].insert(id);
    layer_adj_[i][e.v].insert(id);
    ++master_deg_[i][master_[e.u]];
    ++master_deg_[i][master_[e.v]];
    if (fresh || hat_member_.count(id)) {
      hat_adj_[i][e.u].insert(id);
      hat_adj_[i][e.v].insert(id);
      hat_member_.insert(id);
    }
  }

  void removeFromLayer(int id, int i, bool keep_layer = false) {
    const Edge& e = edges_[id];
    layer_adj_[i][e.u].erase(id);
    layer_adj_[i][e.v].erase(id);
    --master_deg_[i][master_[e.u]];
    --master_deg_[i][master_[e.v]];
    hat_adj_[i][e.u].erase(id);
    hat_adj_[i][e.v].erase(id);
    if (!keep_layer) hat_member_.erase(id);
  }

  void releaseCongestion(int id) {
    for (int pe : edges_[id].embedding) {
      auto it = econg_.find(pe);
      if (it != econg_.end() && --it->second == 0) econg_.erase(it);
      crossing_[pe].erase(id);
    }
  }

  void evictOverCongested(int i, const std::vector<int>& path) {
    double threshold = 2.0 * delta_ * std::log2(2.0 * std::max(n_, 2)) / std::pow(2.0, i);
    for (int pe : path) {
      if (econg_[pe] >= threshold && hat_member_.count(pe)) {
        const Edge& e = edges_[pe];
        hat_adj_[i][e.u].erase(pe);
        hat_adj_[i][e.v].erase(pe);
        hat_member_.erase(pe);
      }
    }
  }

  // hop-limited BFS inside the hat layer
  std::optional<std::vector<int>> hatPath(int i, int s, int t) const {
    if (s == t) return std::vector<int>{};
    const auto& adj = hat_adj_[i];
    if (!adj.count(s) || !adj.count(t)) return std::nullopt;
    std::map<int, std::pair<int, int>> via;  // vertex -> (edge, from)
    std::deque<std::pair<int, int>> q{{s, 0}};
    std::set<int> seen{s};
    while (!q.empty()) {
      auto [v, d] = q.front();
      q.pop_front();
      if (double(d) + 1.0 > hop_bound_) continue;  // next hop would overshoot
      auto it = adj.find(v);
      if (it == adj.end()) continue;
      for (int eid : it->second) {
        const Edge& e = edges_[eid];
        int w = e.u == v ? e.v : e.u;
        if (!seen.insert(w).second) continue;
        via[w] = {eid, v};
        if (w == t) {
          std::vector<int> path;
          int x = t;
          while (x != s) {
            auto [pe, from] = via[x];
            path.push_back(pe);
            x = from;
          }
          std::reverse(path.begin(), path.end());
          return path;
        }
        q.push_back({w, d + 1});
      }
    }
    return std::nullopt;
  }

  int n_, delta_, layers_;
  double hop_bound_;
  std::vector<int> master_;
  std::vector<Edge> edges_;
  std::vector<std::map<int, std::set<int>>> layer_adj_, hat_adj_;
  std::vector<std::map<int, std::size_t>> master_deg_;
  std::map<int, std::size_t> econg_;
  std::map<int, std::set<int>> crossing_;
  std::set<int> hat_member_;
  std::size_t split_moved_ = 0, h_removals_ = 0, deletions_ = 0, splits_ = 0;
};

// Fully-dynamic wrapper: epoch rebuilds stand in for the batched repair
// machinery. After every ceil(sqrt(n)) deletions/splits the incremental
// construction is re-run on the live graph, which also heals any broken
// embeddings. Edge ids are stable across rebuilds.
class DynSpanner {
 public:
  DynSpanner(int n, int delta) : n0_(n), delta_(delta) {
    for (int v = 0; v < n; ++v) master_.push_back(v);
    epoch_budget_ = std::size_t(std::ceil(std::sqrt(double(std::max(n, 1)))));
    rebuild();
  }

  int insert(int u, int v) {
    int id = int(edges_.size());
    edges_.push_back({u, v, true});
    inner_map_.push_back(int(inner_->edges().size()));
    auto out = inner_->insert(u, v);
    if (!out.embedded) ++recourse_;  // admitted into H
    return id;
  }

  void deleteEdge(int id) {
    edges_.at(id).alive = false;
    bool in_h = inner_->edges()[innerId(id)].layer >= 0;
    inner_->deleteEdge(innerId(id));
    if (in_h) ++recourse_;
    if (++epoch_ops_ >= epoch_budget_) rebuild();
  }

  int split(int v, const std::vector<int>& moved) {
    int nv = int(master_.size());
    master_.push_back(master_[v]);
    std::vector<int> inner_moved;
    for (int id : moved) inner_moved.push_back(innerId(id));
    inner_->split(v, inner_moved);
    for (int id : moved) {
      if (edges_[id].u == v) edges_[id].u = nv;
      if (edges_[id].v == v) edges_[id].v = nv;
    }
    if (++epoch_ops_ >= epoch_budget_) rebuild();
    return nv;
  }

  const IncrementalSpanner& inner() const { return *inner_; }
  std::size_t rebuildCount() const { return rebuilds_; }
  std::size_t totalRecourse() const { return recourse_; }

 private:
  struct E {
    int u, v;
    bool alive;
  };

  int innerId(int id) const { return inner_map_.at(id); }

  void rebuild() {
    inner_ = std::make_unique<IncrementalSpanner>(int(master_.size()), delta_, master_);
    inner_map_.assign(edges_.size(), -1);
    std::size_t installed = 0;
    for (int id = 0; id < int(edges_.size()); ++id) {
      if (!edges_[id].alive) continue;
      inner_->insert(edges_[id].u, edges_[id].v);
      inner_map_[id] = int(installed++);
    }
    recourse_ += installed;
    epoch_ops_ = 0;
    ++rebuilds_;
  }

  int n0_, delta_;
  std::vector<int> master_;
  std::vector<E> edges_;
  std::vector<int> inner_map_;
  std::unique_ptr<IncrementalSpanner> inner_;
  std::size_t epoch_budget_ = 1, epoch_ops_ = 0, rebuilds_ = 0, recourse_ = 0;
};

}  // namespace mrf
