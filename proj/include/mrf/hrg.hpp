#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "mrf/cover.hpp"
#include "mrf/flat_forest.hpp"
#include "mrf/graph.hpp"
#include "mrf/oracle.hpp"

namespace mrf {

// Hierarchical routing graph: vertex copies V_1..V_kappa, routing forests
// F_1..F_{kappa-1} from neighborhood covers at geometric scales, and linking
// edges with scale lengths. H vertex ids: copies first, then forest nodes.
class Hrg {
 public:
  struct Params {
    int kappa = 3;
    double gamma_diam = 0.0;   // 0 = derive from n, L
    int collection_budget = 512;
    std::uint64_t seed = 1;
  };

  struct OutEdge {
    int copy;      // H id of the V_i copy
    int tree_node; // H id of the forest node (same host vertex)
    int level, cluster;
  };
  struct InEdge {
    int tree_node; // H id of the chosen S-node
    int copy;      // H id of the V_{i+1} copy
    int level, cluster;  // level of the forest the tree lives in
  };

  // abstract edge between copies of consecutive layers (multi-edges allowed)
  struct AbstractEdge {
    int from_copy, to_copy;
    int level, cluster;
    double length;       // gamma_hrg * gamma_diam^level
    double gradient;     // gradient of the mapped H path
    double mapped_length;  // actual length of the mapped H path
  };

  struct EGraphEdge {
    EdgeId host = kNoEdge;
    int copy_tail, copy_head;
  };
  struct EPairEdge {
    int node_a, node_b;  // H ids of the two out-edge targets
    int bottom_copy;     // the V_i copy generating the pair
    int level;
    double length;       // 2 * gamma_hrg * gamma_diam^level
  };

  Hrg(const DynGraph& g, Params prm) : g_(&g), prm_(prm) {
    n_ = g.vertexCount();
    double L = 1.0;
    for (EdgeId e : g.liveEdges()) L = std::max(L, g.edge(e).length);
    // one probe cover fixes gamma_cov = 4(k+1) (depends only on n)
    double gcov = 4.0 * (std::ceil(std::log2(std::max<double>(double(n_), 2.0))) + 2.0);
    gamma_hrg_ = gcov;
    double need = std::pow(double(n_) * double(n_) * L, 1.0 / prm_.kappa);
    double need_top = std::pow(gcov * double(n_) * L, 1.0 / double(prm_.kappa - 1));
    gamma_diam_ = std::max({8.0 * gcov, std::ceil(need), std::ceil(need_top),
                            prm_.gamma_diam});
    require(std::pow(gamma_diam_, prm_.kappa) >= double(n_) * double(n_) * L,
            Errc::parameter_infeasible, "gamma_diam^kappa < n^2 L");

    // copies: levels 1..kappa
    copy_base_ = 0;
    copies_ = prm_.kappa * int(n_);
    next_h_id_ = copies_;

    // covers and forests for levels 1..kappa-1
    for (VertexId v = 0; std::size_t(v) < n_; ++v)
      for (int lev = 1; lev <= prm_.kappa; ++lev) host_of_.push_back(kNoVertex);
    for (int h = 0; h < copies_; ++h) host_of_[h] = copyHost(h);
    for (int lev = 1; lev < prm_.kappa; ++lev) {
      covers_.push_back(buildCover(g, std::pow(gamma_diam_, lev), prm_.seed + lev));
      gamma_hrg_ = std::max(gamma_hrg_, double(covers_.back().maxMembership()));
      std::vector<std::vector<int>> ids;  // per cluster: tree node -> H id
      for (const auto& cl : covers_.back().clusters) {
        std::vector<int> node_ids(cl.tree.size());
        for (std::size_t x = 0; x < cl.tree.size(); ++x) {
          node_ids[x] = next_h_id_++;
          host_of_.push_back(cl.tree.host(NodeId(x)));
        }
        ids.push_back(std::move(node_ids));
      }
      forest_ids_.push_back(std::move(ids));
    }

    // linking edges
    for (int lev = 1; lev < prm_.kappa; ++lev) {
      const auto& cov = covers_[lev - 1];
      for (int ci = 0; ci < int(cov.clusters.size()); ++ci) {
        const auto& cl = cov.clusters[ci];
        for (const auto& [host, node] : cl.node_of) {
          out_edges_.push_back({copyId(lev, host), forestNodeId(lev, ci, node), lev, ci});
        }
        // in-edge: lowest host id in S (all vertices), to its copy one level up
        VertexId lowest = cl.node_of.begin()->first;
        in_edges_.push_back(
            {forestNodeId(lev, ci, cl.node_of.at(lowest)), copyId(lev + 1, lowest), lev, ci});
      }
    }
    for (int i = 0; i < int(out_edges_.size()); ++i)
      out_by_copy_[out_edges_[i].copy].push_back(i);
    for (auto& [c, v] : out_by_copy_) {
      std::sort(v.begin(), v.end(), [this](int a, int b) {
        return out_edges_[a].cluster < out_edges_[b].cluster;
      });
    }
  }

  // --- geometry ---

  int kappa() const { return prm_.kappa; }
  double gammaDiam() const { return gamma_diam_; }
  double gammaHrg() const { return gamma_hrg_; }
  double linkLength(int level) const { return gamma_hrg_ * std::pow(gamma_diam_, level); }
  std::size_t hostVertexCount() const { return n_; }
  int hVertexCount() const { return next_h_id_; }
  bool collectionSampled() const { return collection_sampled_; }

  int copyId(int level, VertexId host) const { return (level - 1) * int(n_) + host; }
  int copyLevel(int h) const { return h / int(n_) + 1; }
  VertexId copyHost(int h) const { return VertexId(h % int(n_)); }
  bool isCopy(int h) const { return h < copies_; }

  int forestNodeId(int level, int cluster, NodeId node) const {
    return forest_ids_[level - 1][cluster][node];
  }

  const std::vector<NeighborhoodCover>& covers() const { return covers_; }
  const std::vector<OutEdge>& outEdges() const { return out_edges_; }
  const std::vector<InEdge>& inEdges() const { return in_edges_; }

  // indices into outEdges(), ordered by cluster id
  const std::vector<int>& outEdgesOf(int copy) const {
    static const std::vector<int> empty;
    auto it = out_by_copy_.find(copy);
    return it == out_by_copy_.end() ? empty : it->second;
  }

  // --- abstraction ---

  std::vector<AbstractEdge> abstraction() const {
    std::vector<AbstractEdge> out;
    // per level, per cluster: the unique in-edge target
    for (const auto& oe : out_edges_) {
      const auto& cov = covers_[oe.level - 1];
      const auto& cl = cov.clusters[oe.cluster];
      const InEdge& ie = inEdgeOf(oe.level, oe.cluster);
      // mapped path: out edge + T[x, y] + in edge
      NodeId x = treeNodeOf(oe);
      NodeId y = treeNodeOfIn(ie);
      AbstractEdge ae;
      ae.from_copy = oe.copy;
      ae.to_copy = ie.copy;
      ae.level = oe.level;
      ae.cluster = oe.cluster;
      ae.length = linkLength(oe.level);
      ae.gradient = cl.tree.pathGradient(x, y);  // linking edges carry gradient 0
      ae.mapped_length = 2.0 * linkLength(oe.level) + cl.tree.pathLength(x, y);
      out.push_back(ae);
    }
    return out;
  }

  // --- off-tree edge sets (images of host edges, and out-edge pairs) ---

  std::pair<std::vector<EGraphEdge>, std::vector<EPairEdge>> offTreeEdgeSets() const {
    std::vector<EGraphEdge> eg;
    for (EdgeId e : g_->liveEdges()) {
      eg.push_back({e, copyId(1, g_->edge(e).tail), copyId(1, g_->edge(e).head)});
    }
    std::vector<EPairEdge> ep;
    for (const auto& [copy, outs] : out_by_copy_) {
      int lev = copyLevel(copy);
      for (std::size_t i = 0; i < outs.size(); ++i)
        for (std::size_t j = i + 1; j < outs.size(); ++j) {
          const OutEdge& a = out_edges_[outs[i]];
          const OutEdge& b = out_edges_[outs[j]];
          ep.push_back({forestNodeId(lev, a.cluster, treeNodeOf(a)),
                        forestNodeId(lev, b.cluster, treeNodeOf(b)), copy, lev,
                        2.0 * linkLength(lev)});
        }
    }
    return {std::move(eg), std::move(ep)};
  }

  // --- derandomized tree collection ---

  struct Triple {
    std::vector<int> bit, a, b;  // one entry per level 1..kappa-1
  };

  struct CollectionTree {
    FlatForest forest;
    std::vector<NodeId> node_of_h;  // H id -> forest node
    Triple triple;
  };

  std::size_t idBits() const {
    std::size_t b = 1;
    while ((std::size_t(1) << b) < n_) ++b;
    return b;
  }

  std::size_t maxOutDegree() const {
    std::size_t d = 1;
    for (const auto& [c, v] : out_by_copy_) d = std::max(d, v.size());
    return d;
  }

  std::size_t tripleSpaceSize() const {
    std::size_t per_level = idBits() * maxOutDegree() * maxOutDegree();
    std::size_t total = 1;
    for (int lev = 1; lev < prm_.kappa; ++lev) {
      if (total > std::size_t(1) << 40) return total;  // saturate
      total *= per_level;
    }
    return total;
  }

  // The tree of one triple: every copy keeps one out-edge (rank a or b by the
  // chosen identifier bit), plus all forest edges and all in-edges.
  CollectionTree materializeTree(const Triple& t) const {
    CollectionTree ct;
    ct.triple = t;
    ct.node_of_h.assign(next_h_id_, kNoNode);
    // adjacency of the selected subgraph, tagged with edge data
    struct Adj {
      int to;
      double len, grad;  // oriented from -> to
      EdgeId host_edge;
      int host_dir;
    };
    std::vector<std::vector<Adj>> adj(next_h_id_);
    auto addBoth = [&](int a2, int b2, double len, double grad, EdgeId he, int hd) {
      adj[a2].push_back({b2, len, grad, he, hd});
      adj[b2].push_back({a2, len, -grad, he, -hd});
    };
    // forest edges
    for (int lev = 1; lev < prm_.kappa; ++lev) {
      const auto& cov = covers_[lev - 1];
      for (int ci = 0; ci < int(cov.clusters.size()); ++ci) {
        const auto& tree = cov.clusters[ci].tree;
        for (NodeId x = 0; std::size_t(x) < tree.size(); ++x) {
          const auto& nd = tree.node(x);
          if (nd.parent == kNoNode) continue;
          // child -> parent carries nd.gradient
          int dir = 0;
          if (nd.host_edge != kNoEdge) {
            const EdgeRec& r = g_->edge(nd.host_edge);
            dir = (r.tail == nd.host) ? +1 : -1;
          }
          addBoth(forestNodeId(lev, ci, x), forestNodeId(lev, ci, nd.parent), nd.length,
                  nd.gradient, nd.host_edge, dir);
        }
      }
    }
    // in-edges (length of level lev links into level lev+1 copies)
    for (const auto& ie : in_edges_) {
      addBoth(ie.tree_node, ie.copy, linkLength(ie.level), 0.0, kNoEdge, 0);
    }
    // selected out-edges
    for (const auto& [copy, outs] : out_by_copy_) {
      int lev = copyLevel(copy);
      int li = lev - 1;
      VertexId host = copyHost(copy);
      int bit = t.bit[li] % int(idBits());
      bool one = (std::size_t(host) >> bit) & 1;
      std::size_t rank = std::size_t(one ? t.a[li] : t.b[li]);
      if (rank >= outs.size()) rank = 0;  // substitute the lowest-indexed edge
      const OutEdge& oe = out_edges_[outs[rank]];
      addBoth(copy, forestNodeId(lev, oe.cluster, treeNodeOf(oe)), linkLength(lev), 0.0,
              kNoEdge, 0);
    }
    // build the rooted flat forest by DFS from top-level copies, then sweep
    // any remaining H vertices (isolated forest pieces)
    auto rootAndGrow = [&](int h) {
      if (ct.node_of_h[h] != kNoNode) return;
      ct.node_of_h[h] = ct.forest.addRoot(hostOf(h));
      std::vector<int> stack{h};
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (const Adj& a2 : adj[x]) {
          if (ct.node_of_h[a2.to] != kNoNode) continue;
          // x -> a2.to carries a2.grad; the forest stores child -> parent so
          // the child (a2.to) edge carries the reverse orientation
          ct.node_of_h[a2.to] = ct.forest.addChild(ct.node_of_h[x], hostOf(a2.to),
                                                   a2.host_edge, a2.len, -a2.grad);
          stack.push_back(a2.to);
        }
      }
    };
    for (VertexId v = 0; std::size_t(v) < n_; ++v)
      if (g_->vertexAlive(v)) rootAndGrow(copyId(prm_.kappa, v));
    for (int h = 0; h < next_h_id_; ++h)
      if (ct.node_of_h[h] == kNoNode && hExists(h)) rootAndGrow(h);
    return ct;
  }

  // Enumerate the collection (stride-sampled round-robin when the triple
  // space exceeds the budget; the flag records the degradation).
  void forEachCollectionTree(const std::function<void(const CollectionTree&)>& fn) {
    std::size_t bits = idBits(), deg = maxOutDegree();
    int levels = prm_.kappa - 1;
    const std::size_t cap = std::size_t(1) << 40;
    std::size_t total = 1;
    for (int i = 0; i < levels; ++i) {
      std::size_t factor = bits * deg * deg;
      total = total > cap / std::max<std::size_t>(factor, 1) ? cap : total * factor;
    }
    std::size_t budget = std::size_t(std::max(prm_.collection_budget, 1));
    std::size_t stride = 1;
    if (total > budget) {
      collection_sampled_ = true;
      stride = (total + budget - 1) / budget;
    }
    for (std::size_t idx = 0; idx < total; idx += stride) {
      Triple t;
      std::size_t rest = idx;
      for (int i = 0; i < levels; ++i) {
        t.bit.push_back(int(rest % bits));
        rest /= bits;
        t.a.push_back(int(rest % deg));
        rest /= deg;
        t.b.push_back(int(rest % deg));
        rest /= deg;
      }
      fn(materializeTree(t));
    }
  }

  // Checks the defining properties: per-level congestion and out-degree at
  // most gamma_hrg, flat routing forests, S-diameter within gamma_hrg * D_i,
  // linking-edge endpoint/length consistency, and ball covering.
  void verify() const {
    const DynGraph& g = *g_;
    for (int lev = 1; lev < prm_.kappa; ++lev) {
      const auto& cov = covers_[lev - 1];
      double Di = std::pow(gamma_diam_, lev);
      require(cov.maxMembership() <= gamma_hrg_ + 1e-9, Errc::invariant_violation,
              "vertex congestion exceeds gamma_hrg");
      for (const auto& cl : cov.clusters) {
        cl.tree.verify(g);
        // weighted tree diameter by double sweep
        auto far = [&](NodeId s) {
          NodeId best = s;
          double bd = 0.0;
          for (NodeId x = 0; std::size_t(x) < cl.tree.size(); ++x) {
            double d = cl.tree.pathLength(s, x);
            if (d > bd) {
              bd = d;
              best = x;
            }
          }
          return std::make_pair(best, bd);
        };
        auto [a, d1] = far(0);
        auto [b, diam] = far(a);
        require(diam <= gamma_hrg_ * Di + 1e-6, Errc::invariant_violation,
                "cluster S-diameter exceeds gamma_hrg * gamma_diam^i");
      }
      // covering of radius D_i / gamma_hrg balls
      for (VertexId v = 0; std::size_t(v) < n_; ++v) {
        if (!g.vertexAlive(v)) continue;
        bool ok = false;
        for (int ci : cov.membership.at(v)) {
          const auto& cl = cov.clusters[ci];
          bool all = true;
          for (const auto& [w, dist] : ballFrom(g, v, Di / gamma_hrg_))
            if (!cl.node_of.count(w)) all = false;
          if (all) ok = true;
        }
        require(ok, Errc::invariant_violation, "ball not covered at some level");
      }
    }
    for (const auto& oe : out_edges_)
      require(hostOf(oe.copy) == hostOf(oe.tree_node), Errc::invariant_violation,
              "out-edge endpoints map to different hosts");
    for (const auto& ie : in_edges_)
      require(hostOf(ie.tree_node) == hostOf(ie.copy) && copyLevel(ie.copy) == ie.level + 1,
              Errc::invariant_violation, "in-edge inconsistency");
    for (const auto& [copy, outs] : out_by_copy_)
      require(double(outs.size()) <= gamma_hrg_ + 1e-9, Errc::invariant_violation,
              "out-degree exceeds gamma_hrg");
  }

  static std::map<VertexId, double> ballFrom(const DynGraph& g, VertexId s, double radius) {
    std::map<VertexId, double> dist{{s, 0.0}};
    using QE = std::pair<double, VertexId>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (EdgeId e : g.incident(v)) {
        const EdgeRec& r = g.edge(e);
        VertexId w = r.tail == v ? r.head : r.tail;
        if (w == v) continue;
        double nd = d + r.length;
        if (nd > radius) continue;
        auto it = dist.find(w);
        if (it == dist.end() || nd < it->second) {
          dist[w] = nd;
          pq.push({nd, w});
        }
      }
    }
    return dist;
  }

  // --- plumbing ---

  VertexId hostOf(int h) const {
    require(h >= 0 && std::size_t(h) < host_of_.size(), Errc::unknown_id,
            "H vertex " + std::to_string(h));
    return host_of_[h];
  }

  const InEdge& inEdgeOf(int level, int cluster) const {
    for (const auto& ie : in_edges_)
      if (ie.level == level && ie.cluster == cluster) return ie;
    fail(Errc::unknown_id, "in edge");
  }

 private:
  NodeId treeNodeOf(const OutEdge& oe) const {
    // out-edge targets the copy's host inside the cluster tree
    const auto& cl = covers_[oe.level - 1].clusters[oe.cluster];
    return cl.node_of.at(copyHost(oe.copy));
  }
  NodeId treeNodeOfIn(const InEdge& ie) const {
    const auto& ids = forest_ids_[ie.level - 1][ie.cluster];
    return NodeId(ie.tree_node - ids.front());
  }
  bool hExists(int h) const { return isCopy(h) ? g_->vertexAlive(copyHost(h)) : true; }

  const DynGraph* g_;
  Params prm_;
  std::size_t n_ = 0;
  int copies_ = 0, copy_base_ = 0, next_h_id_ = 0;
  double gamma_diam_ = 0.0, gamma_hrg_ = 0.0;
  bool collection_sampled_ = false;
  std::vector<NeighborhoodCover> covers_;           // level 1..kappa-1
  std::vector<std::vector<std::vector<int>>> forest_ids_;
  std::vector<OutEdge> out_edges_;
  std::vector<InEdge> in_edges_;
  std::map<int, std::vector<int>> out_by_copy_;
  std::vector<VertexId> host_of_;
};

// ---------- routing circulations and monotone-cycle decomposition ----------

// Ascending path in the abstracted HRG, as a copy-id sequence with the
// abstract edges used (indices into the abstraction vector).
struct AbstractPath {
  std::vector<int> vertices;  // copy ids, strictly increasing level
  std::vector<int> edges;     // abstraction indices, vertices.size()-1 of them
  double mass = 0.0;
};

// Routing circulation on H~^e: base flow on the image of host edge e from
// copy u to copy v, matched by ascending paths out of v (carrying the flow
// up) and ascending paths out of u (flow descends along them into u).
struct RoutingCirculation {
  int base_u = -1, base_v = -1;
  double base_flow = 0.0;
  std::vector<AbstractPath> up_from_v;
  std::vector<AbstractPath> up_from_u;
};

// A monotone cycle circulation: +amount on the rising edges, -amount on the
// falling ones, optionally through the base edge.
struct MonotoneCycle {
  std::vector<int> up_edges;    // abstraction indices, ascending from the bottom
  std::vector<int> down_edges;  // abstraction indices, ascending from the other bottom
  bool uses_base = false;
  double amount = 0.0;
};

namespace detail {

inline void addPathFlow(std::map<int, double>& flow, const AbstractPath& p, double sgn) {
  for (int e : p.edges) flow[e] += sgn * p.mass;
}

}  // namespace detail

// Net abstract-edge flow of a routing circulation (base edge keyed as -1).
inline std::map<int, double> routingFlow(const RoutingCirculation& rc) {
  std::map<int, double> f;
  f[-1] += rc.base_flow;
  for (const auto& p : rc.up_from_v) detail::addPathFlow(f, p, +1.0);
  for (const auto& p : rc.up_from_u) detail::addPathFlow(f, p, -1.0);
  return f;
}

inline double weightedAbstractLength(const Hrg& h, const std::vector<Hrg::AbstractEdge>& abs,
                                     const std::map<int, double>& flow, double base_len) {
  double s = 0.0;
  for (const auto& [e, v] : flow)
    s += std::fabs(v) * (e < 0 ? base_len : abs[e].length);
  return s;
}

// Peels a routing circulation into monotone cycle circulations, highest level
// first; the sum of the pieces' weighted lengths stays within 4*kappa of the
// circulation's weight.
inline std::vector<MonotoneCycle> decomposeRoutingCirculation(const Hrg& h,
                                                              const RoutingCirculation& rc_in) {
  RoutingCirculation rc = rc_in;
  std::vector<MonotoneCycle> out;
  require(rc.base_flow >= 0.0, Errc::not_a_routing_circulation, "base flow must be >= 0");
  auto top = [&](const AbstractPath& p) { return h.copyLevel(p.vertices.back()); };

  // conservation sanity: total mass both sides equals the base flow
  double mv = 0.0, mu = 0.0;
  for (const auto& p : rc.up_from_v) mv += p.mass;
  for (const auto& p : rc.up_from_u) mu += p.mass;
  require(std::fabs(mv - rc.base_flow) <= 1e-9 * (1.0 + rc.base_flow) &&
              std::fabs(mu - rc.base_flow) <= 1e-9 * (1.0 + rc.base_flow),
          Errc::not_a_routing_circulation, "path masses do not match the base flow");

  auto prune = [&](std::vector<AbstractPath>& v) {
    v.erase(std::remove_if(v.begin(), v.end(),
                           [](const AbstractPath& p) { return p.mass <= 1e-15; }),
            v.end());
  };

  while (true) {
    prune(rc.up_from_v);
    prune(rc.up_from_u);
    if (rc.up_from_v.empty() && rc.up_from_u.empty()) break;
    // highest apex first
    int hi = 0;
    for (const auto& p : rc.up_from_v) hi = std::max(hi, top(p));
    for (const auto& p : rc.up_from_u) hi = std::max(hi, top(p));
    // find a v-path and a u-path meeting at a common apex at level hi
    AbstractPath* pv = nullptr;
    AbstractPath* pu = nullptr;
    for (auto& p : rc.up_from_v) {
      if (top(p) != hi) continue;
      for (auto& q : rc.up_from_u) {
        if (top(q) == hi && q.vertices.back() == p.vertices.back()) {
          pv = &p;
          pu = &q;
          break;
        }
      }
      if (pv) break;
    }
    require(pv && pu, Errc::not_a_routing_circulation,
            "no matching path pair at the highest level (conservation violated)");

    double mu2 = std::min(pv->mass, pu->mass);
    // highest common vertex strictly below the apex
    int cut_v = -1, cut_u = -1;
    for (int i = int(pv->vertices.size()) - 2; i >= 0 && cut_v < 0; --i) {
      for (int j = int(pu->vertices.size()) - 2; j >= 0; --j) {
        if (pv->vertices[i] == pu->vertices[j]) {
          cut_v = i;
          cut_u = j;
          break;
        }
      }
    }
    MonotoneCycle mc;
    mc.amount = mu2;
    if (cut_v >= 0) {
      // internal cycle from the common vertex up to the apex and back
      mc.up_edges.assign(pv->edges.begin() + cut_v, pv->edges.end());
      mc.down_edges.assign(pu->edges.begin() + cut_u, pu->edges.end());
      mc.uses_base = false;
      out.push_back(mc);
      AbstractPath tv{std::vector<int>(pv->vertices.begin(), pv->vertices.begin() + cut_v + 1),
                      std::vector<int>(pv->edges.begin(), pv->edges.begin() + cut_v), mu2};
      AbstractPath tu{std::vector<int>(pu->vertices.begin(), pu->vertices.begin() + cut_u + 1),
                      std::vector<int>(pu->edges.begin(), pu->edges.begin() + cut_u), mu2};
      pv->mass -= mu2;
      pu->mass -= mu2;
      if (!tv.edges.empty()) rc.up_from_v.push_back(std::move(tv));
      if (!tu.edges.empty()) rc.up_from_u.push_back(std::move(tu));
      if (tv.edges.empty() != tu.edges.empty())
        fail(Errc::not_a_routing_circulation, "truncated pair of unequal depth");
    } else {
      // cycle through the base edge
      mc.up_edges = pv->edges;
      mc.down_edges = pu->edges;
      mc.uses_base = true;
      out.push_back(mc);
      pv->mass -= mu2;
      pu->mass -= mu2;
      rc.base_flow -= mu2;
    }
  }
  require(std::fabs(rc.base_flow) <= 1e-9 * (1.0 + rc_in.base_flow),
          Errc::not_a_routing_circulation, "leftover base flow after decomposition");
  return out;
}

}  // namespace mrf
