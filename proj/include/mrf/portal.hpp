#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mrf/cycles.hpp"
#include "mrf/flat_forest.hpp"
#include "mrf/graph.hpp"
#include "mrf/oracle.hpp"

namespace mrf {

// Rooted view of a spanning forest given by host edge ids. The tree is fixed
// for the life of the view (portal routing pins gradients to it).
class HostTree {
 public:
  HostTree(const DynGraph& g, const std::vector<EdgeId>& tree_edges) : g_(&g) {
    std::size_t n = g.vertexCount();
    parent_.assign(n, kNoVertex);
    parent_edge_.assign(n, kNoEdge);
    depth_.assign(n, 0);
    root_.assign(n, kNoVertex);
    adj_.assign(n, {});
    for (EdgeId e : tree_edges) {
      const EdgeRec& r = g.edge(e);
      adj_[r.tail].push_back(e);
      adj_[r.head].push_back(e);
    }
    for (VertexId s = 0; std::size_t(s) < n; ++s) {
      if (!g.vertexAlive(s) || root_[s] != kNoVertex) continue;
      root_[s] = s;
      std::vector<VertexId> stack{s};
      while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : adj_[v]) {
          VertexId w = other(e, v);
          if (root_[w] != kNoVertex || w == s) continue;
          root_[w] = s;
          parent_[w] = v;
          parent_edge_[w] = e;
          depth_[w] = depth_[v] + 1;
          stack.push_back(w);
        }
      }
    }
  }

  VertexId other(EdgeId e, VertexId v) const {
    const EdgeRec& r = g_->edge(e);
    return r.tail == v ? r.head : r.tail;
  }

  bool sameTree(VertexId a, VertexId b) const { return root_[a] == root_[b]; }
  const std::vector<EdgeId>& incidentTreeEdges(VertexId v) const { return adj_[v]; }

  // path a..b as vertices (inclusive)
  std::vector<VertexId> path(VertexId a, VertexId b) const {
    require(sameTree(a, b), Errc::not_connected, "tree path");
    std::vector<VertexId> up, down;
    VertexId x = a, y = b;
    while (depth_[x] > depth_[y]) {
      up.push_back(x);
      x = parent_[x];
    }
    while (depth_[y] > depth_[x]) {
      down.push_back(y);
      y = parent_[y];
    }
    while (x != y) {
      up.push_back(x);
      down.push_back(y);
      x = parent_[x];
      y = parent_[y];
    }
    up.push_back(x);
    for (auto it = down.rbegin(); it != down.rend(); ++it) up.push_back(*it);
    return up;
  }

  // signed gradient and length along the walk a -> b
  double pathGradient(VertexId a, VertexId b) const {
    double s = 0.0;
    auto p = path(a, b);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) s += stepGradient(p[i], p[i + 1]);
    return s;
  }
  double pathLength(VertexId a, VertexId b) const {
    double s = 0.0;
    auto p = path(a, b);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) s += stepEdgeRec(p[i], p[i + 1]).length;
    return s;
  }

  EdgeId stepEdge(VertexId from, VertexId to) const {
    if (parent_[from] == to) return parent_edge_[from];
    if (parent_[to] == from) return parent_edge_[to];
    fail(Errc::not_a_tree_edge, "step edge");
  }
  const EdgeRec& stepEdgeRec(VertexId from, VertexId to) const {
    return g_->edge(stepEdge(from, to));
  }
  double stepGradient(VertexId from, VertexId to) const {
    EdgeId e = stepEdge(from, to);
    const EdgeRec& r = g_->edge(e);
    return r.tail == from ? r.gradient : -r.gradient;
  }

  const DynGraph& host() const { return *g_; }

 private:
  const DynGraph* g_;
  std::vector<VertexId> parent_, root_;
  std::vector<EdgeId> parent_edge_;
  std::vector<int> depth_;
  std::vector<std::vector<EdgeId>> adj_;
};

// Portals of P reachable from u along the tree without passing another portal.
inline std::vector<VertexId> visiblePortals(const HostTree& t, const std::set<VertexId>& P,
                                            VertexId u) {
  std::vector<VertexId> out;
  std::set<VertexId> seen{u};
  std::vector<VertexId> stack{u};
  while (!stack.empty()) {
    VertexId v = stack.back();
    stack.pop_back();
    for (EdgeId e : t.incidentTreeEdges(v)) {
      VertexId w = t.other(e, v);
      if (!seen.insert(w).second) continue;
      if (P.count(w)) out.push_back(w);
      else stack.push_back(w);
    }
  }
  return out;
}

// Literal branch-freeness predicate: every non-member sees at most 2 members.
inline bool isBranchFree(const HostTree& t, const std::set<VertexId>& P,
                         const DynGraph& g) {
  for (VertexId u = 0; std::size_t(u) < g.vertexCount(); ++u) {
    if (!g.vertexAlive(u) || P.count(u)) continue;
    if (visiblePortals(t, P, u).size() > 2) return false;
  }
  return true;
}

// ---------- tree decomposition (boundary branch-free by construction) ----------

struct TreeDecomposition {
  std::vector<std::vector<VertexId>> components;  // vertex sets (boundaries shared)
  std::set<VertexId> boundary;
};

// Carves the forest into edge-disjoint pieces, each incident to at most 40k
// host edges away from its boundary, with at most two boundary vertices per
// piece (hence a branch-free boundary overall).
inline TreeDecomposition treeDecompose(const DynGraph& g,
                                       const std::vector<EdgeId>& tree_edges, int k) {
  require(k >= 1, Errc::invariant_violation, "k >= 1");
  HostTree t(g, tree_edges);
  std::size_t n = g.vertexCount();
  std::vector<std::vector<VertexId>> children(n);
  std::vector<VertexId> order;
  std::vector<VertexId> parent(n, kNoVertex);
  {
    std::vector<bool> vis(n, false);
    for (VertexId s = 0; std::size_t(s) < n; ++s) {
      if (!g.vertexAlive(s) || vis[s]) continue;
      vis[s] = true;
      std::vector<VertexId> stack{s};
      while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (EdgeId e : t.incidentTreeEdges(v)) {
          VertexId w = t.other(e, v);
          if (vis[w]) continue;
          vis[w] = true;
          parent[w] = v;
          children[v].push_back(w);
          stack.push_back(w);
        }
      }
    }
  }

  TreeDecomposition out;
  // weight of a vertex: incident host edges (tree and off-tree alike)
  auto weight = [&](VertexId v) { return double(g.degree(v)); };

  struct Stub {
    std::vector<VertexId> verts;
    double w = 0.0;
    bool open = false;  // contains a boundary vertex
  };
  std::vector<Stub> stub(n);

  auto close = [&](Stub&& s) {
    if (!s.verts.empty()) out.components.push_back(std::move(s.verts));
  };

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    Stub mine;
    mine.verts.push_back(v);
    mine.w = weight(v);
    std::vector<Stub*> open_children;
    for (VertexId c : children[v]) {
      if (stub[c].open) open_children.push_back(&stub[c]);
    }
    bool make_boundary = open_children.size() >= 2;
    for (VertexId c : children[v]) {
      Stub& sc = stub[c];
      if (sc.open && make_boundary) {
        // each open child closes as its own piece through v
        sc.verts.push_back(v);
        close(std::move(sc));
      } else if (mine.w + sc.w > double(k)) {
        // closing here makes v a boundary vertex of the child piece
        sc.verts.push_back(v);
        close(std::move(sc));
        make_boundary = true;
      } else {
        mine.w += sc.w;
        mine.open = mine.open || sc.open;
        for (VertexId x : sc.verts) mine.verts.push_back(x);
      }
    }
    if (make_boundary) {
      out.boundary.insert(v);
      mine.open = true;
    }
    if (parent[v] == kNoVertex) {
      close(std::move(mine));
    } else {
      stub[v] = std::move(mine);
    }
  }
  return out;
}

// ---------- portal routed graphs ----------

// PRG vertices reuse host vertex ids (portals only). Edge metadata records
// the kind and, for routed edges, the off-tree preimage.
class PortalRoutedGraph {
 public:
  enum class Kind { tree_path, routed };
  struct Meta {
    Kind kind;
    EdgeId preimage = kNoEdge;            // off-tree host edge (routed)
    VertexId path_a = kNoVertex, path_b = kNoVertex;  // consecutive portals (tree_path)
  };

  struct UpdateBatch {
    int split_and_merge = 0;
    int edge_inserts = 0;
    int edge_deletes = 0;
    int length_decreases = 0;
    int extra_portals = 0;  // branch-freeness repairs
  };

  PortalRoutedGraph(const DynGraph& g, std::vector<EdgeId> tree_edges,
                    std::set<VertexId> portals)
      : host_(&g), tree_edges_(std::move(tree_edges)), tree_(g, tree_edges_),
        portals_(std::move(portals)) {
    is_tree_.assign(g.edgeSlots(), false);
    for (EdgeId e : tree_edges_) is_tree_[e] = true;
    require(isBranchFree(tree_, portals_, g), Errc::not_branch_free, "initial portal set");
    for (EdgeId e : g.liveEdges())
      if (!is_tree_[e]) offRoute(e);
    rebuildTreePathEdges();
  }

  const std::set<VertexId>& portals() const { return portals_; }
  const HostTree& tree() const { return tree_; }
  const DynGraph& host() const { return *host_; }

  // live PRG edges: (endpoints, length, gradient, meta)
  struct PrgEdge {
    VertexId a, b;
    double length, gradient;
    Meta meta;
    bool live = true;
  };
  const std::vector<PrgEdge>& edges() const { return edges_; }

  // Adds u (and at most one repair vertex) keeping P branch-free, updating
  // the edge set incrementally; lengths only decrease, gradients are pinned.
  UpdateBatch addPortal(VertexId u) {
    require(!portals_.count(u), Errc::already_portal, "vertex is already a portal");
    UpdateBatch batch;
    std::set<VertexId> attempt = portals_;
    attempt.insert(u);
    if (!isBranchFree(tree_, attempt, *host_)) {
      VertexId plus = repairVertex(u);
      require(plus != kNoVertex, Errc::not_branch_free, "no repair vertex found");
      UpdateBatch inner = addPortal(plus);
      batch.extra_portals += 1 + inner.extra_portals;
      batch.split_and_merge += inner.split_and_merge;
      batch.edge_inserts += inner.edge_inserts;
      batch.edge_deletes += inner.edge_deletes;
      batch.length_decreases += inner.length_decreases;
    }

    auto visible = visiblePortals(tree_, portals_, u);
    // tree-path edge surgery around u
    if (visible.size() == 2) {
      // u sits between two consecutive portals: split that edge
      for (auto& pe : edges_) {
        if (!pe.live || pe.meta.kind != Kind::tree_path) continue;
        if ((pe.meta.path_a == visible[0] && pe.meta.path_b == visible[1]) ||
            (pe.meta.path_a == visible[1] && pe.meta.path_b == visible[0])) {
          // only if u actually lies on this pair's path
          auto pthv = tree_.path(pe.meta.path_a, pe.meta.path_b);
          if (std::find(pthv.begin(), pthv.end(), u) != pthv.end()) {
            pe.live = false;
            ++batch.edge_deletes;
          }
        }
      }
      ++batch.split_and_merge;  // the PRG-side SplitAndMerge this corresponds to
    }
    portals_.insert(u);
    for (VertexId q : visible) {
      addTreePathEdge(u, q);
      ++batch.edge_inserts;
    }

    // routed edges whose tree path passes u: endpoints move toward u and
    // their routed lengths shrink
    for (auto& pe : edges_) {
      if (!pe.live || pe.meta.kind != Kind::routed) continue;
      const EdgeRec& r = host_->edge(pe.meta.preimage);
      auto pth = tree_.path(r.tail, r.head);
      if (std::find(pth.begin(), pth.end(), u) == pth.end()) continue;
      auto routed = routedEndpoints(pe.meta.preimage);
      if (routed && (routed->first != pe.a || routed->second != pe.b)) {
        double new_len = routedLength(pe.meta.preimage, routed->first, routed->second);
        require(new_len <= pe.length + 1e-9, Errc::invariant_violation,
                "portal insertion increased a routed length");
        pe.a = routed->first;
        pe.b = routed->second;
        pe.length = new_len;
        ++batch.length_decreases;
      }
    }
    // off-tree edges that newly acquired two portals (or their first portal)
    for (EdgeId e : host_->liveEdges()) {
      if (is_tree_[e] || routed_of_.count(e)) continue;
      if (offRoute(e)) ++batch.edge_inserts;
    }
    return batch;
  }

  // Equality with a from-scratch build on the same portal set: same live
  // topology, lengths, gradients and preimages.
  bool equivalentTo(const PortalRoutedGraph& other) const {
    auto sig = [](const PortalRoutedGraph& p) {
      std::multiset<std::tuple<int, VertexId, VertexId, long long, long long, EdgeId>> s;
      for (const auto& pe : p.edges_) {
        if (!pe.live) continue;
        VertexId a = std::min(pe.a, pe.b), b = std::max(pe.a, pe.b);
        s.insert({int(pe.meta.kind), a, b, (long long)std::llround(pe.length * 1e9),
                  (long long)std::llround(pe.gradient * 1e9),
                  pe.meta.kind == Kind::routed ? pe.meta.preimage : kNoEdge});
      }
      return s;
    };
    return sig(*this) == sig(other);
  }

  // Tree cycles that touch no portal: scanned directly over components of T \ P.
  std::optional<std::pair<EdgeId, double>> bestPortalFreeCycle() const {
    std::optional<std::pair<EdgeId, double>> best;
    for (EdgeId e : host_->liveEdges()) {
      if (is_tree_[e]) continue;
      const EdgeRec& r = host_->edge(e);
      if (r.tail == r.head) continue;
      auto pth = tree_.path(r.tail, r.head);
      bool touches = false;
      for (VertexId v : pth)
        if (portals_.count(v)) touches = true;
      if (touches) continue;
      double grad = r.gradient + tree_.pathGradient(r.head, r.tail);
      double len = r.length + tree_.pathLength(r.head, r.tail);
      double ratio = std::min(grad, -grad) / len;
      if (!best || ratio < best->second) best = {{e, ratio}};
    }
    return best;
  }

  void verifyBranchFree() const {
    require(isBranchFree(tree_, portals_, *host_), Errc::not_branch_free, "portal set");
  }

  // first and last portals on the preimage's tree path (nullopt when < 1)
  std::optional<std::pair<VertexId, VertexId>> routedEndpoints(EdgeId e) const {
    const EdgeRec& r = host_->edge(e);
    if (!tree_.sameTree(r.tail, r.head)) return std::nullopt;
    auto pth = tree_.path(r.tail, r.head);
    VertexId first = kNoVertex, last = kNoVertex;
    for (VertexId v : pth) {
      if (portals_.count(v)) {
        if (first == kNoVertex) first = v;
        last = v;
      }
    }
    if (first == kNoVertex) return std::nullopt;
    return std::make_pair(first, last);
  }

  double routedLength(EdgeId e, VertexId a, VertexId b) const {
    const EdgeRec& r = host_->edge(e);
    return tree_.pathLength(a, r.tail) + r.length + tree_.pathLength(r.head, b);
  }

  double treeCycleGradient(EdgeId e) const {
    const EdgeRec& r = host_->edge(e);
    return r.gradient + tree_.pathGradient(r.head, r.tail);
  }

  // Host image of one PRG edge traversed a -> b, as a signed circulation:
  // tree-path edges map to their tree path, routed edges to the portal
  // routing T[a,x] + e + T[y,b].
  Circulation hostImage(int prg_edge, int mult = 1) const {
    const PrgEdge& pe = edges_[prg_edge];
    Circulation c;
    auto addWalk = [&](VertexId from, VertexId to) {
      auto pth = tree_.path(from, to);
      for (std::size_t i = 0; i + 1 < pth.size(); ++i) {
        EdgeId he = tree_.stepEdge(pth[i], pth[i + 1]);
        const EdgeRec& r = host_->edge(he);
        c.add(he, (r.tail == pth[i] ? 1.0 : -1.0) * mult);
      }
    };
    if (pe.meta.kind == Kind::tree_path) {
      addWalk(pe.a, pe.b);
    } else {
      const EdgeRec& r = host_->edge(pe.meta.preimage);
      addWalk(pe.a, r.tail);
      c.add(pe.meta.preimage, double(mult));
      addWalk(r.head, pe.b);
    }
    return c;
  }

 private:
  // (re)route one off-tree edge; returns true when an edge was created
  bool offRoute(EdgeId e) {
    auto ab = routedEndpoints(e);
    if (!ab) return false;
    auto [a, b] = *ab;
    PrgEdge pe;
    pe.a = a;
    pe.b = b;
    pe.length = routedLength(e, a, b);
    pe.gradient = treeCycleGradient(e);
    pe.meta = {Kind::routed, e, kNoVertex, kNoVertex};
    routed_of_[e] = int(edges_.size());
    edges_.push_back(pe);
    return true;
  }

  void addTreePathEdge(VertexId p, VertexId q) {
    PrgEdge pe;
    pe.a = p;
    pe.b = q;
    pe.length = tree_.pathLength(p, q);
    pe.gradient = 0.0;
    pe.meta = {Kind::tree_path, kNoEdge, p, q};
    edges_.push_back(pe);
  }

  void rebuildTreePathEdges() {
    std::set<std::pair<VertexId, VertexId>> done;
    for (VertexId p : portals_) {
      for (VertexId q : visiblePortals(tree_, portals_, p)) {
        // visibility from a portal: BFS stops at portals, so q is consecutive
        auto key = std::minmax(p, q);
        if (done.insert({key.first, key.second}).second) addTreePathEdge(p, q);
      }
    }
  }

  // the farthest vertex from u with two portal-bearing child subtrees
  VertexId repairVertex(VertexId u) const {
    // root at u by BFS; count portal descendants per child subtree
    std::size_t n = host_->vertexCount();
    std::vector<VertexId> parent(n, kNoVertex);
    std::vector<int> depth(n, 0);
    std::vector<VertexId> order;
    std::vector<bool> vis(n, false);
    vis[u] = true;
    std::vector<VertexId> q{u};
    while (!q.empty()) {
      VertexId v = q.back();
      q.pop_back();
      order.push_back(v);
      for (EdgeId e : tree_.incidentTreeEdges(v)) {
        VertexId w = tree_.other(e, v);
        if (vis[w]) continue;
        vis[w] = true;
        parent[w] = v;
        depth[w] = depth[v] + 1;
        q.push_back(w);
      }
    }
    std::vector<int> portal_children(n, 0), has_portal(n, 0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      VertexId v = *it;
      if (portals_.count(v)) has_portal[v] = 1;
      if (parent[v] != kNoVertex && has_portal[v]) {
        ++portal_children[parent[v]];
        has_portal[parent[v]] = 1;
      }
    }
    VertexId best = kNoVertex;
    for (VertexId v : order) {
      if (v == u || portals_.count(v)) continue;
      if (portal_children[v] >= 2 && (best == kNoVertex || depth[v] > depth[best])) best = v;
    }
    return best;
  }

  const DynGraph* host_;
  std::vector<EdgeId> tree_edges_;
  HostTree tree_;
  std::set<VertexId> portals_;
  std::vector<bool> is_tree_;
  std::vector<PrgEdge> edges_;
  std::map<EdgeId, int> routed_of_;
};

// ---------- auxiliary split view ----------

// Degree-capped view of the routed edges: every portal p splits into p_root
// (routed edges whose preimage is incident to p itself) and one p_C per
// decomposition component containing p (routed edges whose preimage is
// incident to C). Regenerated deterministically from the PRG on demand;
// tree-path edges are not included.
struct AuxPortalView {
  struct AuxVertex {
    VertexId portal;
    int component;  // -1 = the root copy
  };
  std::vector<AuxVertex> vertices;
  // per routed PRG edge (index into prg.edges()): its two aux endpoints
  std::map<int, std::pair<int, int>> endpoint_of;

  std::size_t degree(int aux_vertex) const {
    std::size_t d = 0;
    for (const auto& [e, ab] : endpoint_of)
      d += (ab.first == aux_vertex) + (ab.second == aux_vertex);
    return d;
  }
};

inline AuxPortalView auxPortalView(const PortalRoutedGraph& prg, const TreeDecomposition& w) {
  AuxPortalView out;
  const DynGraph& g = prg.host();
  // component index per (vertex, component) membership
  std::map<VertexId, std::vector<int>> comps_of;
  for (int ci = 0; ci < int(w.components.size()); ++ci)
    for (VertexId v : w.components[ci]) comps_of[v].push_back(ci);
  std::map<std::pair<VertexId, int>, int> aux_of;
  auto auxId = [&](VertexId p, int comp) {
    auto [it, fresh] = aux_of.try_emplace({p, comp}, int(out.vertices.size()));
    if (fresh) out.vertices.push_back({p, comp});
    return it->second;
  };
  auto componentOf = [&](VertexId p, VertexId x) {
    // the decomposition component containing both p and the preimage endpoint
    // side x (falls back to the root copy when x is p itself)
    if (x == p) return -1;
    for (int ci : comps_of[p]) {
      for (VertexId v : w.components[ci])
        if (v == x) return ci;
    }
    return -1;
  };
  for (int i = 0; i < int(prg.edges().size()); ++i) {
    const auto& pe = prg.edges()[i];
    if (!pe.live || pe.meta.kind != PortalRoutedGraph::Kind::routed) continue;
    const EdgeRec& r = g.edge(pe.meta.preimage);
    auto ab = prg.routedEndpoints(pe.meta.preimage);
    if (!ab) continue;
    VertexId x = ab->first == pe.a ? r.tail : r.head;  // preimage endpoint on a's side
    VertexId y = x == r.tail ? r.head : r.tail;
    out.endpoint_of[i] = {auxId(pe.a, componentOf(pe.a, x)),
                          auxId(pe.b, componentOf(pe.b, y))};
  }
  return out;
}

// ---------- forest lift ----------

// Lift a forest that is flat over the PRG (nodes map to portals) into a flat
// forest over the host: dangling subtrees per node, tree-path edges spliced
// through the path's first interior vertex, routed edges through their
// preimage endpoints.
struct PrgForestNodeRef {
  NodeId node;       // node in the PRG-level forest
  VertexId portal;   // its image
};

class PrgLift {
 public:
  struct LiftedForest {
    FlatForest forest;
    // copy of host vertex v inside the dangling tree of PRG-forest node fx
    std::map<std::pair<NodeId, VertexId>, NodeId> copy_of;
  };

  // f: forest flat over the PRG (node hosts are portals); edge_of_node maps
  // each non-root node to the PRG edge (index into prg.edges()) under its
  // parent edge. Each node grows the full dangling tree of its portal,
  // rooted at the vertex where the lifted edge attaches.
  static LiftedForest lift(const PortalRoutedGraph& prg, const FlatForest& f,
                           const std::vector<int>& edge_of_node) {
    LiftedForest out;
    const DynGraph& g = prg.host();
    const HostTree& t = prg.tree();

    // region of portal p: p plus every vertex seeing p without another portal
    auto regionOf = [&](VertexId p) {
      std::set<VertexId> region{p};
      std::vector<VertexId> stack{p};
      while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : t.incidentTreeEdges(v)) {
          VertexId w = t.other(e, v);
          if (prg.portals().count(w) || !region.insert(w).second) continue;
          stack.push_back(w);
        }
      }
      return region;
    };

    // Plant the child's region as a subtree rooted at `start`, attached under
    // `attach_to` via host edge `via` (or as a forest root when detached).
    auto plant = [&](NodeId fx, VertexId p, VertexId start, NodeId attach_to, EdgeId via) {
      auto region = regionOf(p);
      require(region.count(start), Errc::not_flat, "attachment vertex outside the region");
      std::map<VertexId, NodeId> local;
      if (attach_to == kNoNode) {
        local[start] = out.forest.addRoot(start);
      } else {
        const EdgeRec& r = g.edge(via);
        double grad = r.tail == start ? r.gradient : -r.gradient;
        local[start] = out.forest.addChild(attach_to, start, via, r.length, grad);
      }
      std::vector<VertexId> stack{start};
      while (!stack.empty()) {
        VertexId v = stack.back();
        stack.pop_back();
        for (EdgeId e : t.incidentTreeEdges(v)) {
          VertexId w = t.other(e, v);
          if (!region.count(w) || local.count(w)) continue;
          const EdgeRec& r = g.edge(e);
          double grad = r.tail == w ? r.gradient : -r.gradient;
          local[w] = out.forest.addChild(local.at(v), w, e, r.length, grad);
          stack.push_back(w);
        }
      }
      for (auto& [v, node] : local) out.copy_of[{fx, v}] = node;
    };

    // parents before children
    std::vector<NodeId> nodes(f.size());
    for (NodeId x = 0; std::size_t(x) < f.size(); ++x) nodes[x] = x;
    std::sort(nodes.begin(), nodes.end(),
              [&](NodeId a, NodeId b) { return f.node(a).depth < f.node(b).depth; });

    for (NodeId fx : nodes) {
      const auto& nd = f.node(fx);
      VertexId p_child = nd.host;
      if (nd.parent == kNoNode) {
        plant(fx, p_child, p_child, kNoNode, kNoEdge);
        continue;
      }
      const auto& pe = prg.edges()[edge_of_node[fx]];
      VertexId p_parent = f.node(nd.parent).host;
      if (pe.meta.kind == PortalRoutedGraph::Kind::tree_path) {
        // hook the interior vertex next to the parent portal under it
        auto pth = t.path(p_parent, p_child);
        VertexId a = pth.size() >= 2 ? pth[1] : p_child;
        EdgeId he = t.stepEdge(p_parent, a);
        plant(fx, p_child, a, out.copy_of.at({nd.parent, p_parent}), he);
      } else {
        // routed edge: the preimage endpoint on the child side hooks under
        // the copy of the other endpoint in the parent's region
        const EdgeRec& r = g.edge(pe.meta.preimage);
        auto ab = prg.routedEndpoints(pe.meta.preimage);
        require(ab.has_value(), Errc::not_flat, "routed edge lost its portals");
        VertexId x = ab->first == p_child ? r.tail : r.head;
        VertexId y = x == r.tail ? r.head : r.tail;
        plant(fx, p_child, x, out.copy_of.at({nd.parent, y}), pe.meta.preimage);
      }
    }
    return out;
  }
};

// ---------- spanner cycles ----------

// Best cycle of the form e + rev(embedding path of e) over non-spanner edges.
struct EmbeddedPathStep {
  EdgeId edge;
  int dir;  // +1 traverses with the edge orientation
};

inline std::optional<CycleAnswer> bestSpannerCycle(
    const DynGraph& g, const std::vector<bool>& in_spanner,
    const std::map<EdgeId, std::vector<EmbeddedPathStep>>& embedding) {
  std::optional<CycleAnswer> best;
  for (EdgeId e : g.liveEdges()) {
    if (std::size_t(e) < in_spanner.size() && in_spanner[e]) continue;
    auto it = embedding.find(e);
    if (it == embedding.end()) continue;
    SimpleCycle cyc;
    cyc.steps.push_back({e, +1});
    for (auto rit = it->second.rbegin(); rit != it->second.rend(); ++rit)
      cyc.steps.push_back({rit->edge, -rit->dir});
    double r = cyc.ratio(g);
    double rr = std::min(r, -r);
    if (rr < r) {
      for (auto& [ee, dd] : cyc.steps) dd = -dd;
      r = rr;
    }
    if (!best || r < best->ratio) {
      CycleAnswer ans;
      ans.cycle = cyc;
      ans.circulation = cyc.toCirculation();
      ans.ratio = r;
      best = ans;
    }
  }
  return best;
}

}  // namespace mrf
