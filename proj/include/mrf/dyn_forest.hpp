#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <vector>

#include "mrf/errors.hpp"

namespace mrf {

// Dynamic forest over integer vertex ids with per-edge gradient, length,
// maintained flow and a change accumulator, built on splay link-cut trees.
// Edges are their own splay nodes sitting between their endpoints, so path
// aggregates range over edge nodes only.
//
// Signed values (gradient, flow) are stored along the current in-order
// direction of the preferred path; a reversal lazily negates them. `forward`
// tracks the node's current direction against its creation orientation u->v.
class DynForest {
 public:
  using EdgeHandle = std::int32_t;

  explicit DynForest(double detect_epsilon = std::numeric_limits<double>::infinity())
      : epsilon_(detect_epsilon) {}

  // --- structure ---

  EdgeHandle link(int u, int v, double gradient, double length) {
    Node* nu = vertexNode(u);
    Node* nv = vertexNode(v);
    require(findRoot(nu) != findRoot(nv), Errc::would_create_cycle,
            "link(" + std::to_string(u) + "," + std::to_string(v) + ")");
    EdgeHandle id = EdgeHandle(edges_.size());
    nodes_.push_back(Node{});
    Node* nz = &nodes_.back();
    nz->is_edge = true;
    nz->edge_id = id;
    edges_.push_back({nz, u, v, /*live=*/true});
    pair_to_edge_[pairKey(u, v)] = id;

    makeRoot(nu);
    nu->parent = nz;  // path-parent: u hangs under the edge node
    nz->parent = nv;  // path-parent into v's tree
    // calibrate stored values in the u -> v frame
    makeRoot(nu);
    access(nv);
    splay(nz);
    nz->forward = true;
    nz->g_cur = gradient;
    nz->f_cur = 0.0;
    nz->acc = 0.0;
    nz->ell = length;
    pull(nz);
    return id;
  }

  void cut(int u, int v) {
    auto it = pair_to_edge_.find(pairKey(u, v));
    require(it != pair_to_edge_.end() && edges_[it->second].live, Errc::not_a_tree_edge,
            "cut(" + std::to_string(u) + "," + std::to_string(v) + ")");
    cutEdge(it->second);
  }

  void cutEdge(EdgeHandle e) {
    EdgeRec& rec = liveRec(e);
    Node* nu = vertexNode(rec.u);
    Node* nz = rec.node;
    makeRoot(nu);
    access(vertexNode(rec.v));
    splay(nz);
    pushDown(nz);
    for (int k : {0, 1}) {
      if (nz->ch[k]) {
        nz->ch[k]->parent = nullptr;
        nz->ch[k] = nullptr;
      }
    }
    pull(nz);
    rec.live = false;
    pair_to_edge_.erase(pairKey(rec.u, rec.v));
  }

  bool connected(int u, int v) {
    if (!hasVertex(u) || !hasVertex(v)) return false;
    return findRoot(vertexNode(u)) == findRoot(vertexNode(v));
  }

  // --- per-edge attributes ---

  void setGradient(EdgeHandle e, double g) {
    Node* z = liveRec(e).node;
    splay(z);
    z->g_cur = z->forward ? g : -g;
    pull(z);
  }

  void setLength(EdgeHandle e, double l) {
    require(l >= 0.0, Errc::invariant_violation, "negative length");
    Node* z = liveRec(e).node;
    splay(z);
    z->ell = l;
    pull(z);
  }

  double gradientOf(EdgeHandle e) {
    Node* z = liveRec(e).node;
    splay(z);
    return z->forward ? z->g_cur : -z->g_cur;
  }

  double lengthOf(EdgeHandle e) {
    Node* z = liveRec(e).node;
    splay(z);
    return z->ell;
  }

  // --- path queries (orientation u -> v) ---

  double pathGradient(int u, int v) {
    Node* nv = exposePath(u, v);
    return nv->sum_g;
  }

  double pathLength(int u, int v) {
    Node* nv = exposePath(u, v);
    return nv->sum_len;
  }

  // f(e) += eta signed along u -> v; |eta| feeds the detect accumulator.
  void addFlowOnPath(int u, int v, double eta) {
    Node* nv = exposePath(u, v);
    applyAdd(nv, eta, std::fabs(eta));
  }

  // Current flow on e, signed along its creation orientation.
  double flow(EdgeHandle e) {
    Node* z = liveRec(e).node;
    splay(z);
    return z->forward ? z->f_cur : -z->f_cur;
  }

  double accumulated(EdgeHandle e) {
    Node* z = liveRec(e).node;
    splay(z);
    return z->acc;
  }

  // Edges whose l(e) * accumulated change reached epsilon since their last
  // report; resets the accumulator of everything returned. Full registry scan
  // (adequate at this scale; the contract is the returned set, not the cost).
  std::vector<EdgeHandle> detect() {
    std::vector<EdgeHandle> out;
    for (EdgeHandle e = 0; std::size_t(e) < edges_.size(); ++e) {
      if (!edges_[e].live) continue;
      Node* z = edges_[e].node;
      splay(z);
      if (z->ell * z->acc >= epsilon_) {
        out.push_back(e);
        z->acc = 0.0;
      }
    }
    return out;
  }

  std::pair<int, int> endpoints(EdgeHandle e) const {
    require(e >= 0 && std::size_t(e) < edges_.size() && edges_[e].live, Errc::unknown_edge,
            "endpoints");
    return {edges_[e].u, edges_[e].v};
  }

  bool hasEdge(EdgeHandle e) const {
    return e >= 0 && std::size_t(e) < edges_.size() && edges_[e].live;
  }

  double detectEpsilon() const { return epsilon_; }

 private:
  struct Node {
    Node* parent = nullptr;
    Node* ch[2] = {nullptr, nullptr};
    bool rev = false;
    bool is_edge = false;
    bool forward = true;
    std::int32_t edge_id = -1;
    double g_cur = 0.0, f_cur = 0.0, ell = 0.0, acc = 0.0;
    double sum_g = 0.0, sum_len = 0.0;
    double addf = 0.0, adda = 0.0;  // pending for child subtrees
  };

  struct EdgeRec {
    Node* node;
    int u, v;
    bool live;
  };

  static std::int64_t pairKey(int u, int v) {
    if (u > v) std::swap(u, v);
    return (std::int64_t(u) << 32) | std::uint32_t(v);
  }

  bool hasVertex(int v) const { return vertex_nodes_.count(v) != 0; }

  Node* vertexNode(int v) {
    auto it = vertex_nodes_.find(v);
    if (it != vertex_nodes_.end()) return it->second;
    nodes_.push_back(Node{});
    Node* n = &nodes_.back();
    vertex_nodes_[v] = n;
    return n;
  }

  static bool isSplayRoot(const Node* x) {
    return !x->parent || (x->parent->ch[0] != x && x->parent->ch[1] != x);
  }

  static void applyRev(Node* x) {
    std::swap(x->ch[0], x->ch[1]);
    x->rev = !x->rev;
    x->g_cur = -x->g_cur;
    x->f_cur = -x->f_cur;
    x->sum_g = -x->sum_g;
    x->addf = -x->addf;
    if (x->is_edge) x->forward = !x->forward;
  }

  static void applyAdd(Node* x, double df, double da) {
    if (x->is_edge) {
      x->f_cur += df;
      x->acc += da;
    }
    x->addf += df;
    x->adda += da;
  }

  static void pushDown(Node* x) {
    if (x->rev) {
      for (int k : {0, 1})
        if (x->ch[k]) applyRev(x->ch[k]);
      x->rev = false;
    }
    if (x->addf != 0.0 || x->adda != 0.0) {
      for (int k : {0, 1})
        if (x->ch[k]) applyAdd(x->ch[k], x->addf, x->adda);
      x->addf = 0.0;
      x->adda = 0.0;
    }
  }

  static void pull(Node* x) {
    x->sum_g = x->is_edge ? x->g_cur : 0.0;
    x->sum_len = x->is_edge ? x->ell : 0.0;
    for (int k : {0, 1}) {
      if (x->ch[k]) {
        x->sum_g += x->ch[k]->sum_g;
        x->sum_len += x->ch[k]->sum_len;
      }
    }
  }

  static void rotate(Node* x) {
    Node* p = x->parent;
    Node* g = p->parent;
    int k = (p->ch[1] == x);
    Node* b = x->ch[k ^ 1];
    p->ch[k] = b;
    if (b) b->parent = p;
    x->ch[k ^ 1] = p;
    x->parent = g;
    if (g) {
      if (g->ch[0] == p) g->ch[0] = x;
      else if (g->ch[1] == p) g->ch[1] = x;
      // otherwise p was a path-parent child; x inherits the pointer
    }
    p->parent = x;
    pull(p);
    pull(x);
  }

  static void splay(Node* x) {
    // push pendings from the splay root down to x
    static thread_local std::vector<Node*> stack;
    stack.clear();
    Node* y = x;
    stack.push_back(y);
    while (!isSplayRoot(y)) {
      y = y->parent;
      stack.push_back(y);
    }
    for (auto it = stack.rbegin(); it != stack.rend(); ++it) pushDown(*it);
    while (!isSplayRoot(x)) {
      Node* p = x->parent;
      if (!isSplayRoot(p)) {
        Node* gp = p->parent;
        if ((gp->ch[1] == p) == (p->ch[1] == x)) rotate(p);
        else rotate(x);
      }
      rotate(x);
    }
  }

  static void access(Node* x) {
    splay(x);
    if (x->ch[1]) {
      x->ch[1] = nullptr;  // old preferred child keeps parent = x as path-parent
      pull(x);
    }
    while (x->parent) {
      Node* y = x->parent;
      splay(y);
      y->ch[1] = x;  // x->parent is already y
      pull(y);
      splay(x);
    }
  }

  static void makeRoot(Node* x) {
    access(x);
    applyRev(x);
  }

  static Node* findRoot(Node* x) {
    access(x);
    while (true) {
      pushDown(x);
      if (!x->ch[0]) break;
      x = x->ch[0];
    }
    splay(x);
    return x;
  }

  Node* exposePath(int u, int v) {
    require(hasVertex(u) && hasVertex(v), Errc::not_connected, "unknown endpoint");
    Node* nu = vertexNode(u);
    Node* nv = vertexNode(v);
    require(findRoot(nu) == findRoot(nv), Errc::not_connected,
            "path(" + std::to_string(u) + "," + std::to_string(v) + ")");
    makeRoot(nu);
    access(nv);
    splay(nv);
    return nv;
  }

  EdgeRec& liveRec(EdgeHandle e) {
    require(e >= 0 && std::size_t(e) < edges_.size() && edges_[e].live, Errc::unknown_edge,
            "edge handle " + std::to_string(e));
    return edges_[e];
  }

  double epsilon_;
  std::deque<Node> nodes_;
  std::map<int, Node*> vertex_nodes_;
  std::vector<EdgeRec> edges_;
  std::map<std::int64_t, EdgeHandle> pair_to_edge_;
};

}  // namespace mrf
