#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mrf/circulation.hpp"
#include "mrf/graph.hpp"

namespace mrf {

using NodeId = std::int32_t;
constexpr NodeId kNoNode = -1;

// Rooted forest with a vertex map into a host graph (Pi), satisfying the flat
// embedding condition: every forest edge maps to a host edge or collapses onto
// a single host vertex. Edge attributes live on the child -> parent edge.
class FlatForest {
 public:
  struct Node {
    NodeId parent = kNoNode;
    VertexId host = kNoVertex;
    EdgeId host_edge = kNoEdge;  // host edge under the edge to parent; kNoEdge = collapsed/root
    double length = 0.0;         // edge to parent
    double gradient = 0.0;       // edge to parent, signed along child -> parent
    std::int32_t depth = 0;
  };

  NodeId addRoot(VertexId host) {
    nodes_.push_back({kNoNode, host, kNoEdge, 0.0, 0.0, 0});
    bumpVertexCongestion(host);
    return NodeId(nodes_.size() - 1);
  }

  // Adds a child whose edge to `parent` maps to `host_edge` (or collapses when kNoEdge).
  NodeId addChild(NodeId parent, VertexId host, EdgeId host_edge, double length, double gradient) {
    Node n;
    n.parent = parent;
    n.host = host;
    n.host_edge = host_edge;
    n.length = length;
    n.gradient = gradient;
    n.depth = node(parent).depth + 1;
    nodes_.push_back(n);
    bumpVertexCongestion(host);
    if (host_edge != kNoEdge) ++edge_congestion_[host_edge];
    return NodeId(nodes_.size() - 1);
  }

  std::size_t size() const { return nodes_.size(); }

  const Node& node(NodeId x) const {
    require(x >= 0 && std::size_t(x) < nodes_.size(), Errc::unknown_id, "forest node");
    return nodes_[x];
  }

  VertexId host(NodeId x) const { return node(x).host; }

  NodeId root(NodeId x) const {
    while (node(x).parent != kNoNode) x = node(x).parent;
    return x;
  }

  bool sameTree(NodeId a, NodeId b) const { return root(a) == root(b); }

  const std::map<VertexId, int>& vertexCongestion() const { return vertex_congestion_; }
  const std::map<EdgeId, int>& edgeCongestion() const { return edge_congestion_; }

  int vertexCongestion(VertexId v) const {
    auto it = vertex_congestion_.find(v);
    return it == vertex_congestion_.end() ? 0 : it->second;
  }

  // Forest path a..b as a node sequence (inclusive). Throws when disconnected.
  std::vector<NodeId> path(NodeId a, NodeId b) const {
    std::vector<NodeId> up, down;
    NodeId x = a, y = b;
    while (node(x).depth > node(y).depth) {
      up.push_back(x);
      x = node(x).parent;
    }
    while (node(y).depth > node(x).depth) {
      down.push_back(y);
      y = node(y).parent;
    }
    while (x != y) {
      require(x != kNoNode && y != kNoNode, Errc::not_connected, "forest path");
      up.push_back(x);
      down.push_back(y);
      x = node(x).parent;
      y = node(y).parent;
    }
    require(x != kNoNode, Errc::not_connected, "forest path");
    up.push_back(x);
    for (auto it = down.rbegin(); it != down.rend(); ++it) up.push_back(*it);
    return up;
  }

  // Sum of signed gradients / lengths along the path a -> b.
  double pathGradient(NodeId a, NodeId b) const {
    double s = 0.0;
    forEachPathEdge(a, b, [&](NodeId child, int dir) {
      s += dir * node(child).gradient;
    });
    return s;
  }

  double pathLength(NodeId a, NodeId b) const {
    double s = 0.0;
    forEachPathEdge(a, b, [&](NodeId child, int) { s += node(child).length; });
    return s;
  }

  // Adds the host image of walking a -> b (scaled by `amount`) into `c`.
  // Collapsed edges contribute nothing.
  void accumulateHostPath(const DynGraph& g, NodeId a, NodeId b, double amount,
                          Circulation& c) const {
    forEachPathEdge(a, b, [&](NodeId child, int dir) {
      const Node& n = node(child);
      if (n.host_edge == kNoEdge) return;
      const EdgeRec& he = g.edge(n.host_edge);
      // Direction of the host edge when walking child -> parent.
      int host_dir;
      if (he.tail == n.host && he.head == node(n.parent).host) host_dir = 1;
      else if (he.head == n.host && he.tail == node(n.parent).host) host_dir = -1;
      else {
        fail(Errc::not_flat, "forest edge does not match its host edge");
      }
      c.add(n.host_edge, amount * dir * host_dir);
    });
  }

  // Flat-embedding and congestion-counter verification (test hook).
  void verify(const DynGraph& g) const {
    std::map<VertexId, int> vc;
    std::map<EdgeId, int> ec;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Node& n = nodes_[i];
      require(g.vertexAlive(n.host), Errc::not_flat, "host vertex dead");
      ++vc[n.host];
      if (n.parent == kNoNode) continue;
      const Node& p = nodes_[n.parent];
      if (n.host_edge == kNoEdge) {
        require(n.host == p.host, Errc::not_flat, "collapsed edge with distinct host endpoints");
      } else {
        const EdgeRec& he = g.edge(n.host_edge);
        bool fwd = he.tail == n.host && he.head == p.host;
        bool bwd = he.head == n.host && he.tail == p.host;
        require(fwd || bwd, Errc::not_flat, "forest edge maps to mismatched host edge");
        ++ec[n.host_edge];
      }
    }
    require(vc == vertex_congestion_, Errc::invariant_violation, "vertex congestion counters");
    require(ec == edge_congestion_, Errc::invariant_violation, "edge congestion counters");
  }

  template <class F>
  void forEachPathEdge(NodeId a, NodeId b, F&& f) const {
    // dir = +1 when the walk traverses child -> parent.
    NodeId x = a, y = b;
    std::vector<NodeId> down;
    while (node(x).depth > node(y).depth) {
      f(x, +1);
      x = node(x).parent;
    }
    while (node(y).depth > node(x).depth) {
      down.push_back(y);
      y = node(y).parent;
    }
    while (x != y) {
      require(node(x).parent != kNoNode && node(y).parent != kNoNode, Errc::not_connected,
              "forest path");
      f(x, +1);
      down.push_back(y);
      x = node(x).parent;
      y = node(y).parent;
    }
    for (auto it = down.rbegin(); it != down.rend(); ++it) f(*it, -1);
  }

 private:
  void bumpVertexCongestion(VertexId v) { ++vertex_congestion_[v]; }

  std::vector<Node> nodes_;
  std::map<VertexId, int> vertex_congestion_;
  std::map<EdgeId, int> edge_congestion_;
};

}  // namespace mrf
