#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "mrf/errors.hpp"

namespace mrf {

using VertexId = std::int32_t;
using EdgeId = std::int32_t;

constexpr VertexId kNoVertex = -1;
constexpr EdgeId kNoEdge = -1;

struct EdgeRec {
  VertexId tail = kNoVertex;
  VertexId head = kNoVertex;
  double length = 0.0;    // l(e) >= 0
  double gradient = 0.0;  // g(e)
  double capacity = 1.0;  // u(e)
  double cost = 0.0;      // c(e)
  bool alive = false;

  friend bool operator==(const EdgeRec&, const EdgeRec&) = default;
};

struct Update {
  enum class Kind {
    insert_vertex,   // allocates the next vertex id
    insert_edge,     // allocates the next edge id
    delete_edge,
    split_vertex,    // allocates a new vertex, re-maps moved/crossing edges
    set_length,
    set_gradient,
  };

  Kind kind;
  VertexId vertex = kNoVertex;       // split_vertex target
  EdgeId edge = kNoEdge;             // delete/set_* target
  VertexId tail = kNoVertex, head = kNoVertex;
  double length = 0.0, gradient = 0.0, capacity = 1.0, cost = 0.0;
  std::vector<EdgeId> moved;         // split: edges whose v-endpoints move to the new vertex
  std::vector<EdgeId> crossing;      // split: self-loops at v that become (v, v') edges

  friend bool operator==(const Update&, const Update&) = default;

  static Update insertVertex() { return {Kind::insert_vertex}; }
  static Update insertEdge(VertexId t, VertexId h, double cap, double cost, double len = 0.0,
                           double grad = 0.0) {
    Update u{Kind::insert_edge};
    u.tail = t;
    u.head = h;
    u.capacity = cap;
    u.cost = cost;
    u.length = len;
    u.gradient = grad;
    return u;
  }
  static Update deleteEdge(EdgeId e) {
    Update u{Kind::delete_edge};
    u.edge = e;
    return u;
  }
  static Update splitVertex(VertexId v, std::vector<EdgeId> moved, std::vector<EdgeId> crossing = {}) {
    Update u{Kind::split_vertex};
    u.vertex = v;
    u.moved = std::move(moved);
    u.crossing = std::move(crossing);
    return u;
  }
  static Update setLength(EdgeId e, double l) {
    Update u{Kind::set_length};
    u.edge = e;
    u.length = l;
    return u;
  }
  static Update setGradient(EdgeId e, double g) {
    Update u{Kind::set_gradient};
    u.edge = e;
    u.gradient = g;
    return u;
  }
};

// Directed dynamic multigraph with append-only edge identities and a replayable
// update journal. Deleted edges leave tombstones so ids stay stable.
class DynGraph {
 public:
  DynGraph() = default;

  // --- structure ---

  VertexId insertVertex() { return applyUpdate(Update::insertVertex()).vertex; }

  EdgeId insertEdge(VertexId t, VertexId h, double cap = 1.0, double cost = 0.0, double len = 0.0,
                    double grad = 0.0) {
    return applyUpdate(Update::insertEdge(t, h, cap, cost, len, grad)).edge;
  }

  void deleteEdge(EdgeId e) { applyUpdate(Update::deleteEdge(e)); }

  VertexId splitVertex(VertexId v, const std::vector<EdgeId>& moved,
                       const std::vector<EdgeId>& crossing = {}) {
    return applyUpdate(Update::splitVertex(v, moved, crossing)).vertex;
  }

  void setLength(EdgeId e, double l) { applyUpdate(Update::setLength(e, l)); }
  void setGradient(EdgeId e, double g) { applyUpdate(Update::setGradient(e, g)); }

  // Applies one journaled update. Returns the update with allocated ids filled in
  // (vertex for insert_vertex/split_vertex, edge for insert_edge).
  Update applyUpdate(Update u) {
    switch (u.kind) {
      case Update::Kind::insert_vertex: {
        u.vertex = VertexId(vertex_alive_.size());
        vertex_alive_.push_back(true);
        incident_.emplace_back();
        break;
      }
      case Update::Kind::insert_edge: {
        checkVertex(u.tail);
        checkVertex(u.head);
        require(u.length >= 0.0, Errc::invariant_violation, "negative length");
        if (max_degree_ &&
            (degree(u.tail) + 1 > *max_degree_ || degree(u.head) + 1 > *max_degree_))
          fail(Errc::degree_bound_violated, "insert_edge");
        u.edge = EdgeId(edges_.size());
        edges_.push_back(
            {u.tail, u.head, u.length, u.gradient, u.capacity, u.cost, /*alive=*/true});
        incident_[u.tail].insert(u.edge);
        incident_[u.head].insert(u.edge);
        ++live_edges_;
        break;
      }
      case Update::Kind::delete_edge: {
        EdgeRec& e = liveEdge(u.edge);
        incident_[e.tail].erase(u.edge);
        incident_[e.head].erase(u.edge);
        e.alive = false;
        --live_edges_;
        break;
      }
      case Update::Kind::split_vertex: {
        const VertexId target = u.vertex;
        checkVertex(target);
        for (EdgeId id : u.moved) liveEdge(id);
        for (EdgeId id : u.crossing) {
          const EdgeRec& e = liveEdge(id);
          require(e.tail == target && e.head == target, Errc::invariant_violation,
                  "crossing edge is not a self-loop at the split vertex");
        }
        VertexId nv = VertexId(vertex_alive_.size());
        vertex_alive_.push_back(true);
        incident_.emplace_back();
        for (EdgeId id : u.moved) {
          EdgeRec& e = edges_[id];
          incident_[e.tail].erase(id);
          incident_[e.head].erase(id);
          if (e.tail == target) e.tail = nv;
          if (e.head == target) e.head = nv;
          incident_[e.tail].insert(id);
          incident_[e.head].insert(id);
        }
        for (EdgeId id : u.crossing) {
          EdgeRec& e = edges_[id];
          incident_[e.tail].erase(id);
          e.head = nv;  // self-loop (v,v) becomes (v, v')
          incident_[e.tail].insert(id);
          incident_[e.head].insert(id);
        }
        journal_.push_back(u);   // journaled with the split target
        u.vertex = nv;           // callers get the allocated id
        return u;
      }
      case Update::Kind::set_length: {
        require(u.length >= 0.0, Errc::invariant_violation, "negative length");
        liveEdge(u.edge).length = u.length;
        break;
      }
      case Update::Kind::set_gradient: {
        liveEdge(u.edge).gradient = u.gradient;
        break;
      }
    }
    journal_.push_back(u);
    return u;
  }

  // --- accessors ---

  std::size_t vertexCount() const { return vertex_alive_.size(); }
  std::size_t edgeSlots() const { return edges_.size(); }
  std::size_t liveEdgeCount() const { return live_edges_; }

  bool vertexAlive(VertexId v) const {
    return v >= 0 && std::size_t(v) < vertex_alive_.size() && vertex_alive_[v];
  }
  bool edgeAlive(EdgeId e) const {
    return e >= 0 && std::size_t(e) < edges_.size() && edges_[e].alive;
  }

  const EdgeRec& edge(EdgeId e) const {
    require(e >= 0 && std::size_t(e) < edges_.size(), Errc::unknown_id, "edge id out of range");
    return edges_[e];
  }

  // Live incident edges of v in ascending edge-id order.
  const std::set<EdgeId>& incident(VertexId v) const {
    checkVertex(v);
    return incident_[v];
  }

  std::size_t degree(VertexId v) const { return incident(v).size(); }

  const std::vector<Update>& journal() const { return journal_; }

  void setMaxDegree(std::optional<std::size_t> bound) { max_degree_ = bound; }

  std::vector<EdgeId> liveEdges() const {
    std::vector<EdgeId> out;
    out.reserve(live_edges_);
    for (EdgeId e = 0; std::size_t(e) < edges_.size(); ++e)
      if (edges_[e].alive) out.push_back(e);
    return out;
  }

  // Bit-exact structural equality (ids, tombstones, attributes).
  friend bool operator==(const DynGraph& a, const DynGraph& b) {
    return a.vertex_alive_ == b.vertex_alive_ && a.edges_ == b.edges_;
  }

  // Re-executes a journal on a fresh graph.
  static DynGraph replay(const std::vector<Update>& journal) {
    DynGraph g;
    for (const Update& u : journal) g.applyUpdate(u);
    return g;
  }

 private:
  void checkVertex(VertexId v) const {
    require(vertexAlive(v), Errc::unknown_id, "vertex " + std::to_string(v));
  }

  EdgeRec& liveEdge(EdgeId e) {
    require(edgeAlive(e), Errc::unknown_id, "edge " + std::to_string(e));
    return edges_[e];
  }

  std::vector<bool> vertex_alive_;
  std::vector<EdgeRec> edges_;
  std::vector<std::set<EdgeId>> incident_;
  std::vector<Update> journal_;
  std::size_t live_edges_ = 0;
  std::optional<std::size_t> max_degree_;
};

}  // namespace mrf
