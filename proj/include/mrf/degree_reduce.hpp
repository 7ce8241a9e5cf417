#pragma once

#include <map>
#include <utility>
#include <vector>

#include "mrf/flat_forest.hpp"
#include "mrf/graph.hpp"

namespace mrf {

// Constant-degree reduction: every vertex v of G owns a chain T_v of slot
// nodes, one slot per incident edge end, and every G-edge becomes a single
// H-edge between its two slots. Max degree in H is 3 (two chain neighbours
// plus one cross edge), |E(H)| = 3m, and one G update touches O(1) H edges.
class DegreeReducer {
 public:
  struct HUpdateStats {
    std::size_t h_edge_inserts = 0;
    std::size_t h_edge_deletes = 0;
    std::size_t h_vertex_inserts = 0;
    std::size_t total() const { return h_edge_inserts + h_edge_deletes + h_vertex_inserts; }
    void operator+=(const HUpdateStats& o) {
      h_edge_inserts += o.h_edge_inserts;
      h_edge_deletes += o.h_edge_deletes;
      h_vertex_inserts += o.h_vertex_inserts;
    }
  };

  DegreeReducer() = default;

  explicit DegreeReducer(const DynGraph& g) {
    for (VertexId v = 0; std::size_t(v) < g.vertexCount(); ++v)
      if (g.vertexAlive(v)) onInsertVertex(v);
    for (EdgeId e : g.liveEdges()) onInsertEdge(g, e);
  }

  // Feed one already-applied G update (`applied` = the Update returned by
  // DynGraph::applyUpdate, which carries allocated ids). Returns H recourse.
  HUpdateStats onUpdate(const DynGraph& g, const Update& applied) {
    HUpdateStats s;
    switch (applied.kind) {
      case Update::Kind::insert_vertex:
        s += onInsertVertex(applied.vertex);
        break;
      case Update::Kind::insert_edge:
        s += onInsertEdge(g, applied.edge);
        break;
      case Update::Kind::delete_edge:
        s += onDeleteEdge(applied.edge);
        break;
      case Update::Kind::split_vertex:
        s += onInsertVertex(applied.vertex);
        for (EdgeId e : applied.moved) s += reattach(g, e);
        for (EdgeId e : applied.crossing) s += reattach(g, e);
        break;
      case Update::Kind::set_length:
        h_.setLength(cross_.at(applied.edge), applied.length);
        break;
      case Update::Kind::set_gradient:
        h_.setGradient(cross_.at(applied.edge), applied.gradient);
        break;
    }
    return s;
  }

  const DynGraph& h() const { return h_; }

  // H vertex owning G-edge e's end at its tail / head.
  VertexId tailSlot(EdgeId e) const { return owners_.at(e).first; }
  VertexId headSlot(EdgeId e) const { return owners_.at(e).second; }

  VertexId anchor(VertexId v) const { return chains_.at(v).anchor; }
  VertexId hostOf(VertexId h_vertex) const { return host_.at(h_vertex); }

  std::size_t maxHDegree() const {
    std::size_t d = 0;
    for (VertexId v = 0; std::size_t(v) < h_.vertexCount(); ++v)
      if (h_.vertexAlive(v)) d = std::max(d, h_.degree(v));
    return d;
  }

  // Chain forest snapshot as a flat embedding of G (every chain edge collapses).
  FlatForest forest() const {
    FlatForest f;
    for (const auto& [v, c] : chains_) {
      NodeId prev = f.addRoot(v);
      for (VertexId slot : c.slots) {
        (void)slot;
        prev = f.addChild(prev, v, kNoEdge, 0.0, 0.0);
      }
    }
    return f;
  }

  // Number of slots in v's chain (== current degree of v, counting loops twice).
  std::size_t chainSize(VertexId v) const { return chains_.at(v).slots.size(); }

 private:
  struct Chain {
    VertexId anchor = kNoVertex;
    std::vector<VertexId> slots;
    std::vector<EdgeId> links;  // links[i] joins slots[i-1] (or anchor) to slots[i]
  };

  HUpdateStats onInsertVertex(VertexId v) {
    Chain c;
    c.anchor = h_.insertVertex();
    host_[c.anchor] = v;
    chains_[v] = std::move(c);
    return {.h_vertex_inserts = 1};
  }

  HUpdateStats onInsertEdge(const DynGraph& g, EdgeId e) {
    HUpdateStats s;
    const EdgeRec rec = g.edge(e);
    VertexId a = appendSlot(rec.tail, s);
    VertexId b = appendSlot(rec.head, s);  // self-loop: two slots on one chain
    EdgeId cross = h_.insertEdge(a, b, rec.capacity, rec.cost, rec.length, rec.gradient);
    ++s.h_edge_inserts;
    cross_[e] = cross;
    owners_[e] = {a, b};
    slot_pos_[a] = {rec.tail, chains_[rec.tail].slots.size() - (rec.tail == rec.head ? 2 : 1)};
    slot_pos_[b] = {rec.head, chains_[rec.head].slots.size() - 1};
    return s;
  }

  HUpdateStats onDeleteEdge(EdgeId e) {
    HUpdateStats s;
    auto it = cross_.find(e);
    require(it != cross_.end(), Errc::unknown_id, "delete of unknown edge");
    h_.deleteEdge(it->second);
    ++s.h_edge_deletes;
    cross_.erase(it);
    auto [a, b] = owners_.at(e);
    removeSlot(b, s);  // remove the later slot first so positions stay valid
    removeSlot(a, s);
    owners_.erase(e);
    return s;
  }

  // Tear down and re-add an edge whose endpoints were re-mapped by a split.
  // g.edge(e) carries the current attributes, so the cross edge is rebuilt as-is.
  HUpdateStats reattach(const DynGraph& g, EdgeId e) {
    HUpdateStats s;
    s += onDeleteEdge(e);
    s += onInsertEdge(g, e);
    return s;
  }

  VertexId appendSlot(VertexId v, HUpdateStats& s) {
    Chain& c = chains_.at(v);
    VertexId nv = h_.insertVertex();
    host_[nv] = v;
    ++s.h_vertex_inserts;
    VertexId prev = c.slots.empty() ? c.anchor : c.slots.back();
    EdgeId link = h_.insertEdge(prev, nv, 1.0, 0.0, 0.0, 0.0);
    ++s.h_edge_inserts;
    c.slots.push_back(nv);
    c.links.push_back(link);
    return nv;
  }

  void removeSlot(VertexId slot, HUpdateStats& s) {
    auto [v, pos] = slot_pos_.at(slot);
    Chain& c = chains_.at(v);
    h_.deleteEdge(c.links[pos]);
    ++s.h_edge_deletes;
    if (pos + 1 < c.slots.size()) {
      h_.deleteEdge(c.links[pos + 1]);
      ++s.h_edge_deletes;
      VertexId prev = pos == 0 ? c.anchor : c.slots[pos - 1];
      c.links[pos + 1] = h_.insertEdge(prev, c.slots[pos + 1], 1.0, 0.0, 0.0, 0.0);
      ++s.h_edge_inserts;
    }
    c.slots.erase(c.slots.begin() + pos);
    c.links.erase(c.links.begin() + pos);
    for (std::size_t i = pos; i < c.slots.size(); ++i) slot_pos_[c.slots[i]].second = i;
    slot_pos_.erase(slot);
    host_.erase(slot);
  }

  DynGraph h_;
  std::map<VertexId, Chain> chains_;
  std::map<EdgeId, EdgeId> cross_;                            // G edge -> H cross edge
  std::map<EdgeId, std::pair<VertexId, VertexId>> owners_;    // G edge -> (tail slot, head slot)
  std::map<VertexId, std::pair<VertexId, std::size_t>> slot_pos_;  // slot -> (G vertex, position)
  std::map<VertexId, VertexId> host_;                         // H vertex -> G vertex
};

}  // namespace mrf
