#pragma once

#include <cmath>
#include <map>
#include <string>

#include "mrf/graph.hpp"

namespace mrf {

// Sparse signed edge flow. Positive values run with the edge orientation.
struct Circulation {
  std::map<EdgeId, double> entries;

  double operator[](EdgeId e) const {
    auto it = entries.find(e);
    return it == entries.end() ? 0.0 : it->second;
  }

  void add(EdgeId e, double v) {
    if (v == 0.0) return;
    double& slot = entries[e];
    slot += v;
    if (slot == 0.0) entries.erase(e);
  }

  Circulation& operator+=(const Circulation& o) {
    for (const auto& [e, v] : o.entries) add(e, v);
    return *this;
  }

  Circulation scaled(double s) const {
    Circulation out;
    if (s == 0.0) return out;
    for (const auto& [e, v] : entries) out.entries[e] = s * v;
    return out;
  }

  double maxAbs() const {
    double m = 0.0;
    for (const auto& [e, v] : entries) m = std::max(m, std::fabs(v));
    return m;
  }

  bool empty() const { return entries.empty(); }
};

// <g, c> over the host graph's gradients.
inline double gradientPairing(const DynGraph& g, const Circulation& c) {
  double s = 0.0;
  for (const auto& [e, v] : c.entries) s += g.edge(e).gradient * v;
  return s;
}

// ||L c||_1 = sum l(e)|c(e)|.
inline double weightedLength(const DynGraph& g, const Circulation& c) {
  double s = 0.0;
  for (const auto& [e, v] : c.entries) s += g.edge(e).length * std::fabs(v);
  return s;
}

inline double ratioOf(const DynGraph& g, const Circulation& c) {
  return gradientPairing(g, c) / weightedLength(g, c);
}

struct CirculationCheck {
  bool ok = true;
  VertexId violating_vertex = kNoVertex;
  double net = 0.0;
};

// Returns the first vertex (ascending id) whose net flow exceeds 1e-9 * ||c||_inf.
inline CirculationCheck circulationCheck(const DynGraph& g, const Circulation& c) {
  std::map<VertexId, double> net;
  for (const auto& [id, v] : c.entries) {
    require(g.edgeAlive(id), Errc::unknown_id, "circulation references edge " + std::to_string(id));
    const EdgeRec& e = g.edge(id);
    net[e.tail] -= v;
    net[e.head] += v;
  }
  const double tol = 1e-9 * c.maxAbs();
  for (const auto& [v, x] : net)
    if (std::fabs(x) > tol) return {false, v, x};
  return {};
}

}  // namespace mrf
