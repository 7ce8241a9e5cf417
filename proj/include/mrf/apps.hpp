#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "mrf/baselines.hpp"
#include "mrf/ipm.hpp"

namespace mrf::apps {

struct StreamEdge {
  int tail, head;
  long long cap = 1, cost = 0;
};

enum class OracleKind { exact, tree };

// Resolved later (hrg pipeline); installed by including mrf/tree_oracle.hpp.
// Falls back to the exact oracle when no tree pipeline is registered.
inline std::function<IpmOracle()>& treeOracleFactory() {
  static std::function<IpmOracle()> factory;
  return factory;
}

inline IpmOracle makeOracle(OracleKind kind) {
  if (kind == OracleKind::tree && treeOracleFactory()) return treeOracleFactory()();
  return ipmExactOracle;
}

// Default per spec: exact up to 64 vertices, tree pipeline above.
inline OracleKind defaultOracle(int n) { return n <= 64 ? OracleKind::exact : OracleKind::tree; }

struct ThresholdResult {
  // number of insertions processed when cost <= F first became feasible
  // (0 = with the empty graph); nullopt = never within the stream
  std::optional<std::size_t> first_feasible;
  std::map<EdgeId, long long> witness;  // integral circulation with c^T f <= F
  long long witness_cost = 0;
  std::int64_t steps = 0;
  std::size_t rebuilds = 0;
};

// Incremental thresholded min-cost circulation: reports the first insertion
// after which a circulation of cost at most F exists, with a rounded witness.
inline ThresholdResult thresholdedMincost(int n, const std::vector<StreamEdge>& edges,
                                          long long F, OracleKind kind = OracleKind::exact,
                                          std::function<void(const IpmStepInfo&)> on_step = {}) {
  ThresholdResult out;
  if (F >= 0) {  // the zero circulation is already good enough
    out.first_feasible = 0;
    return out;
  }
  long long C = 1, U = 1;
  for (const auto& e : edges) {
    C = std::max(C, std::llabs(e.cost));
    U = std::max(U, e.cap);
  }
  long long m = std::max<long long>(1, (long long)edges.size());
  if (F < -m * C * U) return out;  // never feasible: |c^T f| <= mCU

  IpmParams params = IpmParams::make(std::size_t(m), double(C), double(U), double(F));
  IpmSolver solver(params, makeOracle(kind));
  solver.on_step = std::move(on_step);
  std::vector<VertexId> vmap(n);
  for (int v = 0; v < n; ++v) vmap[v] = solver.addVertex();

  for (std::size_t i = 0; i < edges.size(); ++i) {
    solver.addEdge(vmap[edges[i].tail], vmap[edges[i].head], double(edges[i].cap),
                   double(edges[i].cost));
    auto outcome = solver.settle();
    if (outcome == IpmSolver::Outcome::threshold_reached) {
      std::vector<double> f(solver.graph().edgeSlots(), 0.0);
      for (EdgeId e : solver.graph().liveEdges()) f[e] = solver.flow(e);
      out.witness = roundToExact(solver.graph(), f);
      out.witness_cost = roundedCost(solver.graph(), out.witness);
      require(out.witness_cost <= F, Errc::rounding_failed,
              "rounded witness exceeds the threshold");
      out.first_feasible = i + 1;
      out.steps = solver.stepCount();
      out.rebuilds = solver.rebuildCount();
      return out;
    }
  }
  out.steps = solver.stepCount();
  out.rebuilds = solver.rebuildCount();
  return out;
}

// Incremental cycle detection: capacity 1, cost -1, threshold -1.
inline std::optional<std::size_t> cycleDetect(int n, const std::vector<std::pair<int, int>>& arcs,
                                              OracleKind kind = OracleKind::exact) {
  std::vector<StreamEdge> edges;
  edges.reserve(arcs.size());
  for (auto [a, b] : arcs) edges.push_back({a, b, 1, -1});
  return thresholdedMincost(n, edges, -1, kind).first_feasible;
}

// Incremental SCC maintenance via contraction inside the IPM.
class SccMaintainer {
 public:
  SccMaintainer(int n, std::size_t insertion_budget, OracleKind kind = OracleKind::exact)
      : solver_(IpmParams::make(std::max<std::size_t>(insertion_budget, 1), 1.0, 1.0, -1.0),
                makeOracle(kind), /*scc_mode=*/true) {
    for (int v = 0; v < n; ++v) vmap_.push_back(solver_.addVertex());
  }

  void insert(int a, int b) {
    solver_.addEdge(vmap_[a], vmap_[b], 1.0, -1.0);
    auto outcome = solver_.settle();
    require(outcome == IpmSolver::Outcome::no_good_cycle, Errc::invariant_violation,
            "SCC run hit the threshold (it never should: contractions keep c^T f > F)");
  }

  // Dense component labels, one per original vertex.
  std::vector<int> components() const {
    std::vector<int> label(vmap_.size());
    std::map<VertexId, int> remap;
    for (std::size_t v = 0; v < vmap_.size(); ++v) {
      VertexId root = solver_.find(vmap_[v]);
      auto [it, fresh] = remap.try_emplace(root, int(remap.size()));
      label[v] = it->second;
    }
    return label;
  }

  const IpmSolver& solver() const { return solver_; }

 private:
  IpmSolver solver_;
  std::vector<VertexId> vmap_;
};

// ---------- geometric-threshold approximate min-cost flow ----------

// Maintains a (1+eps)-approximation of the cheapest way to route `demand`
// units from s to t while edges arrive. One thresholded instance per
// geometric level (1+eps)^i; feasibility is monotone per instance.
class ApproxMincostFlow {
 public:
  ApproxMincostFlow(int n, std::size_t budget, double eps, int s, int t, long long demand,
                    long long max_cost, long long max_cap,
                    OracleKind kind = OracleKind::exact)
      : n_(n), s_(s), t_(t), demand_(demand), eps_(eps) {
    // The return arc's -M reward must dominate every threshold level, so a
    // partial routing can never sneak under a threshold: feasibility at level
    // T then means exactly "all `demand` units routable at cost <= T".
    const double top = double(demand) * double(max_cost) * double(n);
    for (double thr = 1.0;; thr *= (1.0 + eps)) {
      levels_.push_back(Level{(long long)std::floor(thr)});
      if (thr >= top) break;
    }
    big_m_ = 2 * levels_.back().threshold + 2;
    for (auto& lv : levels_) {
      lv.params = IpmParams::make(budget + 1, double(big_m_),
                                  double(std::max(demand, max_cap)),
                                  double(lv.threshold - big_m_ * demand_));
      lv.solver = std::make_unique<IpmSolver>(lv.params, makeOracle(kind));
      for (int v = 0; v < n_; ++v) lv.solver->addVertex();
      lv.solver->addEdge(t_, s_, double(demand_), double(-big_m_));
    }
  }

  void insert(int a, int b, long long cap, long long cost) {
    for (auto& lv : levels_) {
      if (lv.feasible) continue;
      lv.solver->addEdge(a, b, double(cap), double(cost));
      if (lv.solver->settle() == IpmSolver::Outcome::threshold_reached) lv.feasible = true;
    }
  }

  // Smallest feasible threshold, or nullopt while the demand is unroutable.
  std::optional<long long> maintainedCost() const {
    for (const auto& lv : levels_) {
      if (lv.feasible) return lv.threshold;
    }
    return std::nullopt;
  }

 private:
  struct Level {
    long long threshold;
    IpmParams params;
    std::unique_ptr<IpmSolver> solver;
    bool feasible = false;
  };
  int n_, s_, t_;
  long long demand_, big_m_ = 0;
  double eps_;
  std::vector<Level> levels_;
};

// Incremental (1+eps) s-t shortest path = unit-demand approximate flow over
// positive lengths.
class IncrementalShortestPath {
 public:
  IncrementalShortestPath(int n, std::size_t budget, double eps, int s, int t,
                          long long max_len, OracleKind kind = OracleKind::exact)
      : inner_(n, budget, eps, s, t, /*demand=*/1, max_len, /*max_cap=*/1, kind) {}

  void insert(int a, int b, long long len) { inner_.insert(a, b, 1, len); }

  // Maintained (1+eps)-distance; nullopt while s and t are disconnected.
  std::optional<long long> distance() const { return inner_.maintainedCost(); }

 private:
  ApproxMincostFlow inner_;
};

}  // namespace mrf::apps
