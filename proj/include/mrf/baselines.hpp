#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "mrf/errors.hpp"

// Deliberately naive reference algorithms, independent of every data
// structure in the library. They re-solve from scratch (or from a warm
// feasible point) and exist solely to cross-check the fast path.
namespace mrf::baselines {

struct Arc {
  int tail, head;
  long long cap, cost;
};

// Minimum-cost circulation by negative-cycle canceling on the residual graph.
// Integral capacities/costs; each canceled cycle improves the cost by at
// least one, so warm-started re-optimization over an incremental stream does
// total work proportional to the overall cost decrease.
class CycleCancelCirculation {
 public:
  int addVertex() { return n_++; }

  int addArc(int tail, int head, long long cap, long long cost) {
    arcs_.push_back({tail, head, cap, cost});
    flow_.push_back(0);
    return int(arcs_.size()) - 1;
  }

  // Cancels negative residual cycles until optimal; returns c^T f.
  long long optimize() {
    while (cancelOne()) {
    }
    return cost();
  }

  long long cost() const {
    long long c = 0;
    for (std::size_t i = 0; i < arcs_.size(); ++i) c += arcs_[i].cost * flow_[i];
    return c;
  }

  long long flow(int arc) const { return flow_[arc]; }
  int vertexCount() const { return n_; }

 private:
  // residual arcs: 2i = forward, 2i+1 = backward
  bool cancelOne() {
    const long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> dist(n_, 0);
    std::vector<int> pred(n_, -1);  // residual arc id
    auto residCap = [&](int rid) {
      int i = rid / 2;
      return rid % 2 == 0 ? arcs_[i].cap - flow_[i] : flow_[i];
    };
    auto residCost = [&](int rid) {
      int i = rid / 2;
      return rid % 2 == 0 ? arcs_[i].cost : -arcs_[i].cost;
    };
    auto from = [&](int rid) { return rid % 2 == 0 ? arcs_[rid / 2].tail : arcs_[rid / 2].head; };
    auto to = [&](int rid) { return rid % 2 == 0 ? arcs_[rid / 2].head : arcs_[rid / 2].tail; };

    // rounds with marked predecessor-walk extraction once past n rounds
    auto tryExtract = [&]() -> std::vector<int> {
      std::vector<std::int8_t> mark(n_, 0);
      for (int s = 0; s < n_; ++s) {
        if (pred[s] < 0 || mark[s]) continue;
        std::vector<int> path;
        int x = s;
        while (x >= 0 && pred[x] >= 0 && !mark[x]) {
          mark[x] = 1;
          path.push_back(x);
          x = from(pred[x]);
        }
        if (x >= 0 && mark[x] == 1) {
          auto it = std::find(path.begin(), path.end(), x);
          std::vector<int> cyc;
          for (auto p = it; p != path.end(); ++p) cyc.push_back(pred[*p]);
          // verify: strictly negative residual cycle with capacity
          long long cyc_cost = 0, bottleneck = inf;
          for (int rid : cyc) {
            cyc_cost += residCost(rid);
            bottleneck = std::min(bottleneck, residCap(rid));
          }
          if (cyc_cost < 0 && bottleneck > 0) return cyc;
        }
        for (int v : path) mark[v] = 2;
      }
      return {};
    };

    for (int round = 0; round < 3 * n_ + 2; ++round) {
      bool relaxed = false;
      for (int rid = 0; rid < int(2 * arcs_.size()); ++rid) {
        if (residCap(rid) <= 0) continue;
        long long nd = dist[from(rid)] + residCost(rid);
        if (nd < dist[to(rid)]) {
          dist[to(rid)] = std::max(nd, -inf);
          pred[to(rid)] = rid;
          relaxed = true;
        }
      }
      if (!relaxed) return false;
      if (round + 1 >= n_) {
        auto cyc = tryExtract();
        if (!cyc.empty()) {
          long long bottleneck = inf;
          for (int rid : cyc) bottleneck = std::min(bottleneck, residCap(rid));
          for (int rid : cyc) {
            int i = rid / 2;
            flow_[i] += rid % 2 == 0 ? bottleneck : -bottleneck;
          }
          return true;
        }
      }
    }
    require(false, Errc::invariant_violation, "baseline failed to extract a negative cycle");
    return false;
  }

  int n_ = 0;
  std::vector<Arc> arcs_;
  std::vector<long long> flow_;
};

// Successive shortest paths for min-cost s-t flow (Bellman-Ford potentials,
// then Dijkstra with reduced costs). Returns the cost of routing `units`, or
// nullopt when infeasible.
inline std::optional<long long> sspMinCostFlow(int n, const std::vector<Arc>& arcs, int s, int t,
                                               long long units) {
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> cap(2 * arcs.size()), cost(2 * arcs.size());
  std::vector<int> from(2 * arcs.size()), to(2 * arcs.size());
  std::vector<std::vector<int>> out(n);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    cap[2 * i] = arcs[i].cap;
    cost[2 * i] = arcs[i].cost;
    from[2 * i] = arcs[i].tail;
    to[2 * i] = arcs[i].head;
    cap[2 * i + 1] = 0;
    cost[2 * i + 1] = -arcs[i].cost;
    from[2 * i + 1] = arcs[i].head;
    to[2 * i + 1] = arcs[i].tail;
    out[arcs[i].tail].push_back(int(2 * i));
    out[arcs[i].head].push_back(int(2 * i + 1));
  }
  // potentials from Bellman-Ford (negative costs allowed, no negative cycles
  // assumed on the zero flow: caller guarantees or the result is meaningless)
  std::vector<long long> pot(n, 0);
  for (int round = 0; round < n; ++round) {
    bool relax = false;
    for (std::size_t rid = 0; rid < cap.size(); ++rid) {
      if (cap[rid] <= 0) continue;
      if (pot[from[rid]] + cost[rid] < pot[to[rid]]) {
        pot[to[rid]] = pot[from[rid]] + cost[rid];
        relax = true;
      }
    }
    if (!relax) break;
  }
  long long total = 0, routed = 0;
  while (routed < units) {
    std::vector<long long> dist(n, inf);
    std::vector<int> pre(n, -1);
    using QE = std::pair<long long, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
    dist[s] = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist[v]) continue;
      for (int rid : out[v]) {
        if (cap[rid] <= 0) continue;
        long long nd = d + cost[rid] + pot[v] - pot[to[rid]];
        if (nd < dist[to[rid]]) {
          dist[to[rid]] = nd;
          pre[to[rid]] = rid;
          pq.push({nd, to[rid]});
        }
      }
    }
    if (dist[t] >= inf) return std::nullopt;
    for (int v = 0; v < n; ++v)
      if (dist[v] < inf) pot[v] += dist[v];
    long long push = units - routed;
    for (int v = t; v != s; v = from[pre[v]]) push = std::min(push, cap[pre[v]]);
    for (int v = t; v != s; v = from[pre[v]]) {
      cap[pre[v]] -= push;
      cap[pre[v] ^ 1] += push;
      total += push * cost[pre[v]];
    }
    routed += push;
  }
  return total;
}

// Tarjan strongly connected components (iterative). Returns component id per
// vertex; ids are dense and arbitrary.
inline std::vector<int> tarjanScc(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> out(n);
  for (auto [a, b] : edges) out[a].push_back(b);
  std::vector<int> idx(n, -1), low(n, 0), comp(n, -1), stck;
  std::vector<bool> on(n, false);
  int counter = 0, ncomp = 0;
  struct Frame {
    int v;
    std::size_t i;
  };
  for (int s = 0; s < n; ++s) {
    if (idx[s] != -1) continue;
    std::vector<Frame> st{{s, 0}};
    idx[s] = low[s] = counter++;
    stck.push_back(s);
    on[s] = true;
    while (!st.empty()) {
      auto& fr = st.back();
      if (fr.i < out[fr.v].size()) {
        int w = out[fr.v][fr.i++];
        if (idx[w] == -1) {
          idx[w] = low[w] = counter++;
          stck.push_back(w);
          on[w] = true;
          st.push_back({w, 0});
        } else if (on[w]) {
          low[fr.v] = std::min(low[fr.v], idx[w]);
        }
      } else {
        if (low[fr.v] == idx[fr.v]) {
          while (true) {
            int w = stck.back();
            stck.pop_back();
            on[w] = false;
            comp[w] = ncomp;
            if (w == fr.v) break;
          }
          ++ncomp;
        }
        int v = fr.v;
        st.pop_back();
        if (!st.empty()) low[st.back().v] = std::min(low[st.back().v], low[v]);
      }
    }
  }
  return comp;
}

// Directed cycle existence by DFS colors.
inline bool hasDirectedCycle(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> out(n);
  for (auto [a, b] : edges) {
    if (a == b) return true;
    out[a].push_back(b);
  }
  std::vector<int> state(n, 0);
  for (int s = 0; s < n; ++s) {
    if (state[s]) continue;
    std::vector<std::pair<int, std::size_t>> st{{s, 0}};
    state[s] = 1;
    while (!st.empty()) {
      auto& [v, i] = st.back();
      if (i < out[v].size()) {
        int w = out[v][i++];
        if (state[w] == 1) return true;
        if (state[w] == 0) {
          state[w] = 1;
          st.push_back({w, 0});
        }
      } else {
        state[v] = 2;
        st.pop_back();
      }
    }
  }
  return false;
}

// Dijkstra over nonnegative arc lengths; returns dist or inf.
inline long long dijkstra(int n, const std::vector<Arc>& arcs, int s, int t) {
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<std::vector<std::pair<int, long long>>> out(n);
  for (const Arc& a : arcs) out[a.tail].push_back({a.head, a.cost});
  std::vector<long long> dist(n, inf);
  using QE = std::pair<long long, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<>> pq;
  dist[s] = 0;
  pq.push({0, s});
  while (!pq.empty()) {
    auto [d, v] = pq.top();
    pq.pop();
    if (d > dist[v]) continue;
    for (auto [w, c] : out[v]) {
      if (d + c < dist[w]) {
        dist[w] = d + c;
        pq.push({d + c, w});
      }
    }
  }
  return dist[t];
}

}  // namespace mrf::baselines
