#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "mrf/circulation.hpp"
#include "mrf/cycles.hpp"
#include "mrf/graph.hpp"
#include "mrf/oracle.hpp"

namespace mrf {

// Parameters of the l1 potential-reduction loop. `m` is the total insertion
// budget; delta/alpha follow the potential's definition (log2 inside alpha,
// natural log inside the potential itself).
struct IpmParams {
  std::size_t m = 1;
  double C = 1.0, U = 1.0, F = 0.0;
  double gamma_approx = 1.0;

  double delta = 0.0, alpha = 0.0, q = 0.0, Gamma = 0.0, eps = 0.0;

  // Termination gap: with integral capacities/costs/threshold, any interior
  // flow with c^T f <= F + gap rounds to an integral flow of cost <= F.
  double feasibility_gap = 0.4;

  static IpmParams make(std::size_t m, double C, double U, double F, double gamma_approx = 1.0) {
    IpmParams p;
    p.m = std::max<std::size_t>(m, 1);
    p.C = std::max(C, 1.0);
    p.U = std::max(U, 1.0);
    p.F = F;
    p.gamma_approx = gamma_approx;
    double mm = double(p.m);
    p.delta = 1.0 / (20.0 * mm * mm * p.C);
    p.alpha = 1.0 / (5000.0 * std::log2(std::max(mm * p.C * p.U, 4.0)));
    p.q = p.alpha / (4.0 * gamma_approx);
    p.Gamma = p.q / 800.0;
    p.eps = 1.0 / (40.0 * gamma_approx);
    return p;
  }

  // Synchronization threshold for f-bar: tight enough that the gradient
  // approximation invariant ||L^-1(g~ - g)||_inf <= min(eps, q*gamma/8)
  // follows from the stability lemmas (10*alpha*eps_sync <= alpha/32).
  double epsSync() const { return std::min(eps, 1.0 / 320.0); }
};

// Barrier helpers (the two alpha-power terms of one edge).
inline double ipmBarrier(double f, double u, const IpmParams& p) {
  double sf = f + p.delta, su = u - f;
  require(sf > 0.0 && su > 0.0, Errc::infeasible_flow, "flow outside (-delta, u)");
  return std::pow(sf, -p.alpha) + std::pow(su, -p.alpha);
}

// Phi(f) = 20m log(c^T f - F) + sum_e barrier(e). Errors: ThresholdReached
// when c^T f <= F, InfeasibleFlow when some f(e) leaves (-delta, u).
template <class FlowFn>
double ipmPotential(const DynGraph& g, FlowFn&& f_of, const IpmParams& p,
                    const std::vector<bool>* skip = nullptr) {
  double cost = 0.0, barrier = 0.0;
  for (EdgeId e : g.liveEdges()) {
    if (skip && std::size_t(e) < skip->size() && (*skip)[e]) continue;
    const EdgeRec& r = g.edge(e);
    double f = f_of(e);
    cost += r.cost * f;
    barrier += ipmBarrier(f, r.capacity, p);
  }
  require(cost > p.F, Errc::threshold_reached, "c^T f <= F");
  return 20.0 * double(p.m) * std::log(cost - p.F) + barrier;
}

// Exact length/gradient of one edge at flow f, with the gradient's cost term
// taken at residual r (the potential's own gradient when r = c^T f - F).
inline std::pair<double, double> ipmLengthGradient(double f, double u, double c, double r,
                                                   const IpmParams& p) {
  double sf = f + p.delta, su = u - f;
  require(sf > 0.0 && su > 0.0, Errc::boundary_contact, "flow at barrier boundary");
  double len = 1.0 / sf + 1.0 / su;
  double grad = 20.0 * double(p.m) * c / r + p.alpha * std::pow(su, -1.0 - p.alpha) -
                p.alpha * std::pow(sf, -1.0 - p.alpha);
  return {len, grad};
}

// Per-edge anchored gradient vector: v(e) = 20m c / r_anchor + barrier'(fbar).
// The maintained approximation is g~ = [r_anchor / (c^T f - F)] * v, where the
// scalar prefactor is applied at query time; this keeps the cost part of g~
// exact while the residual drifts inside its (1+eps) window, and only the
// (tiny) barrier part goes stale between per-edge refreshes.
inline double ipmAnchoredGradient(double fbar, double u, double c, double r_anchor,
                                  const IpmParams& p) {
  double sf = fbar + p.delta, su = u - fbar;
  require(sf > 0.0 && su > 0.0, Errc::boundary_contact, "fbar at barrier boundary");
  return 20.0 * double(p.m) * c / r_anchor + p.alpha * std::pow(su, -1.0 - p.alpha) -
         p.alpha * std::pow(sf, -1.0 - p.alpha);
}

struct IpmStepInfo {
  std::int64_t step = 0;
  double ratio = 0.0;        // oracle-reported ratio of the applied cycle
  double eta = 0.0;
  double phi = 0.0;          // potential after the step
  double phi_decrease = 0.0;
  double kappa_eff = 0.0;    // min(|ratio|, progress-lemma domain bound)
  double cost = 0.0;
  std::size_t eprime = 0;
  bool rebuilt = false;
};

struct IpmOracleResult {
  bool found = false;
  Circulation cycle;   // circulation on the working graph
  double ratio = 0.0;  // <v, c>/||L~ c||_1 in the working graph's units
};

// The oracle sees the working graph whose length/gradient fields hold the
// maintained approximations (lengths l~, anchored gradient vectors v); it
// either returns a cycle of ratio <= q_effective or certifies that none
// exists below q_effective (= -q divided by the current gradient prefactor).
using IpmOracle = std::function<IpmOracleResult(const DynGraph&, double /*q_effective*/)>;

inline IpmOracleResult ipmExactOracle(const DynGraph& g, double q_effective) {
  IpmOracleResult out;
  if (!hasCycleBelow(g, q_effective)) return out;
  CycleAnswer ans = exactMinRatio(g);
  out.found = true;
  out.cycle = ans.circulation;
  out.ratio = ans.ratio;
  return out;
}

// Potential-reduction solver: maintains the interior flow, the approximations
// (l~, g~) inside the working graph, the residual anchor, and the potential.
class IpmSolver {
 public:
  enum class Outcome { stepped, no_good_cycle, threshold_reached };

  IpmSolver(IpmParams params, IpmOracle oracle, bool scc_mode = false)
      : p_(params), oracle_(std::move(oracle)), scc_mode_(scc_mode) {
    resid_anchor_ = -p_.F;
    require(resid_anchor_ > 0.0, Errc::infeasible_flow,
            "initial flow already at or below the threshold");
    phi_ = 20.0 * double(p_.m) * std::log(resid_anchor_);
  }

  VertexId addVertex() {
    VertexId v = g_.insertVertex();
    uf_.push_back(v);
    return v;
  }

  // Inserts an edge at flow 0; the potential rises by delta^-a + u^-a <= 3.
  EdgeId addEdge(VertexId tail, VertexId head, double capacity, double cost) {
    require(live_.size() < p_.m, Errc::invariant_violation, "insertion budget exhausted");
    double inc = std::pow(p_.delta, -p_.alpha) + std::pow(capacity, -p_.alpha);
    EdgeId e = g_.insertEdge(tail, head, capacity, cost);
    grow(e);
    phi_ += inc;
    last_insert_increase_ = inc;
    refreshEdge(e);
    if (scc_mode_ && find(tail) == find(head)) contract(e);
    return e;
  }

  // One ApplyCycle: oracle, step-size search, flow update, E' bookkeeping.
  Outcome step() {
    if (thresholdReached()) return Outcome::threshold_reached;
    // gradient prefactor: g~ = scale * v (see ipmAnchoredGradient)
    double scale = resid_anchor_ / (cost_ - p_.F);
    IpmOracleResult ans = oracle_(g_, -p_.q / scale);
    if (!ans.found) return Outcome::no_good_cycle;
    double ratio = scale * ans.ratio;
    require(ratio < 0.0, Errc::oracle_failure, "oracle returned a non-negative ratio");

    // step-size limits from strict interiority (and the SCC cap)
    double g_dot = 0.0, c_dot = 0.0;
    double eta_max = std::numeric_limits<double>::infinity();
    for (const auto& [e, amt] : ans.cycle.entries) {
      const EdgeRec& r = g_.edge(e);
      g_dot += scale * r.gradient * amt;
      if (contracted_[e]) continue;  // no barrier, no cost, no bound
      c_dot += r.cost * amt;
      double room = amt > 0 ? (r.capacity - f_[e]) / amt : (f_[e] + p_.delta) / (-amt);
      eta_max = std::min(eta_max, room);
      if (scc_mode_ && amt > 0)
        eta_max = std::min(eta_max, (0.2 / double(p_.m) - f_[e]) / amt);
    }
    require(g_dot < 0.0, Errc::oracle_failure, "cycle has non-negative g~ pairing");
    double resid = cost_ - p_.F;
    if (c_dot < 0.0) eta_max = std::min(eta_max, resid / (-c_dot));
    eta_max *= (1.0 - 1e-9);
    require(eta_max > 0.0, Errc::oracle_failure, "no feasible step along the cycle");

    double kappa_eff = std::min(std::fabs(ratio), 0.999);
    double eta = chooseStep(ans.cycle, g_dot, c_dot, kappa_eff, eta_max);
    double dphi = potentialDelta(ans.cycle, c_dot, eta);

    // apply
    for (const auto& [e, amt] : ans.cycle.entries) {
      f_[e] += eta * amt;
      if (!contracted_[e]) {
        cost_ += g_.edge(e).cost * eta * amt;
        acc_[e] += g_.edge(e).length * std::fabs(eta * amt);
      }
    }
    phi_ += dphi;
    ++steps_;

    // E': edges whose l~-weighted flow drifted past the sync threshold
    std::size_t eprime = 0;
    bool rebuilt = false;
    double resid_now = cost_ - p_.F;
    if (resid_now <= resid_anchor_ / (1.0 + p_.eps) ||
        resid_now >= resid_anchor_ * (1.0 + p_.eps)) {
      fullRefresh();
      rebuilt = true;
      eprime = live_.size();
    } else {
      for (const auto& [e, amt] : ans.cycle.entries) {
        (void)amt;
        if (!contracted_[e] && acc_[e] >= p_.epsSync()) {
          refreshEdge(e);
          ++eprime;
        }
      }
    }
    eprime_total_ += eprime;

    if (steps_ % 256 == 0) resyncPotential();

    last_ = {steps_, ratio, eta, phi_, -dphi, kappa_eff, cost_, eprime, rebuilt};
    if (on_step) on_step(last_);
    return Outcome::stepped;
  }

  // Steps (and, in SCC mode, contracts) until no good cycle remains or the
  // threshold is reached.
  Outcome settle(std::int64_t max_steps = 2'000'000) {
    while (true) {
      Outcome o = step();
      if (o != Outcome::stepped) return o;
      if (scc_mode_) contractSaturated();
      require(--max_steps > 0, Errc::invariant_violation, "step budget exhausted");
    }
  }

  bool thresholdReached() const { return cost_ <= p_.F + p_.feasibility_gap; }

  // --- SCC bookkeeping ---

  VertexId find(VertexId v) const {
    while (uf_[v] != v) v = uf_[v];
    return v;
  }

  // Contracts every uncontracted edge carrying at least 1/(10m) flow.
  void contractSaturated() {
    for (EdgeId e : g_.liveEdges())
      if (!contracted_[e] && f_[e] >= 0.1 / double(p_.m)) contract(e);
  }

  // Contract the endpoints of e. When e joins two distinct classes it stays
  // behind as a free wire (g = 0, l = 1/m^10) so later cycles can route
  // through the merged vertex; an edge internal to an existing class is
  // redundant (the class is already wired) and is removed outright. Either
  // way its cost and barrier leave the potential, raising it by at most 5.
  void contract(EdgeId e) {
    require(!contracted_[e], Errc::invariant_violation, "double contraction");
    const EdgeRec& r = g_.edge(e);
    double phi_before = phi_;
    double resid_old = cost_ - p_.F;
    cost_ -= r.cost * f_[e];
    double resid_new = cost_ - p_.F;
    phi_ += 20.0 * double(p_.m) * std::log1p((resid_new - resid_old) / resid_old);
    phi_ -= ipmBarrier(f_[e], r.capacity, p_);
    last_contract_increase_ = phi_ - phi_before;
    contracted_[e] = true;
    if (find(r.tail) == find(r.head)) {
      g_.deleteEdge(e);
    } else {
      unite(r.tail, r.head);
      g_.setGradient(e, 0.0);
      g_.setLength(e, std::pow(double(p_.m), -10.0));
    }
  }

  // --- accessors / instrumentation ---

  const DynGraph& graph() const { return g_; }
  const IpmParams& params() const { return p_; }
  double flow(EdgeId e) const { return f_[e]; }
  double flowCost() const { return cost_; }
  double phi() const { return phi_; }
  double residualAnchor() const { return resid_anchor_; }
  std::int64_t stepCount() const { return steps_; }
  std::size_t rebuildCount() const { return rebuilds_; }
  std::size_t eprimeTotal() const { return eprime_total_; }
  double lastInsertIncrease() const { return last_insert_increase_; }
  double lastContractIncrease() const { return last_contract_increase_; }
  bool isContracted(EdgeId e) const { return contracted_[e]; }
  const IpmStepInfo& lastStep() const { return last_; }

  // Full recompute of the potential from the maintained flow (spec op).
  double potential() const {
    return ipmPotential(
        g_, [&](EdgeId e) { return f_[e]; }, p_, &contracted_);
  }

  // Exact (l, g) of one edge at the current flow and residual (spec op).
  std::pair<double, double> lengthGradient(EdgeId e) const {
    const EdgeRec& r = g_.edge(e);
    return ipmLengthGradient(f_[e], r.capacity, r.cost, cost_ - p_.F, p_);
  }

  std::function<void(const IpmStepInfo&)> on_step;

 private:
  void grow(EdgeId e) {
    if (std::size_t(e) >= f_.size()) {
      f_.resize(e + 1, 0.0);
      acc_.resize(e + 1, 0.0);
      fbar_.resize(e + 1, 0.0);
      contracted_.resize(e + 1, false);
    }
    live_.push_back(e);
  }

  void unite(VertexId a, VertexId b) {
    a = find(a);
    b = find(b);
    if (a != b) uf_[std::max(a, b)] = std::min(a, b);
  }

  // l~/v refresh of one edge from the current flow (fbar snaps to f).
  void refreshEdge(EdgeId e) {
    if (contracted_[e]) return;
    fbar_[e] = f_[e];
    acc_[e] = 0.0;
    const EdgeRec& r = g_.edge(e);
    double sf = f_[e] + p_.delta, su = r.capacity - f_[e];
    require(sf > 0.0 && su > 0.0, Errc::boundary_contact, "refresh at boundary");
    g_.setLength(e, 1.0 / sf + 1.0 / su);
    g_.setGradient(e, ipmAnchoredGradient(f_[e], r.capacity, r.cost, resid_anchor_, p_));
  }

  void fullRefresh() {
    resid_anchor_ = cost_ - p_.F;
    for (EdgeId e : g_.liveEdges())
      if (!contracted_[e]) refreshEdge(e);
    ++rebuilds_;
  }

  // Numerically stable Phi(f + eta*cycle) - Phi(f): log1p on the residual
  // term, expm1 on each touched barrier term.
  double potentialDelta(const Circulation& cyc, double c_dot, double eta) const {
    double resid = cost_ - p_.F;
    double d = 20.0 * double(p_.m) * std::log1p(eta * c_dot / resid);
    for (const auto& [e, amt] : cyc.entries) {
      if (contracted_[e]) continue;
      const EdgeRec& r = g_.edge(e);
      double sf = f_[e] + p_.delta, su = r.capacity - f_[e];
      double step = eta * amt;
      d += std::pow(sf, -p_.alpha) * std::expm1(-p_.alpha * std::log1p(step / sf));
      d += std::pow(su, -p_.alpha) * std::expm1(-p_.alpha * std::log1p(-step / su));
    }
    return d;
  }

  // Candidate step sizes: the progress-lemma step (guaranteeing the kappa^2/500
  // decrease), Algorithm-style |g~ eta D| = Gamma, a log-spaced sweep of the
  // feasible segment, and a golden-section refinement around the sweep's best.
  double chooseStep(const Circulation& cyc, double g_dot, double c_dot, double kappa_eff,
                    double eta_max) const {
    std::vector<double> cands;
    double eta_lemma = (kappa_eff * kappa_eff / 50.0) / (-g_dot);
    double eta_gamma = p_.Gamma / (-g_dot);
    cands.push_back(std::min(eta_lemma, eta_max));
    cands.push_back(std::min(eta_gamma, eta_max));
    for (int i = 0; i <= 24; ++i)
      cands.push_back(eta_max * std::pow(10.0, -0.25 * double(24 - i)));

    double best_eta = cands[0];
    double best = std::numeric_limits<double>::infinity();
    for (double eta : cands) {
      if (eta <= 0.0 || eta > eta_max) continue;
      double v = potentialDelta(cyc, c_dot, eta);
      if (v < best) {
        best = v;
        best_eta = eta;
      }
    }
    // golden-section refinement around the best candidate
    double lo = best_eta / 10.0, hi = std::min(best_eta * 10.0, eta_max);
    const double gr = 0.618033988749895;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = potentialDelta(cyc, c_dot, x1), f2 = potentialDelta(cyc, c_dot, x2);
    for (int it = 0; it < 40; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = potentialDelta(cyc, c_dot, x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = potentialDelta(cyc, c_dot, x2);
      }
    }
    double refined = f1 < f2 ? x1 : x2;
    if (potentialDelta(cyc, c_dot, refined) < best) best_eta = refined;
    return best_eta;
  }

  void resyncPotential() {
    double exact = potential();
    require(std::fabs(exact - phi_) <= 1e-6 * (1.0 + std::fabs(exact)),
            Errc::invariant_violation, "potential tracking drifted");
    phi_ = exact;
  }

  IpmParams p_;
  IpmOracle oracle_;
  bool scc_mode_;

  DynGraph g_;  // working graph: length/gradient fields hold l~, g~
  std::vector<double> f_, fbar_, acc_;
  std::vector<bool> contracted_;
  std::vector<EdgeId> live_;
  std::vector<VertexId> uf_;

  double cost_ = 0.0;
  double phi_ = 0.0;
  double resid_anchor_ = 0.0;
  std::int64_t steps_ = 0;
  std::size_t rebuilds_ = 0;
  std::size_t eprime_total_ = 0;
  double last_insert_increase_ = 0.0;
  double last_contract_increase_ = 0.0;
  IpmStepInfo last_;
};

// ---------- rounding to an exact integral circulation ----------

// Rounds an almost-feasible interior circulation (f in (-delta, u), delta
// tiny) to an integral one in [0, u] without a material cost increase.
//
// The slightly-negative flows are clamped to zero first; the conservation
// error this introduces is below m*delta < 1 and gets absorbed when the final
// values snap to integers (the exact integer verification at the end is the
// gate). The main loop is classic fractional cycle canceling: with all flows
// in [0, u], both traversal directions of a fractional edge are available, so
// every cancel runs in a cost-non-increasing direction and makes at least one
// edge integral.
inline std::map<EdgeId, long long> roundToExact(const DynGraph& g, std::vector<double> f,
                                                double tol = 1e-6) {
  auto edges = g.liveEdges();
  for (EdgeId e : edges) {
    require(f[e] > -0.5 && f[e] < g.edge(e).capacity + 0.5, Errc::rounding_failed,
            "input flow far outside bounds");
    if (f[e] < 0.0) f[e] = 0.0;
  }

  auto fractional = [&](EdgeId e) { return std::fabs(f[e] - std::round(f[e])) > tol; };

  // self-loops round independently in their cost-non-increasing direction
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    if (r.tail == r.head && fractional(e)) {
      f[e] = r.cost >= 0.0 ? std::floor(f[e]) : std::min(std::ceil(f[e]), r.capacity);
    }
  }

  // phase 1
  std::size_t guard = 2 * edges.size() + 8;
  while (guard-- > 0) {
    std::map<VertexId, std::vector<EdgeId>> inc;
    bool any = false;
    for (EdgeId e : edges) {
      if (!fractional(e)) continue;
      any = true;
      inc[g.edge(e).tail].push_back(e);
      inc[g.edge(e).head].push_back(e);
    }
    if (!any) break;

    // walk the fractional support without immediately re-using an edge;
    // conservation gives a second fractional edge at every entered vertex up
    // to accumulated noise, and a stuck walk means the entering deviation is
    // that noise: snap it and try again (the final integer check is the gate)
    VertexId start = inc.begin()->first;
    VertexId at = start;
    EdgeId came = kNoEdge;
    std::map<VertexId, int> seen;
    std::vector<std::pair<EdgeId, int>> steps;  // dir = +1 when walked tail->head
    bool snapped = false;
    while (!seen.count(at)) {
      seen[at] = int(steps.size());
      EdgeId next = kNoEdge;
      for (EdgeId e : inc[at]) {
        if (e != came) {
          next = e;
          break;
        }
      }
      if (next == kNoEdge) {
        require(came != kNoEdge && std::fabs(f[came] - std::round(f[came])) <= 1e-3,
                Errc::rounding_failed, "fractional support dead end beyond noise level");
        f[came] = std::round(f[came]);
        snapped = true;
        break;
      }
      const EdgeRec& r = g.edge(next);
      int dir = r.tail == at ? +1 : -1;
      steps.push_back({next, dir});
      at = dir > 0 ? r.head : r.tail;
      came = next;
    }
    if (snapped) continue;
    std::vector<std::pair<EdgeId, int>> cyc(steps.begin() + seen[at], steps.end());

    double cyc_cost = 0.0;
    for (auto [e, dir] : cyc) cyc_cost += dir * g.edge(e).cost;
    if (cyc_cost > 0.0)
      for (auto& [e, dir] : cyc) dir = -dir;

    double lam = std::numeric_limits<double>::infinity();
    for (auto [e, dir] : cyc) {
      double v = f[e];
      lam = std::min(lam, dir > 0 ? std::ceil(v - tol) - v : v - std::floor(v + tol));
    }
    require(lam > 0.0, Errc::rounding_failed, "stuck rounding push");
    for (auto [e, dir] : cyc) {
      f[e] += dir * lam;
      if (std::fabs(f[e] - std::round(f[e])) <= tol) f[e] = std::round(f[e]);
    }
  }
  require(guard > 0, Errc::rounding_failed, "rounding did not terminate");

  std::map<EdgeId, long long> out;
  std::map<VertexId, long long> net;
  for (EdgeId e : edges) {
    const EdgeRec& r = g.edge(e);
    long long v = (long long)std::llround(f[e]);
    require(std::fabs(f[e] - double(v)) <= tol, Errc::rounding_failed, "non-integral result");
    require(v >= 0 && double(v) <= r.capacity + 0.5, Errc::rounding_failed,
            "rounded flow violates bounds");
    out[e] = v;
    net[r.tail] -= v;
    net[r.head] += v;
  }
  for (auto& [v, x] : net)
    require(x == 0, Errc::rounding_failed, "rounded flow is not a circulation");
  return out;
}

inline long long roundedCost(const DynGraph& g, const std::map<EdgeId, long long>& f) {
  long long c = 0;
  for (const auto& [e, v] : f) c += (long long)std::llround(g.edge(e).cost) * v;
  return c;
}

}  // namespace mrf
