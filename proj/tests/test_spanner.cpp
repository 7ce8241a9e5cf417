#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <deque>
#include <random>
#include <set>

#include "helpers.hpp"
#include "mrf/spanner.hpp"

using namespace mrf;
using namespace mrf::testing;

namespace {

// exact girth of the (unweighted) hat layer via BFS from every vertex
double hatGirth(const IncrementalSpanner& sp, int layer) {
  const auto& adj = sp.hatAdjacency(layer);
  double girth = std::numeric_limits<double>::infinity();
  for (const auto& [s, _] : adj) {
    std::map<int, int> dist{{s, 0}};
    std::map<int, int> via_edge{{s, -1}};
    std::deque<int> q{s};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      auto it = adj.find(v);
      if (it == adj.end()) continue;
      for (int eid : it->second) {
        const auto& e = sp.edges()[eid];
        int w = e.u == v ? e.v : e.u;
        if (eid == via_edge[v]) continue;
        if (dist.count(w)) {
          girth = std::min(girth, double(dist[v] + dist[w] + 1));
        } else {
          dist[w] = dist[v] + 1;
          via_edge[w] = eid;
          q.push_back(w);
        }
      }
    }
  }
  return girth;
}

void checkInvariants(const IncrementalSpanner& sp, int n) {
  // girth of every hat layer
  for (int i = 0; i < sp.layerCount(); ++i) {
    if (sp.hatAdjacency(i).empty()) continue;
    CHECK(hatGirth(sp, i) > sp.hopBound());
  }
  // per-layer size
  for (int i = 0; i < sp.layerCount(); ++i) CHECK(sp.layerEdgeCount(i) <= 9 * std::size_t(n));
  // unbroken embeddings are valid paths within the hop bound
  for (const auto& e : sp.edges()) {
    if (!e.alive || e.embedding.empty() || e.broken) continue;
    CHECK(double(e.embedding.size()) <= sp.hopBound());
    int at = e.u;
    bool ok = true;
    for (int pe : e.embedding) {
      const auto& r = sp.edges()[pe];
      if (!r.alive) {
        ok = false;
        break;
      }
      if (r.u == at) at = r.v;
      else if (r.v == at) at = r.u;
      else {
        ok = false;
        break;
      }
    }
    CHECK(ok);
    CHECK(at == e.v);
  }
}

}  // namespace

TEST_CASE("first edge is admitted to layer 0") {
  IncrementalSpanner sp(8, 4);
  auto out = sp.insert(0, 1);
  CHECK_FALSE(out.embedded);
  CHECK(out.layer == 0);
}

TEST_CASE("a parallel re-insert embeds over the 1-hop path") {
  IncrementalSpanner sp(8, 4);
  sp.insert(0, 1);
  auto out = sp.insert(0, 1);
  CHECK(out.embedded);
  CHECK(sp.edges()[1].embedding.size() == 1);
}

TEST_CASE("deleting an H edge breaks embeddings through it") {
  IncrementalSpanner sp(8, 4);
  sp.insert(0, 1);
  sp.insert(0, 1);  // embeds over edge 0
  sp.deleteEdge(0);
  CHECK(sp.edges()[1].broken);
  CHECK_THROWS_AS(sp.deleteEdge(0), Error);
}

TEST_CASE("split moving zero edges is a no-op beyond the new vertex") {
  IncrementalSpanner sp(8, 4);
  sp.insert(0, 1);
  auto before = sp.stats();
  int nv = sp.split(0, {});
  CHECK(nv == 8);
  CHECK(sp.masterOf(nv) == 0);
  CHECK(sp.stats().h_edges == before.h_edges);
  CHECK(sp.stats().split_moved == 0);
}

TEST_CASE("chord over a long cycle embeds within the hop bound") {
  int n = 32;
  IncrementalSpanner sp(n, 4);
  for (int i = 0; i < n; ++i) sp.insert(i, (i + 1) % n);
  // the closing edge of the cycle: the ring has 2log2(2n) ~ 12 hops around,
  // so distant chords are admitted, close ones embed
  auto out = sp.insert(0, 2);
  CHECK(out.embedded);
  CHECK(sp.edges().back().embedding.size() <= std::size_t(sp.hopBound()));
}

TEST_CASE("random degree-bounded streams keep every invariant") {
  Rng rng(777);
  for (int trial = 0; trial < 6; ++trial) {
    int n = randint(rng, 20, trial < 3 ? 60 : 200);
    int delta = randint(rng, 3, 8);
    IncrementalSpanner sp(n, delta);
    std::vector<std::size_t> deg(n, 0);
    std::vector<int> live;
    int inserts = 0, removals = 0;
    while (inserts < n * delta / 2) {
      int a = randint(rng, 0, n - 1), b = randint(rng, 0, n - 1);
      if (a == b) continue;
      if (deg[sp.masterOf(a)] >= std::size_t(delta) || deg[sp.masterOf(b)] >= std::size_t(delta))
        continue;
      ++deg[sp.masterOf(a)];
      ++deg[sp.masterOf(b)];
      sp.insert(a, b);
      live.push_back(inserts++);
      if (removals < n / 4 && randint(rng, 0, 5) == 0 && !live.empty()) {
        std::size_t k = randint(rng, 0, int(live.size()) - 1);
        int id = live[k];
        if (sp.edges()[id].alive) {
          deg[sp.masterOf(sp.edges()[id].u)]--;
          deg[sp.masterOf(sp.edges()[id].v)]--;
          sp.deleteEdge(id);
          ++removals;
        }
        live.erase(live.begin() + k);
      }
    }
    checkInvariants(sp, n);
    // admission layers respect the master-degree thresholds at insert time
    for (const auto& e : sp.edges()) {
      if (!e.alive || e.layer < 0) continue;
      CHECK(sp.masterDegree(e.layer, sp.masterOf(e.u)) <= 32.0 * std::pow(2.0, e.layer) + 1);
    }
  }
}

TEST_CASE("split potential: total moved edges stay within c n log n") {
  Rng rng(31415);
  int n = 120, delta = 6;
  IncrementalSpanner sp(n, delta);
  std::vector<std::pair<int, int>> live;
  for (int i = 0; i < n * delta / 2; ++i) {
    int a = randint(rng, 0, sp.vertexCount() - 1), b = randint(rng, 0, sp.vertexCount() - 1);
    if (a == b) continue;
    sp.insert(a, b);
    live.push_back({a, b});
  }
  int splits = 0;
  while (splits < n / 2) {
    int v = randint(rng, 0, sp.vertexCount() - 1);
    std::vector<int> moved;
    for (int id = 0; id < int(sp.edges().size()); ++id) {
      const auto& e = sp.edges()[id];
      if (e.alive && (e.u == v || e.v == v) && e.u != e.v && randint(rng, 0, 1)) moved.push_back(id);
    }
    sp.split(v, moved);
    ++splits;
  }
  double c = 40.0;
  CHECK(double(sp.stats().split_moved) <= c * n * std::log2(double(n)));
}

TEST_CASE("stretch certificate") {
  SUBCASE("H = G gives stretch 1") {
    IncrementalSpanner sp(6, 4);
    sp.insert(0, 1);
    sp.insert(1, 2);
    sp.insert(3, 4);
    CHECK(sp.stretchCertificate().gamma == doctest::Approx(1.0));
  }
  SUBCASE("embedded chords stay within 2 log2(2n) hops") {
    Rng rng(99);
    int n = 64;
    IncrementalSpanner sp(n, 6);
    for (int i = 0; i < 3 * n; ++i) {
      int a = randint(rng, 0, n - 1), b = randint(rng, 0, n - 1);
      if (a != b) sp.insert(a, b);
    }
    auto rep = sp.stretchCertificate();
    CHECK(rep.gamma <= 2.0 * std::log2(2.0 * n) + 1e-9);
  }
}

TEST_CASE("dynamic wrapper: rebuilds heal broken embeddings") {
  Rng rng(2025);
  int n = 40, delta = 5;
  DynSpanner dyn(n, delta);
  std::vector<int> ids;
  for (int i = 0; i < 2 * n; ++i) {
    int a = randint(rng, 0, n - 1), b = randint(rng, 0, n - 1);
    if (a != b) ids.push_back(dyn.insert(a, b));
  }
  std::size_t deleted = 0;
  for (int id : ids) {
    if (deleted > std::size_t(n) / 2) break;
    if (randint(rng, 0, 2) == 0) {
      dyn.deleteEdge(id);
      ++deleted;
    }
  }
  CHECK(dyn.rebuildCount() >= 2);  // initial + at least one epoch
  for (const auto& e : dyn.inner().edges()) {
    if (!e.alive) continue;
    CHECK_FALSE(e.broken);  // the last rebuild re-embedded everything live
  }
  checkInvariants(dyn.inner(), dyn.inner().vertexCount());
}
