#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "mrf/oracle.hpp"

using namespace mrf;
using namespace mrf::testing;

TEST_CASE("directed triangle, symmetric optimum") {
  DynGraph g;
  for (int i = 0; i < 3; ++i) g.insertVertex();
  g.insertEdge(0, 1, 1, 0, 1.0, -1.0);
  g.insertEdge(1, 2, 1, 0, 1.0, -1.0);
  g.insertEdge(2, 0, 1, 0, 1.0, -1.0);
  auto ans = exactMinRatio(g);
  CHECK(ans.ratio == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ans.cycle.steps.size() == 3);
  CHECK(circulationCheck(g, ans.circulation).ok);
}

TEST_CASE("two antiparallel edges") {
  DynGraph g;
  g.insertVertex();
  g.insertVertex();
  g.insertEdge(0, 1, 1, 0, 1.0, -2.0);
  g.insertEdge(1, 0, 1, 0, 1.0, 0.0);
  auto ans = exactMinRatio(g);
  CHECK(ans.ratio == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(ans.cycle.steps.size() == 2);
}

TEST_CASE("forest raises NoCycle") {
  DynGraph g;
  for (int i = 0; i < 3; ++i) g.insertVertex();
  g.insertEdge(0, 1, 1, 0, 1.0, -3.0);
  g.insertEdge(1, 2, 1, 0, 1.0, 2.0);
  CHECK_THROWS_AS(exactMinRatio(g), Error);
}

TEST_CASE("zero length rejected") {
  DynGraph g;
  g.insertVertex();
  g.insertVertex();
  g.insertEdge(0, 1, 1, 0, 0.0, 1.0);
  g.insertEdge(1, 0, 1, 0, 1.0, 1.0);
  CHECK_THROWS_AS(exactMinRatio(g), Error);
}

TEST_CASE("exact oracle equals exhaustive enumeration on random small graphs") {
  Rng rng(555);
  for (int trial = 0; trial < 200; ++trial) {
    int n = randint(rng, 2, 8);
    int m = randint(rng, n, 2 * n);
    DynGraph g = randomGradientGraph(rng, n, m, 8, 8, /*self_loops=*/trial % 5 == 0);
    double want = exhaustiveMinRatio(g);
    if (!std::isfinite(want)) {
      CHECK_THROWS_AS(exactMinRatio(g), Error);
      continue;
    }
    auto ans = exactMinRatio(g);
    CHECK(ans.ratio == doctest::Approx(want).epsilon(1e-12));
    // the reported ratio is recomputed from the circulation
    CHECK(ans.ratio ==
          doctest::Approx(gradientPairing(g, ans.circulation) /
                          weightedLength(g, ans.circulation))
              .epsilon(1e-9));
    CHECK(circulationCheck(g, ans.circulation).ok);
  }
}

TEST_CASE("hasCycleBelow agrees with the exact optimum") {
  Rng rng(77);
  for (int trial = 0; trial < 60; ++trial) {
    DynGraph g = randomGradientGraph(rng, 6, 10);
    double want = exhaustiveMinRatio(g);
    if (!std::isfinite(want)) continue;
    CHECK(hasCycleBelow(g, want + 0.25));
    CHECK_FALSE(hasCycleBelow(g, want - 0.25));
  }
}

TEST_CASE("tree cycle oracle: path tree with one off-tree edge") {
  // tree a-b-c (gradients 0, lengths 1), off edge (a, c) with g=-3, l=1
  DynGraph host;
  for (int i = 0; i < 3; ++i) host.insertVertex();
  EdgeId ab = host.insertEdge(0, 1, 1, 0, 1.0, 0.0);
  EdgeId bc = host.insertEdge(1, 2, 1, 0, 1.0, 0.0);
  EdgeId ac = host.insertEdge(0, 2, 1, 0, 1.0, -3.0);

  std::vector<FlatForest> trees(1);
  FlatForest& t = trees[0];
  NodeId na = t.addRoot(0);
  NodeId nb = t.addChild(na, 1, ab, 1.0, -0.0);
  NodeId nc = t.addChild(nb, 2, bc, 1.0, 0.0);

  std::vector<std::vector<OffTreeEdge>> off(1);
  off[0].push_back({na, nc, -3.0, 1.0, ac, +1});

  SUBCASE("negative gradient uses forward orientation") {
    TreeCycleOracle oracle(trees, off);
    auto ans = oracle.best();
    CHECK(ans.ratio == doctest::Approx(-1.0));
    CHECK(ans.sign == +1);
    Circulation c = oracle.expand(host, ans);
    CHECK(circulationCheck(host, c).ok);
    CHECK(c[ac] == doctest::Approx(1.0));
  }
  SUBCASE("positive gradient flips the orientation, same ratio") {
    off[0][0].gradient = 3.0;
    host.setGradient(ac, 3.0);
    TreeCycleOracle oracle(trees, off);
    auto ans = oracle.best();
    CHECK(ans.ratio == doctest::Approx(-1.0));
    CHECK(ans.sign == -1);
    CHECK(circulationCheck(host, oracle.expand(host, ans)).ok);
  }
}

TEST_CASE("tree cycle oracle equals brute force over (tree, edge, sign) triples") {
  Rng rng(31337);
  for (int trial = 0; trial < 60; ++trial) {
    // build a random spanning tree of a random connected host graph
    int n = randint(rng, 3, 10);
    DynGraph host;
    for (int i = 0; i < n; ++i) host.insertVertex();
    std::vector<NodeId> node_of(n);
    std::vector<FlatForest> trees(1);
    FlatForest& t = trees[0];
    node_of[0] = t.addRoot(0);
    for (int v = 1; v < n; ++v) {
      int p = randint(rng, 0, v - 1);
      double len = double(randint(rng, 1, 4));
      double grad = double(randint(rng, -4, 4));
      // host edge oriented p -> v carrying the tree attributes
      EdgeId he = host.insertEdge(p, v, 1, 0, len, grad);
      // child -> parent direction is v -> p, so the signed gradient flips
      node_of[v] = t.addChild(node_of[p], v, he, len, -grad);
    }
    std::vector<std::vector<OffTreeEdge>> off(1);
    int extra = randint(rng, 1, 6);
    for (int i = 0; i < extra; ++i) {
      int a = randint(rng, 0, n - 1), b = randint(rng, 0, n - 1);
      if (a == b) continue;
      double len = double(randint(rng, 1, 4));
      double grad = double(randint(rng, -4, 4));
      EdgeId he = host.insertEdge(a, b, 1, 0, len, grad);
      off[0].push_back({node_of[a], node_of[b], grad, len, he, +1});
    }
    if (off[0].empty()) continue;

    TreeCycleOracle oracle(trees, off);
    auto ans = oracle.best();

    // brute force over all candidates via explicit forest paths
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : off[0]) {
      double grad = e.gradient + t.pathGradient(e.b, e.a);
      double len = e.length + t.pathLength(e.b, e.a);
      best = std::min(best, std::min(grad, -grad) / len);
    }
    CHECK(ans.ratio == doctest::Approx(best).epsilon(1e-12));
    CHECK(circulationCheck(host, oracle.expand(host, ans)).ok);
  }
}

TEST_CASE("averaging bound with single-tree routing") {
  Rng rng(11);
  int holds = 0, trials = 0;
  for (int trial = 0; trial < 40; ++trial) {
    int n = randint(rng, 3, 8);
    DynGraph g = randomGradientGraph(rng, n, 2 * n);
    // spanning forest of the live graph, used as the identity-tree routing
    std::map<VertexId, std::pair<EdgeId, VertexId>> parent;
    std::set<VertexId> seen;
    for (VertexId s = 0; std::size_t(s) < g.vertexCount(); ++s) {
      if (seen.count(s)) continue;
      seen.insert(s);
      std::vector<VertexId> q{s};
      while (!q.empty()) {
        VertexId v = q.back();
        q.pop_back();
        for (EdgeId e : g.incident(v)) {
          const EdgeRec& r = g.edge(e);
          VertexId w = r.tail == v ? r.head : r.tail;
          if (seen.insert(w).second) {
            parent[w] = {e, v};
            q.push_back(w);
          }
        }
      }
    }
    auto treePathTo = [&](VertexId v, Circulation& c, double amt) {
      while (parent.count(v)) {
        auto [e, p] = parent[v];
        const EdgeRec& r = g.edge(e);
        c.add(e, r.head == v ? -amt : amt);  // walk v -> p against the entering edge
        v = p;
      }
      return v;  // root
    };
    bool connected_pairs = true;
    auto project = [&](EdgeId e) {
      const EdgeRec& r = g.edge(e);
      Circulation c;
      c.add(e, 1.0);
      Circulation up_head, up_tail;
      VertexId rh = treePathTo(r.head, up_head, 1.0);
      VertexId rt = treePathTo(r.tail, up_tail, 1.0);
      if (rh != rt) connected_pairs = false;
      c += up_head;           // head -> root
      c += up_tail.scaled(-1.0);  // root -> tail
      return c;
    };
    auto colnorm = [&](EdgeId e) {
      Circulation c = project(e);
      return weightedLength(g, c);
    };
    bool has_cycle = std::isfinite(exhaustiveMinRatio(g));
    if (!has_cycle) continue;
    auto rep = averagingBoundCheck(g, project, colnorm);
    if (!connected_pairs) continue;
    ++trials;
    if (rep.holds) ++holds;
    CHECK(rep.holds);
  }
  CHECK(trials > 0);
  CHECK(holds == trials);
}
