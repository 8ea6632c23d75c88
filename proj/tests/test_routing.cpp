#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <deque>
#include <random>

#include "wsnsim/errors.hpp"
#include "wsnsim/routing.hpp"
#include "wsnsim/simulation.hpp"

using namespace wsnsim;

namespace {

// Shortest path by BFS distances from the destination, then greedy descent
// taking the lowest-index neighbor that is one step closer.
std::optional<std::vector<NodeId>> oracle_path(const std::vector<std::vector<NodeId>>& adj, NodeId src, NodeId dst) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<NodeId> q{dst};
  dist[dst] = 0;
  while (!q.empty()) {
    const NodeId u = q.front();
    q.pop_front();
    for (NodeId v = 0; v < adj.size(); ++v) {
      // reverse edge v -> u
      if (dist[v] < 0 && std::find(adj[v].begin(), adj[v].end(), u) != adj[v].end()) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  if (dist[src] < 0) return std::nullopt;
  std::vector<NodeId> path{src};
  NodeId at = src;
  while (at != dst) {
    for (NodeId v : adj[at]) {
      if (dist[v] == dist[at] - 1) {
        at = v;
        break;
      }
    }
    path.push_back(at);
  }
  return path;
}

std::vector<NodeId> walk(const Router& r, NodeId src, NixVector v) {
  std::vector<NodeId> path{src};
  while (!v.exhausted()) path.push_back(r.next_hop(path.back(), v));
  return path;
}

AdjacencyList line3() {
  AdjacencyList g(3);
  g.link(0, 1);
  g.link(1, 2);
  return g;
}

}  // namespace

TEST_CASE("route along a line") {
  AdjacencyList g = line3();
  Router r(g);
  NixVector v = r.compute_route(0, 2);
  CHECK(v.hops() == 2);
  // A has one neighbor (B, index 0, 1 bit); B has two (A, C: C is index 1, 1 bit)
  CHECK(v.bit_count() == 2);
  const auto oracle = oracle_path({{1}, {0, 2}, {1}}, 0, 2);
  CHECK(walk(r, 0, v) == *oracle);
  NixVector copy = v;
  CHECK(copy.read(1) == 0);
  CHECK(copy.read(1) == 1);
}

TEST_CASE("identity and unreachable routes") {
  AdjacencyList g(4);
  g.link(0, 1);
  g.link(2, 3);
  Router r(g);
  const auto before = r.bfs_count();
  const NixVector self = r.compute_route(1, 1);
  CHECK(self.hops() == 0);
  CHECK(self.bit_count() == 0);
  CHECK(r.bfs_count() == before);
  CHECK_THROWS_AS(r.compute_route(0, 3), NoRoute);
  CHECK_THROWS_AS(r.compute_route(0, 9), UnknownNode);
}

TEST_CASE("hop widths") {
  CHECK(nix_width(1) == 1);
  CHECK(nix_width(2) == 1);
  CHECK(nix_width(3) == 2);
  CHECK(nix_width(4) == 2);
  CHECK(nix_width(5) == 3);
  CHECK(nix_width(1024) == 10);
  CHECK(nix_width(1025) == 11);

  AdjacencyList star(5);
  for (NodeId n = 1; n < 5; ++n) star.link(0, n);
  Router r(star);
  NixVector v = r.compute_route(0, 3);
  CHECK(v.bit_count() == 2);
  const auto c = v.cursor();
  CHECK(r.next_hop(0, v) == 3);
  CHECK(v.cursor() - c == 2);

  NixVector leaf = r.compute_route(4, 0);
  CHECK(leaf.bit_count() == 1);
  CHECK(r.next_hop(4, leaf) == 0);
  CHECK_THROWS_AS(r.next_hop(0, leaf), RouteExhausted);
}

TEST_CASE("out-of-range index is a corrupt route") {
  AdjacencyList g(4);
  g.link(0, 1);
  g.link(0, 2);
  g.link(0, 3);
  Router r(g);
  NixVector two;
  two.push(3, 2);
  CHECK_THROWS_AS(r.next_hop(0, two), CorruptRoute);
  CHECK_THROWS_AS(two.push(5, 2), Error);  // does not fit in 2 bits
}

TEST_CASE("cache hits, invalidation and generation bumps") {
  AdjacencyList g = line3();
  Router r(g);
  r.compute_route(0, 2);
  CHECK(r.bfs_count() == 1);
  r.compute_route(0, 2);
  CHECK(r.bfs_count() == 1);
  CHECK(r.cache_hits() == 1);
  r.invalidate();
  r.compute_route(0, 2);
  CHECK(r.bfs_count() == 2);
  g.bump();
  r.compute_route(0, 2);
  CHECK(r.bfs_count() == 3);
  CHECK(r.routes_computed() == 3);
}

TEST_CASE("cache is a bounded LRU") {
  AdjacencyList g(10);
  for (NodeId n = 0; n + 1 < 10; ++n) g.link(n, n + 1);
  Router r(g, 3);
  r.compute_route(0, 1);
  r.compute_route(0, 2);
  r.compute_route(0, 3);
  r.compute_route(0, 1);  // refresh
  r.compute_route(0, 4);  // evicts 0->2
  CHECK(r.cached() == 3);
  const auto b = r.bfs_count();
  r.compute_route(0, 1);
  CHECK(r.bfs_count() == b);
  r.compute_route(0, 2);
  CHECK(r.bfs_count() == b + 1);
}

TEST_CASE("mobility updates force fresh routes") {
  Scenario s;
  s.field = Field{60, 60};
  s.random_nodes = 8;
  s.radio.disk_range_m = 500;
  s.routing = RoutingChoice::kNix;
  s.process = "idle";
  s.mobility.model = MobilityModel::kWaypoint;
  s.mobility.period_s = 0.1;
  Simulation sim(s, place_nodes(s));
  sim.start();
  REQUIRE(sim.router() != nullptr);
  REQUIRE(sim.compute_route(0, 5).has_value());
  sim.compute_route(0, 5);
  CHECK(sim.router()->bfs_count() == 1);
  sim.run_until(SimTime::from_seconds(0.15));
  sim.compute_route(0, 5);
  CHECK(sim.router()->bfs_count() == 2);
}

TEST_CASE("property: routes are shortest and lexicographically smallest") {
  std::mt19937_64 rng(31);
  int routed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng() % 199;
    const double p = 1.5 / static_cast<double>(n) + 0.02 * static_cast<double>(rng() % 4);
    AdjacencyList g(n);
    std::vector<std::vector<NodeId>> adj(n);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (std::uniform_real_distribution<double>(0, 1)(rng) < p) {
          g.link(u, v);
          adj[u].push_back(v);
          adj[v].push_back(u);
        }
    for (auto& a : adj) std::sort(a.begin(), a.end());
    Router r(g);
    for (int q = 0; q < 10; ++q) {
      const auto src = static_cast<NodeId>(rng() % n);
      const auto dst = static_cast<NodeId>(rng() % n);
      const auto expected = oracle_path(adj, src, dst);
      if (!expected) {
        REQUIRE_THROWS_AS(r.compute_route(src, dst), NoRoute);
        continue;
      }
      NixVector v = r.compute_route(src, dst);
      REQUIRE(v.hops() == expected->size() - 1);
      const auto path = walk(r, src, v);
      REQUIRE(path == *expected);
      REQUIRE(path.back() == dst);
      ++routed;
    }
  }
  CHECK(routed > 300);
}

TEST_CASE("property: encode(decode(v)) == v") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 500; ++trial) {
    NixVector v;
    std::vector<unsigned> widths;
    const int hops = static_cast<int>(rng() % 80);
    for (int h = 0; h < hops; ++h) {
      const unsigned w = 1 + static_cast<unsigned>(rng() % 20);
      widths.push_back(w);
      v.push(static_cast<std::uint32_t>(rng() & ((1u << w) - 1)), w);
    }
    NixVector decoded = v;
    NixVector rebuilt;
    for (unsigned w : widths) rebuilt.push(decoded.read(w), w);
    REQUIRE(decoded.exhausted());
    REQUIRE(rebuilt.bit_count() == v.bit_count());
    REQUIRE(rebuilt.hops() == v.hops());
    decoded.rewind();
    REQUIRE(rebuilt == decoded);
  }
}

TEST_CASE("routing state grows with routes, not with the square of the node count") {
  // Square grids, fixed workload of 64 routes between random corners.
  auto bytes_for = [](std::size_t side) {
    const std::size_t n = side * side;
    AdjacencyList g(n);
    for (std::size_t r = 0; r < side; ++r)
      for (std::size_t c = 0; c < side; ++c) {
        const auto id = static_cast<NodeId>(r * side + c);
        if (c + 1 < side) g.link(id, id + 1);
        if (r + 1 < side) g.link(id, static_cast<NodeId>(id + side));
      }
    Router router(g);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 64; ++i) router.compute_route(static_cast<NodeId>(rng() % n), static_cast<NodeId>(rng() % n));
    return static_cast<double>(router.state_bytes());
  };
  const double small = bytes_for(10);   // n = 100
  const double large = bytes_for(80);   // n = 6400
  MESSAGE("state bytes n=100: " << small << ", n=6400: " << large);
  CHECK(large / small < 64.0);          // strictly sublinear in n
  CHECK(large < 6400.0 * 6400.0 / 8);   // nowhere near an n^2 bit table
}

TEST_CASE("radio connectivity follows receivability") {
  Topology t(Field{1000, 10}, 100);
  RadioParams p;
  p.disk_range_m = 100;
  for (double x : {0.0, 90.0, 180.0, 400.0}) t.add_node({x, 0, 0}, p, Battery::with_capacity(1));
  RadioConnectivity rc(t, PipelineConfig{}, 100);
  CHECK(rc.neighbors(0) == std::vector<NodeId>{1});
  CHECK(rc.neighbors(1) == std::vector<NodeId>{0, 2});
  CHECK(rc.neighbors(3).empty());
  Router r(rc);
  CHECK(r.compute_route(0, 2).hops() == 2);
  CHECK_THROWS_AS(r.compute_route(0, 3), NoRoute);
  t.move_node(3, {250, 0, 0});
  CHECK(r.compute_route(0, 3).hops() == 3);
}
