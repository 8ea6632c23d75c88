#pragma once

#include <cstddef>
#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "wsnsim/nix_vector.hpp"
#include "wsnsim/packet.hpp"
#include "wsnsim/radio_params.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

/// Directed adjacency as routing sees it. Neighbor lists are ascending.
class Connectivity {
 public:
  virtual ~Connectivity() = default;
  virtual std::size_t node_count() const = 0;
  virtual std::vector<NodeId> neighbors(NodeId node) const = 0;
  /// Changes whenever adjacency may have changed.
  virtual std::uint64_t generation() const = 0;
};

/// Explicit graph, mostly for tests and oracles.
class AdjacencyList : public Connectivity {
 public:
  explicit AdjacencyList(std::size_t n) : adj_(n) {}
  /// Adds u -> v and v -> u.
  void link(NodeId u, NodeId v);
  void bump() { ++generation_; }

  std::size_t node_count() const override { return adj_.size(); }
  std::vector<NodeId> neighbors(NodeId node) const override;
  std::uint64_t generation() const override { return generation_; }

 private:
  std::vector<std::vector<NodeId>> adj_;
  std::uint64_t generation_ = 0;
};

/// Adjacency derived from node positions: v is a neighbor of u when v can
/// receive u under the closure model and power threshold. Nothing is
/// materialized; lists are rebuilt from the spatial index on demand.
class RadioConnectivity : public Connectivity {
 public:
  RadioConnectivity(const Topology& topology, PipelineConfig cfg, double coverage_m);

  std::size_t node_count() const override { return topology_.size(); }
  std::vector<NodeId> neighbors(NodeId node) const override;
  std::uint64_t generation() const override { return topology_.generation(); }

 private:
  const Topology& topology_;
  PipelineConfig cfg_;
  double coverage_;
};

/// On-demand NIx routing with a bounded LRU route cache.
class Router {
 public:
  explicit Router(const Connectivity& graph, std::size_t cache_size = 4096);

  /// Breadth-first shortest path, ties broken towards the smallest
  /// neighbor-index sequence. Throws NoRoute.
  NixVector compute_route(NodeId src, NodeId dst);

  /// Decodes one hop at `node` and advances the route's cursor. Throws
  /// RouteExhausted, or CorruptRoute when the index is not a neighbor.
  NodeId next_hop(NodeId node, NixVector& route) const;

  /// Makes every cached route stale.
  void invalidate() { ++epoch_; }

  std::uint64_t bfs_count() const { return bfs_count_; }
  std::uint64_t routes_computed() const { return routes_computed_; }
  std::uint64_t cache_hits() const { return cache_hits_; }
  std::size_t cached() const { return index_.size(); }
  std::size_t cache_capacity() const { return capacity_; }
  /// Bytes held by cached routes and their bookkeeping. Adjacency is never
  /// stored, so this tracks active routes times path length.
  std::size_t state_bytes() const;

 private:
  struct Entry {
    std::uint64_t key;
    std::uint64_t graph_generation;
    std::uint64_t epoch;
    NixVector route;
  };

  NixVector bfs(NodeId src, NodeId dst);

  const Connectivity& graph_;
  std::size_t capacity_;
  std::list<Entry> lru_;  // front is most recent
  std::unordered_map<std::uint64_t, std::list<Entry>::iterator> index_;
  std::uint64_t epoch_ = 0;
  std::uint64_t bfs_count_ = 0;
  std::uint64_t routes_computed_ = 0;
  std::uint64_t cache_hits_ = 0;
  std::vector<NodeId> parent_;  // BFS scratch, not routing state
};

}  // namespace wsnsim
