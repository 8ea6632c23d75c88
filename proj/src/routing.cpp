#include "wsnsim/routing.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "wsnsim/errors.hpp"
#include "wsnsim/radio.hpp"

namespace wsnsim {

void AdjacencyList::link(NodeId u, NodeId v) {
  if (u >= adj_.size()) throw UnknownNode(u);
  if (v >= adj_.size()) throw UnknownNode(v);
  auto add = [](std::vector<NodeId>& list, NodeId x) {
    auto it = std::lower_bound(list.begin(), list.end(), x);
    if (it == list.end() || *it != x) list.insert(it, x);
  };
  add(adj_[u], v);
  add(adj_[v], u);
  ++generation_;
}

std::vector<NodeId> AdjacencyList::neighbors(NodeId node) const {
  if (node >= adj_.size()) throw UnknownNode(node);
  return adj_[node];
}

RadioConnectivity::RadioConnectivity(const Topology& topology, PipelineConfig cfg, double coverage_m)
    : topology_(topology), cfg_(cfg), coverage_(coverage_m) {}

std::vector<NodeId> RadioConnectivity::neighbors(NodeId node) const {
  std::vector<NodeId> out = topology_.neighbors_within(node, coverage_);
  const NodeDescriptor& tx = topology_.node(node);
  std::erase_if(out, [&](NodeId v) {
    const NodeDescriptor& rx = topology_.node(v);
    return !receivable(tx, rx, euclidean(tx.position, rx.position), cfg_);
  });
  return out;
}

Router::Router(const Connectivity& graph, std::size_t cache_size) : graph_(graph), capacity_(cache_size) {}

NixVector Router::compute_route(NodeId src, NodeId dst) {
  const std::size_t n = graph_.node_count();
  if (src >= n) throw UnknownNode(src);
  if (dst >= n) throw UnknownNode(dst);
  if (src == dst) return NixVector{};

  const std::uint64_t key = static_cast<std::uint64_t>(src) << 32 | dst;
  const std::uint64_t gen = graph_.generation();
  if (auto it = index_.find(key); it != index_.end()) {
    auto entry = it->second;
    if (entry->graph_generation == gen && entry->epoch == epoch_) {
      ++cache_hits_;
      lru_.splice(lru_.begin(), lru_, entry);
      NixVector route = entry->route;
      route.rewind();
      return route;
    }
    lru_.erase(entry);
    index_.erase(it);
  }

  NixVector route = bfs(src, dst);
  ++routes_computed_;
  if (capacity_ > 0) {
    if (index_.size() >= capacity_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
    }
    lru_.push_front({key, gen, epoch_, route});
    index_[key] = lru_.begin();
  }
  return route;
}

NixVector Router::bfs(NodeId src, NodeId dst) {
  ++bfs_count_;
  constexpr NodeId kUnseen = kBroadcast;
  parent_.assign(graph_.node_count(), kUnseen);
  parent_[src] = src;
  std::deque<NodeId> frontier{src};
  bool found = false;
  while (!frontier.empty() && !found) {
    const NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : graph_.neighbors(u)) {
      if (parent_[v] != kUnseen) continue;
      parent_[v] = u;
      if (v == dst) {
        found = true;
        break;
      }
      frontier.push_back(v);
    }
  }
  if (!found) throw NoRoute(src, dst);

  std::vector<NodeId> path{dst};
  while (path.back() != src) path.push_back(parent_[path.back()]);
  std::reverse(path.begin(), path.end());

  NixVector route;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const std::vector<NodeId> nbrs = graph_.neighbors(path[i]);
    const auto pos = std::lower_bound(nbrs.begin(), nbrs.end(), path[i + 1]);
    route.push(static_cast<std::uint32_t>(pos - nbrs.begin()), nix_width(nbrs.size()));
  }
  return route;
}

NodeId Router::next_hop(NodeId node, NixVector& route) const {
  if (route.exhausted()) throw RouteExhausted();
  const std::vector<NodeId> nbrs = graph_.neighbors(node);
  const std::uint32_t index = route.read(nix_width(nbrs.size()));
  if (index >= nbrs.size())
    throw CorruptRoute("nix index " + std::to_string(index) + " at node " + std::to_string(node) +
                       " with degree " + std::to_string(nbrs.size()));
  return nbrs[index];
}

std::size_t Router::state_bytes() const {
  // list node (two links + entry) plus one hash bucket slot per route
  constexpr std::size_t per_entry = sizeof(Entry) + 2 * sizeof(void*) + sizeof(void*) +
                                    sizeof(std::pair<const std::uint64_t, std::list<Entry>::iterator>);
  std::size_t total = 0;
  for (const Entry& e : lru_) total += per_entry + e.route.byte_size();
  return total;
}

}  // namespace wsnsim
