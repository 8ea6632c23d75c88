#pragma once

#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <vector>

#include "wsnsim/kernel.hpp"
#include "wsnsim/scenario.hpp"
#include "wsnsim/simulation.hpp"
#include "wsnsim/telemetry.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

struct RemoteLink {
  NodeId local = 0;
  NodeId remote = 0;
  std::uint32_t remote_partition = 0;
  Duration latency;

  friend bool operator==(const RemoteLink&, const RemoteLink&) = default;
};

struct Partition {
  std::uint32_t id = 0;
  std::vector<NodeId> owned;  // ascending
  std::vector<RemoteLink> remote_links;
};

struct RemoteMessage {
  std::uint32_t from_partition = 0;
  SimTime receive_time;
  NodeId target = 0;
  Event event;  // a packet arrival stamped with its final id and time
};

/// k strips along x with equal node counts (ties broken by id). A remote
/// link joins every pair within `link_radius` that straddles two strips;
/// its latency is `min_tx_delay` plus the propagation delay.
std::vector<Partition> partition_topology(const Topology& topology, std::size_t k, double link_radius,
                                          Duration min_tx_delay);

/// Smallest remote-link latency; empty when nothing crosses a boundary.
/// Throws ZeroLookahead if some link has zero latency.
std::optional<Duration> lookahead_of(const std::vector<Partition>& partitions);

struct PartitionReport {
  std::uint64_t events = 0;
  std::size_t peak_pending = 0;
  std::uint64_t remote_sent = 0;
  /// Share of the worker's wall time spent waiting at barriers.
  double blocked_fraction = 0.0;
};

struct FederatedResult {
  Telemetry telemetry;
  std::vector<PartitionReport> partitions;
  std::uint64_t events = 0;
  std::uint64_t rounds = 0;
  std::optional<Duration> lookahead;
  double wall_seconds = 0.0;
};

/// Conservative parallel run: one worker thread and kernel per partition,
/// advancing in rounds. Each round every worker votes its next event time;
/// with H the smallest vote, all may then run through H + lookahead - 1 ns,
/// since nothing sent in the round can arrive before H + lookahead.
class Federation {
 public:
  /// Partition count comes from the scenario.
  Federation(const Scenario& scenario, const std::vector<Position>& positions);
  ~Federation();

  std::size_t size() const { return partitions_.size(); }
  const std::vector<Partition>& partitions() const { return partitions_; }
  std::uint32_t owner(NodeId node) const;
  std::optional<Duration> lookahead() const { return lookahead_; }
  Simulation& simulation(std::uint32_t partition);

  /// Queues a message for `partition`. Throws UnknownPartition when the
  /// partition does not exist or does not own the target node.
  void send_remote(std::uint32_t partition, RemoteMessage message);
  /// Hands queued messages to the partition's kernel; returns how many.
  /// Throws CausalityViolation for a message already in the past.
  std::size_t deliver_inbound(std::uint32_t partition);

  FederatedResult run(SimTime stop);

 private:
  Scenario scenario_;
  std::vector<Partition> partitions_;
  std::vector<std::uint32_t> owner_;
  std::optional<Duration> lookahead_;
  std::vector<std::unique_ptr<Simulation>> sims_;
  std::vector<std::vector<std::vector<RemoteMessage>>> outbox_;  // [from][to]
  std::vector<std::uint64_t> remote_sent_;
};

}  // namespace wsnsim
