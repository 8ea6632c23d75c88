#include "wsnsim/federation.hpp"

#include <algorithm>
#include <barrier>
#include <chrono>
#include <limits>
#include <numeric>
#include <thread>

#include "wsnsim/errors.hpp"
#include "wsnsim/radio.hpp"

namespace wsnsim {

std::vector<Partition> partition_topology(const Topology& topology, std::size_t k, double link_radius,
                                          Duration min_tx_delay) {
  const std::size_t n = topology.size();
  if (k == 0 || k > n)
    throw TooManyPartitions("cannot cut " + std::to_string(n) + " nodes into " + std::to_string(k) + " partitions");

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const double xa = topology.node(a).position.x;
    const double xb = topology.node(b).position.x;
    return xa != xb ? xa < xb : a < b;
  });

  std::vector<Partition> parts(k);
  std::vector<std::uint32_t> owner(n);
  for (std::size_t p = 0; p < k; ++p) {
    parts[p].id = static_cast<std::uint32_t>(p);
    for (std::size_t i = p * n / k; i < (p + 1) * n / k; ++i) {
      parts[p].owned.push_back(order[i]);
      owner[order[i]] = static_cast<std::uint32_t>(p);
    }
    std::sort(parts[p].owned.begin(), parts[p].owned.end());
  }
  if (k == 1) return parts;

  for (Partition& part : parts) {
    for (NodeId u : part.owned) {
      for (NodeId v : topology.neighbors_within(u, link_radius)) {
        if (owner[v] == part.id) continue;
        part.remote_links.push_back(
            {u, v, owner[v], min_tx_delay + propagation_delay(topology.distance(u, v))});
      }
    }
  }
  return parts;
}

std::optional<Duration> lookahead_of(const std::vector<Partition>& partitions) {
  std::optional<Duration> best;
  for (const Partition& p : partitions) {
    for (const RemoteLink& link : p.remote_links) {
      if (link.latency.ns == 0)
        throw ZeroLookahead("remote link " + std::to_string(link.local) + "-" + std::to_string(link.remote) +
                            " has zero latency");
      if (!best || link.latency < *best) best = link.latency;
    }
  }
  return best;
}

Federation::Federation(const Scenario& scenario, const std::vector<Position>& positions) : scenario_(scenario) {
  if (auto bad = validate(scenario_); !bad.empty()) throw ScenarioError(bad.front());
  const std::size_t k = scenario_.partitions;
  if (k > positions.size())
    throw TooManyPartitions(std::to_string(k) + " partitions for " + std::to_string(positions.size()) + " nodes");

  // A throwaway copy of the topology decides the cut.
  Topology layout(scenario_.field, index_cell_size(scenario_));
  const Battery battery = Battery::with_capacity(scenario_.energy.capacity_j);
  for (const Position& p : positions) layout.add_node(p, scenario_.radio, battery);
  const double reach = coverage_radius(scenario_.radio, scenario_.radio, scenario_.pipeline);
  const Duration min_tx = transmission_delay(scenario_.packet.size_bits(), scenario_.radio.bitrate_bps);
  partitions_ = partition_topology(layout, k, reach, min_tx);
  lookahead_ = lookahead_of(partitions_);

  owner_.assign(positions.size(), 0);
  for (const Partition& p : partitions_)
    for (NodeId id : p.owned) owner_[id] = p.id;

  outbox_.assign(k, std::vector<std::vector<RemoteMessage>>(k));
  remote_sent_.assign(k, 0);
  for (std::uint32_t p = 0; p < k; ++p) {
    sims_.push_back(std::make_unique<Simulation>(scenario_, positions, [this, p](NodeId n) { return owner_[n] == p; }));
    sims_.back()->set_remote([this, p](Event&& ev) {
      Simulation& self = *sims_[p];
      if (lookahead_ && ev.time < self.kernel().now() + *lookahead_)
        throw CausalityViolation("arrival for node " + std::to_string(ev.target) + " at " +
                                 std::to_string(ev.time.ticks) + " ns undercuts the lookahead");
      RemoteMessage msg{p, ev.time, ev.target, std::move(ev)};
      const std::uint32_t to = owner(msg.target);
      ++remote_sent_[p];
      send_remote(to, std::move(msg));
    });
  }
}

Federation::~Federation() = default;

std::uint32_t Federation::owner(NodeId node) const {
  if (node >= owner_.size()) throw UnknownNode(node);
  return owner_[node];
}

Simulation& Federation::simulation(std::uint32_t partition) {
  if (partition >= sims_.size()) throw UnknownPartition("no partition " + std::to_string(partition));
  return *sims_[partition];
}

void Federation::send_remote(std::uint32_t partition, RemoteMessage message) {
  if (partition >= partitions_.size()) throw UnknownPartition("no partition " + std::to_string(partition));
  if (message.from_partition >= partitions_.size())
    throw UnknownPartition("no sending partition " + std::to_string(message.from_partition));
  if (message.target >= owner_.size() || owner_[message.target] != partition)
    throw UnknownPartition("partition " + std::to_string(partition) + " does not own node " +
                           std::to_string(message.target));
  message.event.time = message.receive_time;
  message.event.target = message.target;
  outbox_[message.from_partition][partition].push_back(std::move(message));
}

std::size_t Federation::deliver_inbound(std::uint32_t partition) {
  Simulation& sim = simulation(partition);
  std::size_t count = 0;
  for (auto& from : outbox_) {
    auto& queue = from[partition];
    for (RemoteMessage& msg : queue) {
      const SimTime now = sim.kernel().now();
      const auto last = sim.kernel().last_dispatch_time();
      if (msg.receive_time < now || (last && msg.receive_time < *last))
        throw CausalityViolation("partition " + std::to_string(partition) + " at " + std::to_string(now.ticks) +
                                 " ns got a message for " + std::to_string(msg.receive_time.ticks) + " ns");
      sim.kernel().inject(std::move(msg.event));
      ++count;
    }
    queue.clear();
  }
  return count;
}

FederatedResult Federation::run(SimTime stop) {
  using Clock = std::chrono::steady_clock;
  const std::size_t k = sims_.size();
  const auto wall_start = Clock::now();

  std::vector<std::optional<SimTime>> votes(k);
  std::vector<std::exception_ptr> failures(k);
  std::vector<double> blocked(k, 0.0);
  std::vector<double> busy(k, 0.0);
  std::vector<std::size_t> peak(k, 0);
  SimTime grant;
  bool done = false;
  std::uint64_t rounds = 0;
  std::uint64_t last_total = std::numeric_limits<std::uint64_t>::max();
  std::exception_ptr coordinator_failure;

  for (auto& sim : sims_) sim->start();

  auto plan = [&]() noexcept {
    if (std::any_of(failures.begin(), failures.end(), [](const auto& f) { return f != nullptr; })) {
      done = true;
      return;
    }
    std::optional<SimTime> horizon;
    for (const auto& v : votes)
      if (v && (!horizon || *v < *horizon)) horizon = *v;
    if (!horizon || *horizon > stop) {
      done = true;
      return;
    }
    std::uint64_t total = 0;
    for (auto& sim : sims_) total += sim->kernel().dispatched();
    if (total == last_total) {
      coordinator_failure = std::make_exception_ptr(
          DeadlockDetected("no partition advanced past " + std::to_string(horizon->ticks) + " ns"));
      done = true;
      return;
    }
    last_total = total;
    if (lookahead_) {
      const std::uint64_t room = lookahead_->ns - 1;
      grant = stop.ticks - horizon->ticks <= room ? stop : SimTime{horizon->ticks + room};
    } else {
      grant = stop;
    }
    ++rounds;
  };
  std::barrier plan_barrier(static_cast<std::ptrdiff_t>(k), plan);
  std::barrier step_barrier(static_cast<std::ptrdiff_t>(k));

  auto worker = [&](std::uint32_t p) {
    auto wait = [&](auto& barrier) {
      const auto t0 = Clock::now();
      barrier.arrive_and_wait();
      blocked[p] += std::chrono::duration<double>(Clock::now() - t0).count();
    };
    for (;;) {
      const auto t0 = Clock::now();
      votes[p].reset();
      if (!failures[p]) {
        try {
          deliver_inbound(p);
          votes[p] = sims_[p]->kernel().next_event_time();
        } catch (...) {
          failures[p] = std::current_exception();
        }
      }
      busy[p] += std::chrono::duration<double>(Clock::now() - t0).count();
      wait(plan_barrier);
      if (done) break;
      const auto t1 = Clock::now();
      if (!failures[p]) {
        try {
          peak[p] = std::max(peak[p], sims_[p]->run_until(grant).peak_pending);
        } catch (...) {
          failures[p] = std::current_exception();
        }
      }
      busy[p] += std::chrono::duration<double>(Clock::now() - t1).count();
      wait(step_barrier);
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(k);
  for (std::uint32_t p = 0; p < k; ++p) threads.emplace_back(worker, p);
  for (auto& t : threads) t.join();

  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);
  if (coordinator_failure) std::rethrow_exception(coordinator_failure);

  FederatedResult result;
  std::vector<const Telemetry*> parts;
  for (std::uint32_t p = 0; p < k; ++p) {
    Simulation& sim = *sims_[p];
    if (sim.kernel().now() < stop) sim.run_until(stop);
    sim.finish();
    parts.push_back(&sim.telemetry());
    PartitionReport report;
    report.events = sim.kernel().dispatched();
    report.peak_pending = peak[p];
    report.remote_sent = remote_sent_[p];
    const double total = blocked[p] + busy[p];
    report.blocked_fraction = total > 0.0 ? blocked[p] / total : 0.0;
    result.partitions.push_back(report);
    result.events += report.events;
  }
  result.telemetry = Telemetry::merge(parts);
  result.rounds = rounds;
  result.lookahead = lookahead_;
  result.wall_seconds = std::chrono::duration<double>(Clock::now() - wall_start).count();
  return result;
}

}  // namespace wsnsim
