#include "wsnsim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wsnsim/errors.hpp"
#include "wsnsim/protocols.hpp"

namespace wsnsim {

namespace {

KernelConfig kernel_config(const Scenario& s) {
  KernelConfig cfg;
  cfg.bucket_width = Duration::from_seconds(s.bucket_width_s);
  return cfg;
}

std::string_view energy_note_name(EnergyNote note) {
  switch (note) {
    case EnergyNote::kTxEnd: return "tx-end";
    case EnergyNote::kDepletionCheck: return "depletion-check";
    case EnergyNote::kDepleted: return "depleted";
  }
  return "?";
}

}  // namespace

double index_cell_size(const Scenario& s) {
  const double reach = coverage_radius(s.radio, s.radio, s.pipeline);
  const double span = std::max(s.field.width, s.field.height);
  if (!std::isfinite(reach) || reach >= span) return span;
  return std::max(reach, span / 2048.0);
}

Simulation::Simulation(const Scenario& scenario, const std::vector<Position>& positions, Owns owns)
    : scenario_(scenario),
      owns_(std::move(owns)),
      kernel_(kernel_config(scenario)),
      topology_(scenario.field, index_cell_size(scenario)),
      telemetry_(scenario.log_filter),
      channel_rng_(scenario.seed, StreamPurpose::kChannel),
      mobility_rng_(scenario.seed, StreamPurpose::kMobility) {
  if (auto bad = validate(scenario_); !bad.empty()) throw ScenarioError(bad.front());
  const Battery battery = Battery::with_capacity(scenario_.energy.capacity_j);
  for (const Position& p : positions) topology_.add_node(p, scenario_.radio, battery);
  energy_ = std::make_unique<EnergyModel>(topology_, scenario_.energy);
  radio_ = std::make_unique<Radio>(kernel_, topology_, *energy_, scenario_.pipeline);
  connectivity_ = std::make_unique<RadioConnectivity>(topology_, scenario_.pipeline, radio_->coverage());
  if (scenario_.routing == RoutingChoice::kNix)
    router_ = std::make_unique<Router>(*connectivity_, scenario_.route_cache_size);

  const std::size_t n = topology_.size();
  processes_.resize(n);
  packet_counters_.assign(n, 0);
  depletion_checks_.assign(n, std::nullopt);
  tx_until_.assign(n, SimTime::zero());
  death_reported_.assign(n, false);
  kernel_.set_handler([this](Event&& e) { handle(std::move(e)); });
}

Simulation::~Simulation() = default;

void Simulation::set_remote(Radio::Forward forward) {
  radio_->set_remote([this](NodeId node) { return owns(node); }, std::move(forward));
}

ProcessInstance* Simulation::process(NodeId node) {
  topology_.node(node);
  return processes_[node].get();
}

void Simulation::start() {
  if (started_) throw Error("simulation already started");
  started_ = true;
  const std::size_t n = topology_.size();
  if (n == 0) return;

  model_ = make_process_model(scenario_.process, scenario_);
  for (NodeId id = 0; id < n; ++id) {
    if (!owns(id)) continue;
    processes_[id] = std::make_unique<ProcessInstance>(model_, id, *this);
    topology_.node(id).process = processes_[id].get();
  }
  for (NodeId id = 0; id < n; ++id)
    if (processes_[id]) processes_[id]->start();

  if (scenario_.energy.model == EnergyModelKind::kState)
    for (NodeId id = 0; id < n; ++id)
      if (owns(id)) watch_depletion(id);

  if (scenario_.mobility.model == MobilityModel::kWaypoint) {
    WaypointParams params;
    params.vmin_mps = scenario_.mobility.vmin_mps;
    params.vmax_mps = scenario_.mobility.vmax_mps;
    params.pause = Duration::from_seconds(scenario_.mobility.pause_s);
    topology_.set_waypoint_params(params);
    for (NodeId id = 0; id < n; ++id) topology_.start_waypoint(id, mobility_rng_[id]);
    Event tick;
    tick.target = kInternal;
    tick.kind = EventKind::kMobilityUpdate;
    kernel_.schedule_from(kInternal, std::move(tick), SimTime::from_seconds(scenario_.mobility.period_s));
  }

  if (scenario_.process == "flood" && owns(scenario_.flood.origin)) {
    Event ev;
    ev.target = scenario_.flood.origin;
    ev.kind = EventKind::kInterruptDelivery;
    ev.payload = UserPayload{"originate", scenario_.flood.count};
    kernel_.schedule_from(ev.target, std::move(ev), SimTime::from_seconds(scenario_.flood.start_s));
  }
  if (scenario_.process == "unicast") {
    for (const auto& [src, dst] : scenario_.unicast.pairs) {
      if (!owns(src)) continue;
      Event ev;
      ev.target = src;
      ev.kind = EventKind::kInterruptDelivery;
      ev.payload = UserPayload{"send", dst};
      kernel_.schedule_from(src, std::move(ev), SimTime::from_seconds(scenario_.unicast.start_s));
    }
  }
}

DispatchSummary Simulation::run_until(SimTime stop) {
  if (!started_) start();
  return kernel_.run_until(stop);
}

void Simulation::finish() {
  const SimTime t = kernel_.now();
  if (scenario_.energy.model == EnergyModelKind::kNone) return;
  for (NodeId id = 0; id < topology_.size(); ++id) {
    if (!owns(id)) continue;
    if (topology_.node(id).alive) energy_->expire_if_due(id, t);
    // integral microjoules keep the sums exact whatever order partitions merge in
    telemetry_.record_scalar("energy.remaining_uj", static_cast<double>(topology_.node(id).battery.remaining_uj));
    telemetry_.record_scalar("energy.consumed_uj", static_cast<double>(energy_->debited_uj(id)));
  }
}

void Simulation::handle(Event&& event) {
  notes_.clear();
  std::string detail;
  switch (event.kind) {
    case EventKind::kPacketArrival: detail = on_arrival(event); break;
    case EventKind::kTimerExpiry: {
      const auto tag = std::get<TimerPayload>(event.payload).tag;
      detail = "tag=" + std::to_string(tag);
      deliver(event.target, Interrupt::timer(tag));
      break;
    }
    case EventKind::kInterruptDelivery: {
      const auto& user = std::get<UserPayload>(event.payload);
      detail = "name=" + user.tag + " value=" + std::to_string(user.value);
      deliver(event.target, Interrupt::user(user.tag, user.value));
      break;
    }
    case EventKind::kMobilityUpdate: detail = on_mobility(); break;
    case EventKind::kEnergySample: detail = on_energy(event); break;
    case EventKind::kUserDefined:
      if (const auto* user = std::get_if<UserPayload>(&event.payload))
        detail = "name=" + user->tag + " value=" + std::to_string(user->value);
      break;
  }
  if (!notes_.empty()) {
    detail += " | ";
    detail += notes_;
  }
  telemetry_.log_event(event, detail);
}

std::string Simulation::on_arrival(Event& event) {
  auto& arrival = std::get<ArrivalPayload>(event.payload);
  const NodeId rx = event.target;
  Packet& packet = arrival.packet;
  ReceptionOutcome out = run_pipeline(topology_.node(arrival.from), topology_.node(rx), arrival.distance_m,
                                      packet, scenario_.pipeline, channel_rng_[rx]);
  std::string_view reason = to_string(out.drop_reason);
  if (out.received && scenario_.energy.model == EnergyModelKind::kBucket) {
    try {
      energy_->debit_packet(rx, Direction::kRx, packet, kernel_.now());
    } catch (const NodeDepleted&) {
      out.received = false;
      reason = "depleted";
    }
    if (!topology_.node(rx).alive) died(rx);
  }

  std::string detail = "from=" + std::to_string(arrival.from) + " pkt=" + std::to_string(packet.id()) +
                       " rx=" + (out.received ? "1" : "0");
  if (!out.received) {
    detail += " reason=";
    detail += reason;
  }
  if (scenario_.pipeline.error_enabled) detail += " errors=" + std::to_string(out.bit_errors);

  if (out.received) {
    telemetry_.record_scalar("radio.received", 1.0);
    deliver(rx, Interrupt::arrival(std::move(packet), arrival.from));
  } else {
    telemetry_.record_scalar("radio.dropped." + std::string(reason), 1.0);
  }
  return detail;
}

std::string Simulation::on_energy(const Event& event) {
  const NodeId node = event.target;
  const EnergyNote note = std::get<EnergyPayload>(event.payload).note;
  std::string detail = "note=" + std::string(energy_note_name(note));
  switch (note) {
    case EnergyNote::kTxEnd:
      if (topology_.node(node).alive && kernel_.now() >= tx_until_[node]) {
        try {
          energy_->set_state(node, PowerState::kIdle, kernel_.now());
        } catch (const NodeDepleted&) {
          died(node);
        }
        if (topology_.node(node).alive) watch_depletion(node);
      }
      break;
    case EnergyNote::kDepletionCheck:
      depletion_checks_[node].reset();
      if (topology_.node(node).alive) {
        if (energy_->expire_if_due(node, kernel_.now()))
          died(node);
        else
          watch_depletion(node);
      }
      break;
    case EnergyNote::kDepleted: {
      const auto at = energy_->death_time(node);
      detail += " at_ns=" + std::to_string(at ? at->ticks : kernel_.now().ticks);
      telemetry_.record_scalar("energy.deaths", 1.0);
      telemetry_.record_vector("energy.death_node", kernel_.now(), static_cast<double>(node), event.id);
      deliver(node, Interrupt::energy_depleted());
      break;
    }
  }
  return detail;
}

std::string Simulation::on_mobility() {
  std::size_t moved = 0;
  const Duration period = Duration::from_seconds(scenario_.mobility.period_s);
  for (NodeId id = 0; id < topology_.size(); ++id) {
    const Position before = topology_.node(id).position;
    if (!(topology_.step_waypoint(id, period, kernel_.now(), mobility_rng_[id]) == before)) ++moved;
  }
  if (router_) router_->invalidate();
  Event tick;
  tick.target = kInternal;
  tick.kind = EventKind::kMobilityUpdate;
  kernel_.schedule(std::move(tick), kernel_.now() + period);
  return "moved=" + std::to_string(moved);
}

void Simulation::deliver(NodeId node, const Interrupt& interrupt) {
  ProcessInstance* p = processes_[node].get();
  if (!p) return;
  if (!topology_.node(node).alive && interrupt.kind != InterruptKind::kEnergyDepleted) return;
  p->deliver(interrupt);
}

void Simulation::died(NodeId node) {
  if (death_reported_[node]) return;
  death_reported_[node] = true;
  if (depletion_checks_[node]) {
    kernel_.cancel(*depletion_checks_[node]);
    depletion_checks_[node].reset();
  }
  // Delivered as its own event: the death may surface inside a process action.
  Event ev;
  ev.target = node;
  ev.kind = EventKind::kEnergySample;
  ev.payload = EnergyPayload{EnergyNote::kDepleted};
  kernel_.schedule_from(node, std::move(ev), kernel_.now());
}

void Simulation::watch_depletion(NodeId node) {
  if (depletion_checks_[node]) {
    kernel_.cancel(*depletion_checks_[node]);
    depletion_checks_[node].reset();
  }
  const auto when = energy_->predicted_death(node);
  if (!when) return;
  Event ev;
  ev.target = node;
  ev.kind = EventKind::kEnergySample;
  ev.payload = EnergyPayload{EnergyNote::kDepletionCheck};
  depletion_checks_[node] = kernel_.schedule_from(node, std::move(ev), std::max(*when, kernel_.now()));
}

EventHandle Simulation::set_timer(NodeId node, Duration delay, std::uint64_t tag) {
  Event ev;
  ev.target = node;
  ev.kind = EventKind::kTimerExpiry;
  ev.payload = TimerPayload{tag};
  return kernel_.schedule_from(node, std::move(ev), kernel_.now() + delay);
}

bool Simulation::broadcast(NodeId node, const Packet& packet) {
  NodeDescriptor& self = topology_.node(node);
  if (!self.alive) return false;
  const SimTime now = kernel_.now();
  const bool stateful = scenario_.energy.model == EnergyModelKind::kState;
  try {
    if (stateful) energy_->set_state(node, PowerState::kTx, now);
    radio_->transmit(node, packet);
  } catch (const NodeDepleted&) {
    died(node);
    return false;
  }
  telemetry_.record_scalar("radio.sent", 1.0);
  if (!self.alive) {
    died(node);
    return true;
  }
  if (stateful) {
    const SimTime end = now + transmission_delay(packet.size_bits(), self.radio.bitrate_bps);
    tx_until_[node] = std::max(tx_until_[node], end);
    Event ev;
    ev.target = node;
    ev.kind = EventKind::kEnergySample;
    ev.payload = EnergyPayload{EnergyNote::kTxEnd};
    kernel_.schedule_from(node, std::move(ev), end);
    watch_depletion(node);
  }
  return true;
}

std::uint64_t Simulation::next_packet_id(NodeId node) {
  topology_.node(node);
  return static_cast<std::uint64_t>(node) << 32 | ++packet_counters_[node];
}

std::optional<NixVector> Simulation::compute_route(NodeId src, NodeId dst) {
  if (!router_) return std::nullopt;
  // Counted per request rather than from the router's totals at the end, so
  // the figures do not depend on how many routers a partitioned run has.
  const std::uint64_t computed = router_->routes_computed();
  const std::uint64_t hits = router_->cache_hits();
  try {
    auto route = router_->compute_route(src, dst);
    if (router_->routes_computed() > computed) telemetry_.record_scalar("routing.routes_computed", 1.0);
    if (router_->cache_hits() > hits) telemetry_.record_scalar("routing.cache_hits", 1.0);
    telemetry_.record_scalar("routing.route_hops", static_cast<double>(route.hops()));
    return route;
  } catch (const NoRoute&) {
    return std::nullopt;
  }
}

NodeId Simulation::next_hop(NodeId node, NixVector& route) {
  if (!router_) throw Error("routing is disabled in this scenario");
  return router_->next_hop(node, route);
}

void Simulation::annotate(std::string_view note) {
  if (!notes_.empty()) notes_ += "; ";
  notes_ += note;
}

void Simulation::record(std::string_view probe, double value) { telemetry_.record_scalar(probe, value); }

void Simulation::record_series(std::string_view probe, double value) {
  telemetry_.record_vector(probe, kernel_.now(), value, kernel_.current_event().value_or(0));
}

}  // namespace wsnsim
