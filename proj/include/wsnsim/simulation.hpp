#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wsnsim/energy.hpp"
#include "wsnsim/kernel.hpp"
#include "wsnsim/process.hpp"
#include "wsnsim/radio.hpp"
#include "wsnsim/routing.hpp"
#include "wsnsim/scenario.hpp"
#include "wsnsim/telemetry.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

/// One kernel's worth of simulation: the full topology, and processes for
/// the nodes it owns. A monolithic run owns every node; a federated
/// partition owns a strip and forwards arrivals for the rest.
class Simulation : public ProcessServices {
 public:
  using Owns = std::function<bool(NodeId)>;

  Simulation(const Scenario& scenario, const std::vector<Position>& positions, Owns owns = {});
  ~Simulation() override;
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Routes packet arrivals for nodes this simulation does not own.
  void set_remote(Radio::Forward forward);

  /// Instantiates processes and schedules the scenario's traffic.
  void start();
  DispatchSummary run_until(SimTime stop);
  /// Settles energy up to the current clock and records end-of-run probes.
  void finish();

  bool owns(NodeId node) const { return !owns_ || owns_(node); }
  const Scenario& scenario() const { return scenario_; }
  Kernel& kernel() { return kernel_; }
  Topology& topology() { return topology_; }
  EnergyModel& energy() { return *energy_; }
  Radio& radio() { return *radio_; }
  Router* router() { return router_.get(); }
  Telemetry& telemetry() { return telemetry_; }
  ProcessInstance* process(NodeId node);

  // ProcessServices
  SimTime now() const override { return kernel_.now(); }
  EventHandle set_timer(NodeId node, Duration delay, std::uint64_t tag) override;
  bool cancel_timer(EventHandle handle) override { return kernel_.cancel(handle); }
  bool broadcast(NodeId node, const Packet& packet) override;
  std::uint64_t next_packet_id(NodeId node) override;
  std::optional<NixVector> compute_route(NodeId src, NodeId dst) override;
  NodeId next_hop(NodeId node, NixVector& route) override;
  void annotate(std::string_view note) override;
  void record(std::string_view probe, double value) override;
  void record_series(std::string_view probe, double value) override;

 private:
  void handle(Event&& event);
  std::string on_arrival(Event& event);
  std::string on_energy(const Event& event);
  std::string on_mobility();
  void deliver(NodeId node, const Interrupt& interrupt);
  void died(NodeId node);
  void watch_depletion(NodeId node);

  Scenario scenario_;
  Owns owns_;
  Kernel kernel_;
  Topology topology_;
  std::unique_ptr<EnergyModel> energy_;
  std::unique_ptr<Radio> radio_;
  std::unique_ptr<RadioConnectivity> connectivity_;
  std::unique_ptr<Router> router_;
  Telemetry telemetry_;
  std::shared_ptr<const ProcessModel> model_;
  std::vector<std::unique_ptr<ProcessInstance>> processes_;
  RngStreams channel_rng_;
  RngStreams mobility_rng_;
  std::vector<std::uint32_t> packet_counters_;
  std::vector<std::optional<EventHandle>> depletion_checks_;
  std::vector<SimTime> tx_until_;
  std::vector<bool> death_reported_;
  std::string notes_;
  bool started_ = false;
};

/// Grid cell size for a scenario's spatial index.
double index_cell_size(const Scenario& scenario);

}  // namespace wsnsim
