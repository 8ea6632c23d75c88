#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnsim/energy.hpp"
#include "wsnsim/radio_params.hpp"
#include "wsnsim/sim_time.hpp"
#include "wsnsim/telemetry.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

enum class RoutingChoice : std::uint8_t { kNone, kNix };
enum class MobilityModel : std::uint8_t { kNone, kWaypoint };

struct MobilitySpec {
  MobilityModel model = MobilityModel::kNone;
  double vmin_mps = 1.0;
  double vmax_mps = 1.0;
  double pause_s = 0.0;
  double period_s = 0.1;

  friend bool operator==(const MobilitySpec&, const MobilitySpec&) = default;
};

struct FloodSpec {
  NodeId origin = 0;
  double start_s = 0.0;
  double interval_s = 1.0;
  std::uint64_t count = 1;

  friend bool operator==(const FloodSpec&, const FloodSpec&) = default;
};

struct UnicastSpec {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  double start_s = 0.0;

  friend bool operator==(const UnicastSpec&, const UnicastSpec&) = default;
};

struct PacketSpec {
  std::uint32_t payload_bits = 512;
  std::uint32_t header_bits = 64;

  std::uint64_t size_bits() const { return std::uint64_t{payload_bits} + header_bits; }

  friend bool operator==(const PacketSpec&, const PacketSpec&) = default;
};

/// A topology plus global attributes: one reproducible run.
struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 1;
  SimTime stop = SimTime::from_ns(10'000'000'000ULL);
  Field field;
  std::vector<Position> nodes;  // explicit placements, ids 0..n-1
  std::uint64_t random_nodes = 0;  // appended after the explicit ones
  RadioParams radio;
  PipelineConfig pipeline;
  EnergyConfig energy;
  RoutingChoice routing = RoutingChoice::kNone;
  std::uint64_t route_cache_size = 4096;
  std::string process = "flood";
  MobilitySpec mobility;
  FloodSpec flood;
  UnicastSpec unicast;
  PacketSpec packet;
  LogFilter log_filter = LogFilter::all();
  std::uint32_t partitions = 1;
  double bucket_width_s = 1e-3;

  std::uint64_t node_count() const { return nodes.size() + random_nodes; }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ParseResult {
  std::optional<Scenario> scenario;
  /// "line N: ..." for key-level problems, plain text for whole-file ones.
  std::vector<std::string> diagnostics;

  bool ok() const { return scenario.has_value(); }
};

ParseResult parse_scenario(std::string_view text);
/// Canonical text form; parse_scenario(serialize(s)) == s.
std::string serialize(const Scenario& s);
/// Cross-field checks, also applied by parse_scenario. Empty when valid.
std::vector<std::string> validate(const Scenario& s);

/// Process models selectable by name.
bool is_registered_process(std::string_view name);
std::vector<std::string> registered_processes();

/// Explicit nodes first, then the random ones drawn uniformly over the
/// field from the placement stream.
std::vector<Position> place_nodes(const Scenario& s);

}  // namespace wsnsim
