#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "wsnsim/battery.hpp"
#include "wsnsim/packet.hpp"
#include "wsnsim/radio_params.hpp"
#include "wsnsim/rng.hpp"
#include "wsnsim/sim_time.hpp"

namespace wsnsim {

class ProcessInstance;

struct Position {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position&, const Position&) = default;
};

double euclidean(const Position& a, const Position& b);

/// Axis-aligned field [0, width] x [0, height], meters.
struct Field {
  double width = 1000.0;
  double height = 1000.0;

  bool contains(const Position& p) const;

  friend bool operator==(const Field&, const Field&) = default;
};

struct NodeDescriptor {
  NodeId id = 0;
  Position position;
  RadioParams radio;
  Battery battery;
  ProcessInstance* process = nullptr;
  bool alive = true;
};

struct WaypointState {
  Position destination;
  double speed_mps = 1.0;
  SimTime pause_until;
};

struct WaypointParams {
  double vmin_mps = 1.0;
  double vmax_mps = 1.0;
  Duration pause;
};

/// Node registry with a uniform-grid spatial index. The grid only looks at
/// x/y; z enters distances but not cell placement.
class Topology {
 public:
  Topology(Field field, double cell_size_m);

  NodeId add_node(Position position, RadioParams radio, Battery battery);

  std::size_t size() const { return nodes_.size(); }
  const Field& field() const { return field_; }
  const NodeDescriptor& node(NodeId id) const;
  NodeDescriptor& node(NodeId id);
  const std::vector<NodeDescriptor>& nodes() const { return nodes_; }

  double distance(NodeId a, NodeId b) const;

  /// Every node other than `center` within `radius` (inclusive), ascending.
  std::vector<NodeId> neighbors_within(NodeId center, double radius) const;

  void move_node(NodeId id, Position to);
  /// Bumped whenever a position changes.
  std::uint64_t generation() const { return generation_; }

  void set_waypoint_params(WaypointParams params);
  const WaypointParams& waypoint_params() const { return waypoint_params_; }
  /// Draws an initial destination and speed for `node`.
  void start_waypoint(NodeId node, Rng& rng);
  bool has_waypoint(NodeId node) const;
  const WaypointState& waypoint(NodeId node) const;
  /// Advances `node` by `dt` along its waypoint segment. Arrival parks the
  /// node on the destination; after the pause a new destination and speed
  /// are drawn from `rng`.
  Position step_waypoint(NodeId node, Duration dt, SimTime now, Rng& rng);

 private:
  std::size_t cell_of(const Position& p) const;
  void check(NodeId id) const;
  void draw_waypoint(NodeId node, Rng& rng);

  Field field_;
  double cell_size_;
  std::size_t cols_ = 1;
  std::size_t rows_ = 1;
  std::vector<std::vector<NodeId>> cells_;
  std::vector<NodeDescriptor> nodes_;
  std::vector<std::size_t> node_cell_;
  std::vector<std::optional<WaypointState>> waypoints_;
  WaypointParams waypoint_params_;
  std::uint64_t generation_ = 0;
};

}  // namespace wsnsim
