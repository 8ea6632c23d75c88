#include "wsnsim/topology.hpp"

#include <algorithm>
#include <cmath>

#include "wsnsim/errors.hpp"

namespace wsnsim {

namespace {
constexpr double kMaxCells = 4.0e6;
}

double euclidean(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool Field::contains(const Position& p) const {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z) && p.x >= 0.0 &&
         p.x <= width && p.y >= 0.0 && p.y <= height && p.z >= 0.0;
}

Topology::Topology(Field field, double cell_size_m) : field_(field), cell_size_(cell_size_m) {
  if (!(field_.width > 0.0) || !(field_.height > 0.0) || !std::isfinite(field_.width) ||
      !std::isfinite(field_.height))
    throw Error("field dimensions must be positive and finite");
  const double longest = std::max(field_.width, field_.height);
  if (!std::isfinite(cell_size_) || cell_size_ <= 0.0 || cell_size_ > longest) cell_size_ = longest;
  double cols = std::ceil(field_.width / cell_size_);
  double rows = std::ceil(field_.height / cell_size_);
  if (cols * rows > kMaxCells) {
    cell_size_ *= std::sqrt(cols * rows / kMaxCells);
    cols = std::ceil(field_.width / cell_size_);
    rows = std::ceil(field_.height / cell_size_);
  }
  cols_ = std::max<std::size_t>(1, static_cast<std::size_t>(cols));
  rows_ = std::max<std::size_t>(1, static_cast<std::size_t>(rows));
  cells_.resize(cols_ * rows_);
}

std::size_t Topology::cell_of(const Position& p) const {
  const auto col = std::min(cols_ - 1, static_cast<std::size_t>(p.x / cell_size_));
  const auto row = std::min(rows_ - 1, static_cast<std::size_t>(p.y / cell_size_));
  return row * cols_ + col;
}

void Topology::check(NodeId id) const {
  if (id >= nodes_.size()) throw UnknownNode(id);
}

NodeId Topology::add_node(Position position, RadioParams radio, Battery battery) {
  if (!field_.contains(position))
    throw OutOfField("position (" + std::to_string(position.x) + ", " + std::to_string(position.y) +
                     ", " + std::to_string(position.z) + ") is outside the field");
  const auto id = static_cast<NodeId>(nodes_.size());
  nodes_.push_back(NodeDescriptor{id, position, radio, battery, nullptr, true});
  const std::size_t cell = cell_of(position);
  cells_[cell].push_back(id);
  node_cell_.push_back(cell);
  waypoints_.emplace_back();
  return id;
}

const NodeDescriptor& Topology::node(NodeId id) const {
  check(id);
  return nodes_[id];
}

NodeDescriptor& Topology::node(NodeId id) {
  check(id);
  return nodes_[id];
}

double Topology::distance(NodeId a, NodeId b) const {
  check(a);
  check(b);
  return euclidean(nodes_[a].position, nodes_[b].position);
}

std::vector<NodeId> Topology::neighbors_within(NodeId center, double radius) const {
  check(center);
  if (!(radius >= 0.0)) throw Error("neighbor radius must be non-negative");
  const Position& c = nodes_[center].position;
  std::vector<NodeId> out;
  const double reach = std::ceil(radius / cell_size_);
  const auto span = reach >= static_cast<double>(std::max(cols_, rows_))
                        ? std::max(cols_, rows_)
                        : static_cast<std::size_t>(reach);
  const std::size_t home = node_cell_[center];
  const std::size_t hc = home % cols_;
  const std::size_t hr = home / cols_;
  const std::size_t c0 = hc > span ? hc - span : 0;
  const std::size_t c1 = std::min(cols_ - 1, hc + span);
  const std::size_t r0 = hr > span ? hr - span : 0;
  const std::size_t r1 = std::min(rows_ - 1, hr + span);
  for (std::size_t r = r0; r <= r1; ++r) {
    for (std::size_t col = c0; col <= c1; ++col) {
      for (NodeId n : cells_[r * cols_ + col]) {
        if (n != center && euclidean(c, nodes_[n].position) <= radius) out.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Topology::move_node(NodeId id, Position to) {
  check(id);
  if (!field_.contains(to)) throw OutOfField("move of node " + std::to_string(id) + " leaves the field");
  const std::size_t from_cell = node_cell_[id];
  const std::size_t to_cell = cell_of(to);
  if (from_cell != to_cell) {
    auto& cell = cells_[from_cell];
    cell.erase(std::find(cell.begin(), cell.end(), id));
    cells_[to_cell].push_back(id);
    node_cell_[id] = to_cell;
  }
  if (!(nodes_[id].position == to)) ++generation_;
  nodes_[id].position = to;
}

void Topology::set_waypoint_params(WaypointParams params) {
  if (!(params.vmin_mps > 0.0) || !std::isfinite(params.vmax_mps) || params.vmax_mps < params.vmin_mps)
    throw Error("waypoint speeds must satisfy 0 < vmin <= vmax");
  waypoint_params_ = params;
}

void Topology::draw_waypoint(NodeId node, Rng& rng) {
  WaypointState& w = *waypoints_[node];
  w.destination.x = uniform01(rng) * field_.width;
  w.destination.y = uniform01(rng) * field_.height;
  w.destination.z = nodes_[node].position.z;
  w.speed_mps = waypoint_params_.vmin_mps +
                uniform01(rng) * (waypoint_params_.vmax_mps - waypoint_params_.vmin_mps);
}

void Topology::start_waypoint(NodeId node, Rng& rng) {
  check(node);
  waypoints_[node] = WaypointState{};
  draw_waypoint(node, rng);
}

bool Topology::has_waypoint(NodeId node) const {
  check(node);
  return waypoints_[node].has_value();
}

const WaypointState& Topology::waypoint(NodeId node) const {
  check(node);
  if (!waypoints_[node]) throw Error("node " + std::to_string(node) + " has no waypoint state");
  return *waypoints_[node];
}

Position Topology::step_waypoint(NodeId node, Duration dt, SimTime now, Rng& rng) {
  check(node);
  if (!waypoints_[node]) throw Error("node " + std::to_string(node) + " has no waypoint state");
  if (dt.ns == 0) throw Error("waypoint step needs dt > 0");
  WaypointState& w = *waypoints_[node];
  if (now < w.pause_until) return nodes_[node].position;
  if (nodes_[node].position == w.destination) draw_waypoint(node, rng);  // pause is over

  const Position& at = nodes_[node].position;
  const double remaining = euclidean(at, w.destination);
  const double travel = w.speed_mps * dt.seconds();
  if (travel >= remaining) {
    move_node(node, w.destination);
    w.pause_until = now + waypoint_params_.pause;
    if (waypoint_params_.pause.ns == 0) draw_waypoint(node, rng);
  } else {
    const double f = travel / remaining;
    Position next{at.x + (w.destination.x - at.x) * f, at.y + (w.destination.y - at.y) * f,
                  at.z + (w.destination.z - at.z) * f};
    // Rounding can nudge a coordinate a hair past the boundary.
    next.x = std::clamp(next.x, 0.0, field_.width);
    next.y = std::clamp(next.y, 0.0, field_.height);
    move_node(node, next);
  }
  return nodes_[node].position;
}

}  // namespace wsnsim
