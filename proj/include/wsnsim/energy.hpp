#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wsnsim/packet.hpp"
#include "wsnsim/sim_time.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

enum class EnergyModelKind : std::uint8_t { kNone, kBucket, kState };
enum class PowerState : std::uint8_t { kSleep, kIdle, kRx, kTx, kSense, kCompute };
enum class Direction : std::uint8_t { kTx, kRx };

inline constexpr std::size_t kPowerStateCount = 6;

std::string_view to_string(EnergyModelKind kind);
std::string_view to_string(PowerState state);

struct EnergyConfig {
  EnergyModelKind model = EnergyModelKind::kNone;
  double capacity_j = 100.0;
  double tx_cost_j = 0.0;
  double rx_cost_j = 0.0;
  /// Watts drawn in each PowerState, indexed by the enum value.
  std::array<double, kPowerStateCount> draw_w{};

  std::vector<std::string> violations() const;

  friend bool operator==(const EnergyConfig&, const EnergyConfig&) = default;
};

/// Battery accounting for every node of a topology. Balances are integer
/// microjoules; the state model integrates draw x dwell exactly (nanowatts x
/// nanoseconds) and carries the sub-microjoule remainder per node, so
/// capacity == remaining + debited holds exactly.
class EnergyModel {
 public:
  EnergyModel(Topology& topology, EnergyConfig config);

  const EnergyConfig& config() const { return config_; }

  /// Bucket model: takes the per-packet cost out of the sender's or
  /// receiver's battery. A cost larger than what is left empties the
  /// battery, kills the node and throws NodeDepleted. Other models: no-op.
  double debit_packet(NodeId node, Direction direction, const Packet& packet, SimTime now);

  /// State model: settles the dwell in the current state, then switches.
  /// Throws NodeDepleted if the battery ran dry during the dwell; the node
  /// is then dead as of the exact crossing time.
  PowerState set_state(NodeId node, PowerState state, SimTime now);

  /// One-off draw (sensing, computation) in joules, any model but none.
  void debit(NodeId node, double joules, SimTime now);

  double remaining(NodeId node, SimTime now) const;
  std::int64_t remaining_uj(NodeId node, SimTime now) const;
  std::int64_t debited_uj(NodeId node) const;
  PowerState state(NodeId node) const;
  std::optional<SimTime> death_time(NodeId node) const;

  /// State model: when the battery will run dry if nothing changes.
  std::optional<SimTime> predicted_death(NodeId node) const;
  /// Settles `node` up to `now`; returns true if it died as a result.
  bool expire_if_due(NodeId node, SimTime now);

 private:
  struct Ledger {
    PowerState state = PowerState::kIdle;
    SimTime entered_at;
    std::int64_t carry_aj = 0;  // sub-microjoule remainder, attojoules
    std::int64_t debited_uj = 0;
    std::optional<SimTime> death;
  };

  Ledger& ledger(NodeId node);
  const Ledger& ledger(NodeId node) const;
  /// Accrues the current state's dwell up to `now`. Returns true on death.
  bool settle(NodeId node, SimTime now);
  void kill(NodeId node, SimTime at);
  void take(NodeId node, std::int64_t uj, SimTime now);

  Topology& topology_;
  EnergyConfig config_;
  std::array<std::int64_t, kPowerStateCount> draw_nw_{};
  std::int64_t tx_cost_uj_ = 0;
  std::int64_t rx_cost_uj_ = 0;
  std::vector<Ledger> ledgers_;
};

}  // namespace wsnsim
