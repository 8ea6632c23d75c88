#include "wsnsim/energy.hpp"

#include <cmath>

#include "wsnsim/errors.hpp"

namespace wsnsim {

namespace {

constexpr std::int64_t kAttojoulesPerMicrojoule = 1000000000000;  // 1e12

std::int64_t to_nanowatts(double watts) { return static_cast<std::int64_t>(std::llround(watts * 1e9)); }

std::int64_t ceil_div(__int128 num, std::int64_t den) {
  if (num <= 0) return 0;
  return static_cast<std::int64_t>((num + den - 1) / den);
}

}  // namespace

std::string_view to_string(EnergyModelKind kind) {
  switch (kind) {
    case EnergyModelKind::kNone: return "none";
    case EnergyModelKind::kBucket: return "bucket";
    case EnergyModelKind::kState: return "state";
  }
  return "?";
}

std::string_view to_string(PowerState state) {
  static constexpr std::string_view names[] = {"sleep", "idle", "rx", "tx", "sense", "compute"};
  return names[static_cast<std::size_t>(state)];
}

std::vector<std::string> EnergyConfig::violations() const {
  std::vector<std::string> out;
  if (!(std::isfinite(capacity_j) && capacity_j > 0.0)) out.emplace_back("capacity_j must be > 0");
  if (!(std::isfinite(tx_cost_j) && tx_cost_j >= 0.0)) out.emplace_back("tx_cost_j must be >= 0");
  if (!(std::isfinite(rx_cost_j) && rx_cost_j >= 0.0)) out.emplace_back("rx_cost_j must be >= 0");
  for (std::size_t i = 0; i < draw_w.size(); ++i) {
    if (!(std::isfinite(draw_w[i]) && draw_w[i] >= 0.0))
      out.push_back("draw for " + std::string(to_string(static_cast<PowerState>(i))) + " must be >= 0");
  }
  return out;
}

EnergyModel::EnergyModel(Topology& topology, EnergyConfig config)
    : topology_(topology), config_(config) {
  if (auto bad = config_.violations(); !bad.empty()) throw Error("energy config: " + bad.front());
  for (std::size_t i = 0; i < kPowerStateCount; ++i) draw_nw_[i] = to_nanowatts(config_.draw_w[i]);
  tx_cost_uj_ = to_microjoules(config_.tx_cost_j);
  rx_cost_uj_ = to_microjoules(config_.rx_cost_j);
  ledgers_.resize(topology_.size());
}

EnergyModel::Ledger& EnergyModel::ledger(NodeId node) {
  topology_.node(node);
  if (node >= ledgers_.size()) ledgers_.resize(topology_.size());
  return ledgers_[node];
}

const EnergyModel::Ledger& EnergyModel::ledger(NodeId node) const {
  topology_.node(node);
  static const Ledger fresh;
  return node < ledgers_.size() ? ledgers_[node] : fresh;
}

void EnergyModel::kill(NodeId node, SimTime at) {
  topology_.node(node).alive = false;
  ledger(node).death = at;
}

bool EnergyModel::settle(NodeId node, SimTime now) {
  Ledger& l = ledger(node);
  NodeDescriptor& n = topology_.node(node);
  if (config_.model != EnergyModelKind::kState || !n.alive) return false;
  const std::int64_t draw = draw_nw_[static_cast<std::size_t>(l.state)];
  const std::uint64_t dt = (now - l.entered_at).ns;
  if (draw == 0 || dt == 0) {
    l.entered_at = now;
    return false;
  }
  const __int128 accrued = static_cast<__int128>(draw) * dt + l.carry_aj;
  const __int128 left_aj = static_cast<__int128>(n.battery.remaining_uj) * kAttojoulesPerMicrojoule;
  if (accrued >= left_aj) {
    const SimTime crossing = l.entered_at + Duration{static_cast<std::uint64_t>(
                                                ceil_div(left_aj - l.carry_aj, draw))};
    l.debited_uj += n.battery.remaining_uj;
    n.battery.remaining_uj = 0;
    l.carry_aj = 0;
    l.entered_at = now;
    kill(node, crossing);
    return true;
  }
  const auto whole = static_cast<std::int64_t>(accrued / kAttojoulesPerMicrojoule);
  n.battery.remaining_uj -= whole;
  l.debited_uj += whole;
  l.carry_aj = static_cast<std::int64_t>(accrued % kAttojoulesPerMicrojoule);
  l.entered_at = now;
  return false;
}

void EnergyModel::take(NodeId node, std::int64_t uj, SimTime now) {
  NodeDescriptor& n = topology_.node(node);
  Ledger& l = ledger(node);
  if (uj > n.battery.remaining_uj) {
    l.debited_uj += n.battery.remaining_uj;
    n.battery.remaining_uj = 0;
    kill(node, now);
    throw NodeDepleted(node, now.ticks);
  }
  n.battery.remaining_uj -= uj;
  l.debited_uj += uj;
  if (n.battery.remaining_uj == 0 && uj > 0) kill(node, now);
}

double EnergyModel::debit_packet(NodeId node, Direction direction, const Packet&, SimTime now) {
  NodeDescriptor& n = topology_.node(node);
  if (config_.model != EnergyModelKind::kBucket) return 0.0;
  if (!n.alive) throw NodeDepleted(node, death_time(node).value_or(now).ticks);
  const std::int64_t cost = direction == Direction::kTx ? tx_cost_uj_ : rx_cost_uj_;
  take(node, cost, now);
  return to_joules(cost);
}

PowerState EnergyModel::set_state(NodeId node, PowerState state, SimTime now) {
  if (config_.model != EnergyModelKind::kState)
    throw Error("set_state needs the state energy model");
  NodeDescriptor& n = topology_.node(node);
  Ledger& l = ledger(node);
  if (!n.alive) throw NodeDepleted(node, l.death.value_or(now).ticks);
  if (settle(node, now)) throw NodeDepleted(node, l.death->ticks);
  const PowerState previous = l.state;
  l.state = state;
  l.entered_at = now;
  return previous;
}

void EnergyModel::debit(NodeId node, double joules, SimTime now) {
  NodeDescriptor& n = topology_.node(node);
  if (config_.model == EnergyModelKind::kNone) return;
  if (!(std::isfinite(joules) && joules >= 0.0)) throw Error("debit must be finite and >= 0");
  if (!n.alive) throw NodeDepleted(node, death_time(node).value_or(now).ticks);
  if (settle(node, now)) throw NodeDepleted(node, ledger(node).death->ticks);
  take(node, to_microjoules(joules), now);
}

std::int64_t EnergyModel::remaining_uj(NodeId node, SimTime now) const {
  const NodeDescriptor& n = topology_.node(node);
  const Ledger& l = ledger(node);
  if (config_.model != EnergyModelKind::kState || !n.alive || now <= l.entered_at)
    return n.battery.remaining_uj;
  const std::int64_t draw = draw_nw_[static_cast<std::size_t>(l.state)];
  const __int128 accrued = static_cast<__int128>(draw) * (now - l.entered_at).ns + l.carry_aj;
  const __int128 whole = accrued / kAttojoulesPerMicrojoule;
  return whole >= n.battery.remaining_uj ? 0 : n.battery.remaining_uj - static_cast<std::int64_t>(whole);
}

double EnergyModel::remaining(NodeId node, SimTime now) const { return to_joules(remaining_uj(node, now)); }

std::int64_t EnergyModel::debited_uj(NodeId node) const { return ledger(node).debited_uj; }

PowerState EnergyModel::state(NodeId node) const { return ledger(node).state; }

std::optional<SimTime> EnergyModel::death_time(NodeId node) const { return ledger(node).death; }

std::optional<SimTime> EnergyModel::predicted_death(NodeId node) const {
  const NodeDescriptor& n = topology_.node(node);
  const Ledger& l = ledger(node);
  if (config_.model != EnergyModelKind::kState || !n.alive) return std::nullopt;
  const std::int64_t draw = draw_nw_[static_cast<std::size_t>(l.state)];
  if (draw == 0) return std::nullopt;
  const __int128 left_aj =
      static_cast<__int128>(n.battery.remaining_uj) * kAttojoulesPerMicrojoule - l.carry_aj;
  return l.entered_at + Duration{static_cast<std::uint64_t>(ceil_div(left_aj, draw))};
}

bool EnergyModel::expire_if_due(NodeId node, SimTime now) { return settle(node, now); }

}  // namespace wsnsim
