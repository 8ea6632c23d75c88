#include "wsnsim/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "wsnsim/energy.hpp"
#include "wsnsim/errors.hpp"

namespace wsnsim {

std::vector<std::string> RadioParams::violations() const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const char* what) {
    if (!ok) out.emplace_back(what);
  };
  need(std::isfinite(tx_power_w) && tx_power_w >= 0.0, "tx_power_w must be finite and >= 0");
  need(std::isfinite(tx_gain) && tx_gain >= 0.0, "tx_gain must be finite and >= 0");
  need(std::isfinite(rx_gain) && rx_gain >= 0.0, "rx_gain must be finite and >= 0");
  need(std::isfinite(wavelength_m) && wavelength_m > 0.0, "wavelength_m must be > 0");
  need(std::isfinite(system_loss) && system_loss >= 1.0, "system_loss must be >= 1");
  need(std::isfinite(tx_height_m) && tx_height_m > 0.0, "tx_height_m must be > 0");
  need(std::isfinite(rx_height_m) && rx_height_m > 0.0, "rx_height_m must be > 0");
  need(std::isfinite(rx_threshold_w) && rx_threshold_w >= 0.0, "rx_threshold_w must be >= 0");
  need(std::isfinite(disk_range_m) && disk_range_m > 0.0, "disk_range_m must be > 0");
  need(std::isfinite(noise_floor_w) && noise_floor_w >= 0.0, "noise_floor_w must be >= 0");
  need(std::isfinite(bitrate_bps) && bitrate_bps > 0.0, "bitrate_bps must be > 0");
  return out;
}

std::string to_string(ClosureModel model) {
  switch (model) {
    case ClosureModel::kUnitDisk: return "unit-disk";
    case ClosureModel::kFreeSpace: return "free-space";
    case ClosureModel::kTwoRay: return "two-ray";
  }
  return "?";
}

std::vector<std::string> PipelineConfig::violations() const {
  std::vector<std::string> out;
  if (ber_enabled && !snr_enabled) out.emplace_back("ber_enabled requires snr_enabled");
  if (error_enabled && !ber_enabled) out.emplace_back("error_enabled requires ber_enabled");
  if (ecc_enabled && !error_enabled) out.emplace_back("ecc_enabled requires error_enabled");
  return out;
}

double free_space_rx_power(const RadioParams& p, double d) {
  if (d == 0.0) throw ZeroDistance();
  constexpr double four_pi_sq = 16.0 * std::numbers::pi * std::numbers::pi;
  return p.tx_power_w * p.tx_gain * p.rx_gain * p.wavelength_m * p.wavelength_m /
         (four_pi_sq * d * d * p.system_loss);
}

double two_ray_rx_power(const RadioParams& p, double d) {
  if (d == 0.0) throw ZeroDistance();
  const double hh = p.tx_height_m * p.tx_height_m * p.rx_height_m * p.rx_height_m;
  const double d2 = d * d;
  return p.tx_power_w * p.tx_gain * p.rx_gain * hh / (d2 * d2 * p.system_loss);
}

double snr(double rx_power_w, double noise_w) {
  if (noise_w == 0.0) throw ZeroNoise();
  return rx_power_w / noise_w;
}

double ber_from_snr(double snr, Modulation modulation) {
  switch (modulation) {
    case Modulation::kBpsk: return 0.5 * std::erfc(std::sqrt(std::max(snr, 0.0)));
  }
  return 0.5;
}

std::uint64_t apply_error_model(Packet& packet, double ber, Rng& rng) {
  const std::uint64_t n = packet.size_bits();
  std::uint64_t errors = 0;
  if (ber >= 1.0) {
    errors = n;
  } else if (ber > 0.0) {
    // Geometric gaps between errored bits: O(n*ber) draws instead of O(n).
    const double log_q = std::log1p(-ber);
    std::uint64_t pos = 0;
    for (;;) {
      const double u = 1.0 - uniform01(rng);  // (0, 1]
      const double gap = std::floor(std::log(u) / log_q);
      if (gap >= static_cast<double>(n - pos)) break;
      pos += static_cast<std::uint64_t>(gap) + 1;
      ++errors;
      if (pos >= n) break;
    }
  }
  packet.bit_errors = errors;
  return errors;
}

double thermal_noise_w(double bandwidth_hz) {
  return kBoltzmann * kReferenceTemperature * bandwidth_hz;
}

namespace {

RadioParams effective_link(const RadioParams& tx, const RadioParams& rx, const PipelineConfig& cfg) {
  RadioParams p = tx;
  p.tx_gain = cfg.tx_gain_enabled ? tx.tx_gain : 1.0;
  p.rx_gain = cfg.rx_gain_enabled ? rx.rx_gain : 1.0;
  p.rx_height_m = rx.rx_height_m;
  return p;
}

}  // namespace

double coverage_radius(const RadioParams& tx, const RadioParams& rx, const PipelineConfig& cfg) {
  if (cfg.closure == ClosureModel::kUnitDisk) return tx.disk_range_m;
  const double floor_w = rx.rx_threshold_w / 10.0;
  if (floor_w <= 0.0) return std::numeric_limits<double>::infinity();
  const RadioParams p = effective_link(tx, rx, cfg);
  if (cfg.closure == ClosureModel::kFreeSpace) {
    const double k = p.tx_power_w * p.tx_gain * p.rx_gain * p.wavelength_m * p.wavelength_m /
                     (16.0 * std::numbers::pi * std::numbers::pi * p.system_loss);
    return std::sqrt(k / floor_w);
  }
  const double k = p.tx_power_w * p.tx_gain * p.rx_gain * p.tx_height_m * p.tx_height_m *
                   p.rx_height_m * p.rx_height_m / p.system_loss;
  return std::sqrt(std::sqrt(k / floor_w));
}

namespace {

double received_power(const RadioParams& link, double d, const PipelineConfig& cfg) {
  switch (cfg.closure) {
    case ClosureModel::kUnitDisk:
      return cfg.power_enabled ? free_space_rx_power(link, d)
                               : link.tx_power_w * link.tx_gain * link.rx_gain;
    case ClosureModel::kFreeSpace: return free_space_rx_power(link, d);
    case ClosureModel::kTwoRay: return two_ray_rx_power(link, d);
  }
  return 0.0;
}

bool in_closure(const NodeDescriptor& tx, const NodeDescriptor& rx, double d, const PipelineConfig& cfg) {
  return cfg.closure == ClosureModel::kUnitDisk ? unit_disk_closure(d, tx.radio.disk_range_m)
                                                : d <= coverage_radius(tx.radio, rx.radio, cfg);
}

}  // namespace

bool receivable(const NodeDescriptor& tx, const NodeDescriptor& rx, double d, const PipelineConfig& cfg) {
  if (!in_closure(tx, rx, d, cfg)) return false;
  if (cfg.closure == ClosureModel::kUnitDisk && !cfg.power_enabled && rx.radio.rx_threshold_w == 0.0)
    return true;
  return received_power(effective_link(tx.radio, rx.radio, cfg), d, cfg) >= rx.radio.rx_threshold_w;
}

Duration transmission_delay(std::uint64_t bits, double bitrate_bps) {
  return Duration::from_seconds(static_cast<double>(bits) / bitrate_bps);
}

Duration propagation_delay(double distance_m) {
  return Duration::from_seconds(distance_m / kSpeedOfLight);
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kNone: return "none";
    case DropReason::kBelowThreshold: return "below_threshold";
    case DropReason::kOutOfRange: return "out_of_range";
    case DropReason::kUncorrectable: return "uncorrectable";
    case DropReason::kReceiverDead: return "receiver_dead";
  }
  return "?";
}

ReceptionOutcome run_pipeline(const NodeDescriptor& tx, const NodeDescriptor& rx, double d,
                              Packet& packet, const PipelineConfig& cfg, Rng& rng) {
  ReceptionOutcome out;
  if (!rx.alive) {
    out.drop_reason = DropReason::kReceiverDead;
    return out;
  }

  // closure
  if (!in_closure(tx, rx, d, cfg)) {
    out.drop_reason = DropReason::kOutOfRange;
    return out;
  }

  // tx gain, rx gain, received power
  const RadioParams link = effective_link(tx.radio, rx.radio, cfg);
  out.rx_power_w = received_power(link, d, cfg);

  // background noise, SNR, BER
  double noise = rx.radio.noise_floor_w;
  if (cfg.bkgnoise_enabled) noise += thermal_noise_w(tx.radio.bitrate_bps);
  if (cfg.snr_enabled) out.snr = snr(out.rx_power_w, noise);
  if (cfg.ber_enabled) out.ber = ber_from_snr(out.snr, cfg.modulation);

  // error allocation, ECC
  packet.bit_errors = 0;
  if (cfg.error_enabled) out.bit_errors = apply_error_model(packet, out.ber, rng);
  const std::uint64_t capability = cfg.ecc_enabled ? cfg.ecc_capability : 0;
  if (!ecc_accept(out.bit_errors, capability)) {
    out.drop_reason = DropReason::kUncorrectable;
    return out;
  }

  // threshold
  if (out.rx_power_w < rx.radio.rx_threshold_w) {
    out.drop_reason = DropReason::kBelowThreshold;
    return out;
  }
  out.received = true;
  return out;
}

ReceptionOutcome run_pipeline(const NodeDescriptor& tx, const NodeDescriptor& rx, Packet& packet,
                              const PipelineConfig& cfg, Rng& rng) {
  return run_pipeline(tx, rx, euclidean(tx.position, rx.position), packet, cfg, rng);
}

Radio::Radio(Kernel& kernel, Topology& topology, EnergyModel& energy, PipelineConfig cfg)
    : kernel_(kernel), topology_(topology), energy_(energy), cfg_(cfg) {
  if (auto bad = cfg_.violations(); !bad.empty()) throw Error("pipeline config: " + bad.front());
  if (topology_.size() == 0) return;
  // Envelope receiver: the most sensitive combination present in the topology.
  RadioParams envelope = topology_.nodes().front().radio;
  for (const NodeDescriptor& rx : topology_.nodes()) {
    envelope.rx_gain = std::max(envelope.rx_gain, rx.radio.rx_gain);
    envelope.rx_height_m = std::max(envelope.rx_height_m, rx.radio.rx_height_m);
    envelope.rx_threshold_w = std::min(envelope.rx_threshold_w, rx.radio.rx_threshold_w);
  }
  for (const NodeDescriptor& tx : topology_.nodes())
    coverage_ = std::max(coverage_, coverage_radius(tx.radio, envelope, cfg_));
}

void Radio::set_remote(IsLocal is_local, Forward forward) {
  is_local_ = std::move(is_local);
  forward_ = std::move(forward);
}

std::vector<ScheduledReception> Radio::transmit(NodeId src, const Packet& packet) {
  const NodeDescriptor& tx = topology_.node(src);
  const SimTime now = kernel_.now();
  if (!tx.alive) throw NodeDepleted(src, energy_.death_time(src).value_or(now).ticks);
  if (packet.size_bits() == 0) throw Error("packet size must be positive");
  energy_.debit_packet(src, Direction::kTx, packet, now);

  const Duration tx_delay = transmission_delay(packet.size_bits(), tx.radio.bitrate_bps);
  std::vector<ScheduledReception> out;
  for (NodeId rx : topology_.neighbors_within(src, coverage_)) {
    const double d = topology_.distance(src, rx);
    if (cfg_.closure != ClosureModel::kUnitDisk && d == 0.0) throw ZeroDistance();
    const SimTime at = now + tx_delay + propagation_delay(d);
    Event ev;
    ev.target = rx;
    ev.kind = EventKind::kPacketArrival;
    ev.payload = ArrivalPayload{packet, src, d, now};
    if (is_local_ && !is_local_(rx)) {
      ev.time = at;
      ev.id = kernel_.next_id();
      out.push_back({rx, at, ev.id, true});
      forward_(std::move(ev));
    } else {
      const EventHandle h = kernel_.schedule(std::move(ev), at);
      out.push_back({rx, at, h.id, false});
    }
  }
  return out;
}

}  // namespace wsnsim
