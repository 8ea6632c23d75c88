#pragma once

#include <cstdint>
#include <functional>
#include <string_view>
#include <vector>

#include "wsnsim/kernel.hpp"
#include "wsnsim/packet.hpp"
#include "wsnsim/radio_params.hpp"
#include "wsnsim/rng.hpp"
#include "wsnsim/topology.hpp"

namespace wsnsim {

class EnergyModel;

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kReferenceTemperature = 290.0;

// Path-loss laws. Both throw ZeroDistance at d == 0.
double free_space_rx_power(const RadioParams& p, double d);
double two_ray_rx_power(const RadioParams& p, double d);

inline bool unit_disk_closure(double d, double range) { return d <= range; }

double snr(double rx_power_w, double noise_w);

/// BPSK over AWGN: 0.5 * erfc(sqrt(snr)).
double ber_from_snr(double snr, Modulation modulation = Modulation::kBpsk);

/// Draws Binomial(size, ber) bit errors, stores them on the packet and
/// returns the count.
std::uint64_t apply_error_model(Packet& packet, double ber, Rng& rng);

inline bool ecc_accept(std::uint64_t bit_errors, std::uint64_t capability) {
  return bit_errors <= capability;
}

/// Thermal noise k*T0*B with the bitrate standing in for the bandwidth.
double thermal_noise_w(double bandwidth_hz);

/// Largest distance at which `rx` could still hear `tx` under `cfg`: the
/// disk range, or where the path-loss law falls to a tenth of the receive
/// threshold. Infinite for a power law with a zero threshold.
double coverage_radius(const RadioParams& tx, const RadioParams& rx, const PipelineConfig& cfg);

/// Deterministic part of the pipeline: closure plus the power threshold,
/// ignoring noise and bit errors. This is the adjacency routing sees.
bool receivable(const NodeDescriptor& tx, const NodeDescriptor& rx, double distance_m,
                const PipelineConfig& cfg);

Duration transmission_delay(std::uint64_t bits, double bitrate_bps);
Duration propagation_delay(double distance_m);

enum class DropReason : std::uint8_t {
  kNone,
  kBelowThreshold,
  kOutOfRange,
  kUncorrectable,
  kReceiverDead,
};

std::string_view to_string(DropReason reason);

struct ReceptionOutcome {
  bool received = false;
  double rx_power_w = 0.0;
  /// Left at zero when the SNR stage is disabled.
  double snr = 0.0;
  double ber = 0.0;
  std::uint64_t bit_errors = 0;
  DropReason drop_reason = DropReason::kNone;

  friend bool operator==(const ReceptionOutcome&, const ReceptionOutcome&) = default;
};

/// Evaluates one transmitter/receiver pair in fixed stage order:
/// closure, tx gain, rx gain, received power, background noise, SNR, BER,
/// error allocation, ECC, threshold.
ReceptionOutcome run_pipeline(const NodeDescriptor& tx, const NodeDescriptor& rx, double distance_m,
                              Packet& packet, const PipelineConfig& cfg, Rng& rng);
ReceptionOutcome run_pipeline(const NodeDescriptor& tx, const NodeDescriptor& rx, Packet& packet,
                              const PipelineConfig& cfg, Rng& rng);

struct ScheduledReception {
  NodeId receiver = 0;
  SimTime arrival;
  EventId event_id = 0;
  bool remote = false;
};

/// Shared-medium transmitter. Receivers owned by another partition are
/// handed to the remote hook instead of the local kernel.
class Radio {
 public:
  using IsLocal = std::function<bool(NodeId)>;
  using Forward = std::function<void(Event&&)>;

  Radio(Kernel& kernel, Topology& topology, EnergyModel& energy, PipelineConfig cfg);

  const PipelineConfig& config() const { return cfg_; }
  /// Coverage radius used to pick candidate receivers.
  double coverage() const { return coverage_; }

  void set_remote(IsLocal is_local, Forward forward);

  /// Debits the sender, then schedules one packet-arrival per candidate
  /// receiver at now + size/bitrate + distance/c. Throws NodeDepleted when
  /// the sender is dead or runs dry; nothing is scheduled then.
  std::vector<ScheduledReception> transmit(NodeId src, const Packet& packet);

 private:
  Kernel& kernel_;
  Topology& topology_;
  EnergyModel& energy_;
  PipelineConfig cfg_;
  double coverage_ = 0.0;
  IsLocal is_local_;
  Forward forward_;
};

}  // namespace wsnsim
