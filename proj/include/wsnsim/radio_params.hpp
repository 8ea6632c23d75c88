#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wsnsim {

/// Transceiver constants. Gains and losses are linear ratios, powers in watts,
/// lengths in meters.
struct RadioParams {
  double tx_power_w = 0.281838;
  double tx_gain = 1.0;
  double rx_gain = 1.0;
  double wavelength_m = 0.125;
  double system_loss = 1.0;
  double tx_height_m = 1.5;
  double rx_height_m = 1.5;
  double rx_threshold_w = 0.0;
  double disk_range_m = 100.0;
  double noise_floor_w = 1e-13;
  double bitrate_bps = 1e6;

  /// Human-readable violations of the per-field constraints; empty when valid.
  std::vector<std::string> violations() const;

  friend bool operator==(const RadioParams&, const RadioParams&) = default;
};

enum class ClosureModel : std::uint8_t { kUnitDisk, kFreeSpace, kTwoRay };
enum class Modulation : std::uint8_t { kBpsk };

std::string to_string(ClosureModel model);

struct PipelineConfig {
  ClosureModel closure = ClosureModel::kUnitDisk;
  bool tx_gain_enabled = false;
  bool rx_gain_enabled = false;
  bool power_enabled = false;
  bool bkgnoise_enabled = false;
  bool snr_enabled = false;
  bool ber_enabled = false;
  bool error_enabled = false;
  bool ecc_enabled = false;
  std::uint64_t ecc_capability = 0;
  Modulation modulation = Modulation::kBpsk;

  /// Stage dependency violations (ber needs snr, error needs ber, ecc needs error).
  std::vector<std::string> violations() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

}  // namespace wsnsim
