#pragma once

#include <cmath>
#include <cstdint>

namespace wsnsim {

inline constexpr std::int64_t kMicrojoulesPerJoule = 1000000;

inline std::int64_t to_microjoules(double joules) {
  return static_cast<std::int64_t>(std::llround(joules * 1e6));
}
inline double to_joules(std::int64_t microjoules) {
  return static_cast<double>(microjoules) * 1e-6;
}

/// Non-rechargeable energy store, tracked in integer microjoules.
struct Battery {
  std::int64_t capacity_uj = 0;
  std::int64_t remaining_uj = 0;

  static Battery with_capacity(double joules) {
    const std::int64_t uj = to_microjoules(joules);
    return Battery{uj, uj};
  }
  double capacity_j() const { return to_joules(capacity_uj); }
  double remaining_j() const { return to_joules(remaining_uj); }
};

}  // namespace wsnsim
