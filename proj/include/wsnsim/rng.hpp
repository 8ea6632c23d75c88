#pragma once

#include <cstdint>
#include <random>
#include <unordered_map>

#include "wsnsim/packet.hpp"

namespace wsnsim {

using Rng = std::mt19937_64;

/// Independent stream purposes; each (purpose, node) pair gets its own seed.
enum class StreamPurpose : std::uint64_t {
  kPlacement = 1,
  kMobility = 2,
  kChannel = 3,
  kProcess = 4,
};

/// splitmix64 finalizer chained over the inputs.
std::uint64_t derive_seed(std::uint64_t global_seed, StreamPurpose purpose, std::uint64_t index);

/// Uniform double in [0, 1) from the top 53 bits of one draw. Portable across
/// standard libraries, unlike std::uniform_real_distribution.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Per-node generators created on first use, so partitioning a run never
/// changes which draws a node sees.
class RngStreams {
 public:
  RngStreams(std::uint64_t seed, StreamPurpose purpose) : seed_(seed), purpose_(purpose) {}

  Rng& operator[](NodeId node) {
    auto it = streams_.find(node);
    if (it == streams_.end())
      it = streams_.emplace(node, Rng{derive_seed(seed_, purpose_, node)}).first;
    return it->second;
  }

 private:
  std::uint64_t seed_;
  StreamPurpose purpose_;
  std::unordered_map<NodeId, Rng> streams_;
};

}  // namespace wsnsim
