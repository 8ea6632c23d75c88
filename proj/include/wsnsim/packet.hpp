#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wsnsim/nix_vector.hpp"

namespace wsnsim {

using NodeId = std::uint32_t;
inline constexpr NodeId kBroadcast = std::numeric_limits<NodeId>::max();

struct HeaderEntry {
  std::string protocol;
  std::uint32_t bits = 0;

  friend bool operator==(const HeaderEntry&, const HeaderEntry&) = default;
};

/// Compact packet: a header stack over an opaque payload size. No payload
/// bytes are carried, only their length.
class Packet {
 public:
  Packet() = default;
  Packet(std::uint64_t id, NodeId src, NodeId dst, std::uint32_t payload_bits)
      : id_(id), src_(src), dst_(dst), payload_bits_(payload_bits) {}

  std::uint64_t id() const { return id_; }
  NodeId src() const { return src_; }
  NodeId dst() const { return dst_; }
  std::uint32_t payload_bits() const { return payload_bits_; }
  std::uint64_t size_bits() const { return payload_bits_ + header_bits_; }
  const std::vector<HeaderEntry>& headers() const { return headers_; }

  void push_header(std::string protocol, std::uint32_t bits) {
    header_bits_ += bits;
    headers_.push_back({std::move(protocol), bits});
  }
  /// Removes the top header; returns it. The stack must not be empty.
  HeaderEntry pop_header();

  std::uint64_t bit_errors = 0;
  /// Application flow tag (e.g. the flood identifier).
  std::uint64_t flow = 0;
  /// Intended next hop on a shared medium; kBroadcast for everyone.
  NodeId link_dst = kBroadcast;
  std::optional<NixVector> route;

  friend bool operator==(const Packet&, const Packet&) = default;

 private:
  std::uint64_t id_ = 0;
  NodeId src_ = 0;
  NodeId dst_ = kBroadcast;
  std::uint32_t payload_bits_ = 0;
  std::uint64_t header_bits_ = 0;
  std::vector<HeaderEntry> headers_;
};

}  // namespace wsnsim
