#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wsnsim {

/// Bits needed to name one neighbor out of `degree`: ceil(log2(degree)), at least 1.
unsigned nix_width(std::size_t degree);

/// Bit-packed source route. Each hop stores the index of the next neighbor
/// in the current node's ascending-id neighbor list.
class NixVector {
 public:
  /// Appends one hop index using `width` bits.
  void push(std::uint32_t index, unsigned width);
  /// Reads the next `width` bits and advances the cursor. Throws
  /// RouteExhausted if fewer than `width` bits remain.
  std::uint32_t read(unsigned width);

  std::size_t bit_count() const { return bits_; }
  std::size_t cursor() const { return cursor_; }
  std::size_t hops() const { return hops_; }
  bool exhausted() const { return cursor_ >= bits_; }
  void rewind() { cursor_ = 0; }
  /// Heap bytes held by the packed representation.
  std::size_t byte_size() const { return words_.size() * sizeof(std::uint64_t); }

  friend bool operator==(const NixVector&, const NixVector&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t bits_ = 0;
  std::size_t cursor_ = 0;
  std::size_t hops_ = 0;
};

}  // namespace wsnsim
