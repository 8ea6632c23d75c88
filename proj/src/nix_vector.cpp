#include "wsnsim/nix_vector.hpp"

#include <bit>
#include <string>

#include "wsnsim/errors.hpp"

namespace wsnsim {

unsigned nix_width(std::size_t degree) {
  if (degree <= 2) return 1;
  return static_cast<unsigned>(std::bit_width(degree - 1));
}

void NixVector::push(std::uint32_t index, unsigned width) {
  if (width == 0 || width > 32) throw Error("nix hop width must be in 1..32");
  if (width < 32 && (index >> width) != 0)
    throw Error("nix index " + std::to_string(index) + " does not fit in " + std::to_string(width) + " bits");
  for (unsigned i = 0; i < width; ++i, ++bits_) {
    if (bits_ / 64 == words_.size()) words_.push_back(0);
    // most significant bit of the index first
    if ((index >> (width - 1 - i)) & 1u) words_[bits_ / 64] |= std::uint64_t{1} << (bits_ % 64);
  }
  ++hops_;
}

std::uint32_t NixVector::read(unsigned width) {
  if (width == 0 || width > 32) throw Error("nix hop width must be in 1..32");
  if (bits_ - cursor_ < width) throw RouteExhausted();
  std::uint32_t value = 0;
  for (unsigned i = 0; i < width; ++i, ++cursor_)
    value = (value << 1) | static_cast<std::uint32_t>((words_[cursor_ / 64] >> (cursor_ % 64)) & 1u);
  return value;
}

}  // namespace wsnsim
