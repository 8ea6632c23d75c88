#include "wsnsim/packet.hpp"

#include "wsnsim/errors.hpp"

namespace wsnsim {

HeaderEntry Packet::pop_header() {
  if (headers_.empty()) throw Error("pop_header on a packet with no headers");
  HeaderEntry top = std::move(headers_.back());
  headers_.pop_back();
  header_bits_ -= top.bits;
  return top;
}

}  // namespace wsnsim
