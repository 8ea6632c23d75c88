#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wsnsim {

/// Base of every error raised by the simulator library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// kernel
class PastTime : public Error {
 public:
  using Error::Error;
};
class TimeOverflow : public Error {
 public:
  using Error::Error;
};
class HandlerFault : public Error {
 public:
  HandlerFault(std::uint64_t event_id, const std::string& what)
      : Error("handler fault in event " + std::to_string(event_id) + ": " + what),
        event_id_(event_id) {}
  std::uint64_t event_id() const noexcept { return event_id_; }

 private:
  std::uint64_t event_id_;
};

// topology
class OutOfField : public Error {
 public:
  using Error::Error;
};
class UnknownNode : public Error {
 public:
  explicit UnknownNode(std::uint32_t node)
      : Error("unknown node " + std::to_string(node)), node_(node) {}
  std::uint32_t node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

// radio
class ZeroDistance : public Error {
 public:
  ZeroDistance() : Error("path-loss model evaluated at zero distance") {}
};
class ZeroNoise : public Error {
 public:
  ZeroNoise() : Error("snr requested with zero noise power") {}
};

// energy
class NodeDepleted : public Error {
 public:
  NodeDepleted(std::uint32_t node, std::uint64_t death_ns)
      : Error("node " + std::to_string(node) + " depleted at " + std::to_string(death_ns) + " ns"),
        node_(node),
        death_ns_(death_ns) {}
  std::uint32_t node() const noexcept { return node_; }
  std::uint64_t death_ns() const noexcept { return death_ns_; }

 private:
  std::uint32_t node_;
  std::uint64_t death_ns_;
};

// process
class AmbiguousTransition : public Error {
 public:
  using Error::Error;
};
class InvalidModel : public Error {
 public:
  using Error::Error;
};

// routing
class NoRoute : public Error {
 public:
  NoRoute(std::uint32_t src, std::uint32_t dst)
      : Error("no route from " + std::to_string(src) + " to " + std::to_string(dst)) {}
};
class RouteExhausted : public Error {
 public:
  RouteExhausted() : Error("nix vector exhausted") {}
};
class CorruptRoute : public Error {
 public:
  using Error::Error;
};

// telemetry
class KindMismatch : public Error {
 public:
  using Error::Error;
};
class TimeRegression : public Error {
 public:
  using Error::Error;
};
class IoFailure : public Error {
 public:
  using Error::Error;
};

// federation
class TooManyPartitions : public Error {
 public:
  using Error::Error;
};
class UnknownPartition : public Error {
 public:
  using Error::Error;
};
class DeadlockDetected : public Error {
 public:
  using Error::Error;
};
class ZeroLookahead : public Error {
 public:
  using Error::Error;
};
class CausalityViolation : public Error {
 public:
  using Error::Error;
};

// harness
class ScenarioError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsnsim
