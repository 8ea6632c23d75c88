#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wsnsim/kernel.hpp"
#include "wsnsim/nix_vector.hpp"
#include "wsnsim/packet.hpp"
#include "wsnsim/sim_time.hpp"

namespace wsnsim {

enum class InterruptKind : std::uint8_t { kPacketArrival, kTimer, kEnergyDepleted, kUser };

struct Interrupt {
  InterruptKind kind = InterruptKind::kUser;
  /// Set for packet arrivals.
  std::optional<Packet> packet;
  NodeId from = 0;
  /// Timer tag, or the user value.
  std::uint64_t tag = 0;
  /// User interrupt name.
  std::string name;

  static Interrupt arrival(Packet p, NodeId from) {
    Interrupt i;
    i.kind = InterruptKind::kPacketArrival;
    i.packet = std::move(p);
    i.from = from;
    return i;
  }
  static Interrupt timer(std::uint64_t tag) {
    Interrupt i;
    i.kind = InterruptKind::kTimer;
    i.tag = tag;
    return i;
  }
  static Interrupt user(std::string name, std::uint64_t value = 0) {
    Interrupt i;
    i.kind = InterruptKind::kUser;
    i.name = std::move(name);
    i.tag = value;
    return i;
  }
  static Interrupt energy_depleted() {
    Interrupt i;
    i.kind = InterruptKind::kEnergyDepleted;
    return i;
  }
};

using IdSet = std::set<std::uint64_t>;
using Value = std::variant<std::int64_t, double, bool, std::string, IdSet>;
using Variables = std::map<std::string, Value, std::less<>>;

/// What a process may ask of the simulation it runs in.
class ProcessServices {
 public:
  virtual ~ProcessServices() = default;
  virtual SimTime now() const = 0;
  virtual EventHandle set_timer(NodeId node, Duration delay, std::uint64_t tag) = 0;
  virtual bool cancel_timer(EventHandle handle) = 0;
  /// Returns false if the node has no energy left to send.
  virtual bool broadcast(NodeId node, const Packet& packet) = 0;
  virtual std::uint64_t next_packet_id(NodeId node) = 0;
  virtual std::optional<NixVector> compute_route(NodeId src, NodeId dst) = 0;
  virtual NodeId next_hop(NodeId node, NixVector& route) = 0;
  /// Attaches a note to the trace line of the event being handled.
  virtual void annotate(std::string_view note) = 0;
  virtual void record(std::string_view probe, double value) = 0;
  /// Appends (now, value) to a time-series probe.
  virtual void record_series(std::string_view probe, double value) = 0;
};

/// Read-only view handed to guards.
struct GuardContext {
  NodeId node;
  SimTime now;
  const Interrupt& interrupt;
  const Variables& vars;
};

class ActionContext {
 public:
  ActionContext(NodeId node, const Interrupt& interrupt, Variables& vars, ProcessServices& services)
      : node_(node), interrupt_(interrupt), vars_(vars), services_(services) {}

  NodeId node() const { return node_; }
  SimTime now() const { return services_.now(); }
  const Interrupt& interrupt() const { return interrupt_; }
  Variables& vars() { return vars_; }
  ProcessServices& services() { return services_; }

  template <typename T>
  T& var(std::string_view name) {
    auto it = vars_.find(name);
    if (it == vars_.end()) throw Error("unknown process variable " + std::string(name));
    return std::get<T>(it->second);
  }

  EventHandle set_timer(Duration delay, std::uint64_t tag) { return services_.set_timer(node_, delay, tag); }

 private:
  NodeId node_;
  const Interrupt& interrupt_;
  Variables& vars_;
  ProcessServices& services_;
};

using Guard = std::function<bool(const GuardContext&)>;
using Action = std::function<void(ActionContext&)>;

enum class StateKind : std::uint8_t { kResting, kForced };

/// Finite-state protocol description. Resting states are where simulated
/// time passes; forced states are traversed immediately. Guards must be
/// pure; actions (state entry/exit, transition) carry the behavior.
class ProcessModel {
 public:
  struct State {
    std::string name;
    StateKind kind = StateKind::kResting;
    Action on_enter;
    Action on_exit;
  };
  struct Transition {
    std::string from;
    std::string to;
    Guard guard;  // empty: always true
    Action action;
  };

  explicit ProcessModel(std::string name) : name_(std::move(name)) {}

  ProcessModel& state(std::string name, StateKind kind, Action on_enter = {}, Action on_exit = {});
  ProcessModel& transition(std::string from, std::string to, Guard guard = {}, Action action = {});
  ProcessModel& initial(std::string name);
  ProcessModel& variable(std::string name, Value initial);

  /// Empty when the model is well formed.
  std::vector<std::string> validate() const;

  const std::string& name() const { return name_; }
  const std::vector<State>& states() const { return states_; }
  const std::vector<Transition>& transitions() const { return transitions_; }
  const std::string& initial_state() const { return initial_; }
  const Variables& variables() const { return variables_; }
  std::optional<std::size_t> index_of(std::string_view state) const;

 private:
  std::string name_;
  std::vector<State> states_;
  std::vector<Transition> transitions_;
  std::string initial_;
  Variables variables_;
};

/// One node's running copy of a process model.
class ProcessInstance {
 public:
  /// Throws InvalidModel when the model does not validate.
  ProcessInstance(std::shared_ptr<const ProcessModel> model, NodeId node, ProcessServices& services);

  /// Enters the initial state (running its entry action and any forced chain).
  void start();

  /// Fires the unique transition whose guard holds, then keeps going
  /// through forced states until a resting one is reached; all at the same
  /// simulated time. With no satisfied guard the interrupt is consumed and
  /// the state is unchanged. Two or more satisfied guards throw
  /// AmbiguousTransition.
  const std::string& deliver(const Interrupt& interrupt);

  const std::string& state() const;
  bool resting() const;
  NodeId node() const { return node_; }
  const ProcessModel& model() const { return *model_; }
  const Variables& vars() const { return vars_; }
  Variables& vars() { return vars_; }
  std::uint64_t unmatched() const { return unmatched_; }
  std::uint64_t fired() const { return fired_; }

 private:
  std::optional<std::size_t> select(std::size_t state, const Interrupt& interrupt) const;
  void run(const Action& action, const Interrupt& interrupt);
  void settle_forced(const Interrupt& interrupt);

  std::shared_ptr<const ProcessModel> model_;
  NodeId node_;
  ProcessServices& services_;
  Variables vars_;
  std::size_t current_ = 0;
  std::vector<std::size_t> to_index_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::uint64_t unmatched_ = 0;
  std::uint64_t fired_ = 0;
  bool delivering_ = false;
};

}  // namespace wsnsim
