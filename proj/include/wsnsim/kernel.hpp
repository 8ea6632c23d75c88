#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wsnsim/packet.hpp"
#include "wsnsim/sim_time.hpp"

namespace wsnsim {

using EventId = std::uint64_t;

/// Target value for events that belong to the kernel rather than a node.
inline constexpr NodeId kInternal = 0xFFFFFFu;

enum class EventKind : std::uint8_t {
  kPacketArrival,
  kTimerExpiry,
  kInterruptDelivery,
  kMobilityUpdate,
  kEnergySample,
  kUserDefined,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct ArrivalPayload {
  Packet packet;
  NodeId from = 0;
  double distance_m = 0.0;
  SimTime sent_at;
};

struct TimerPayload {
  std::uint64_t tag = 0;
};

struct UserPayload {
  std::string tag;
  std::uint64_t value = 0;
};

enum class EnergyNote : std::uint8_t { kTxEnd, kDepletionCheck, kDepleted };

struct EnergyPayload {
  EnergyNote note = EnergyNote::kDepletionCheck;
};

using Payload =
    std::variant<std::monostate, ArrivalPayload, TimerPayload, UserPayload, EnergyPayload>;

struct Event {
  EventId id = 0;
  SimTime time;
  NodeId target = kInternal;
  EventKind kind = EventKind::kUserDefined;
  Payload payload;
};

struct EventHandle {
  EventId id = 0;
  std::uint32_t slot = 0;

  friend bool operator==(const EventHandle&, const EventHandle&) = default;
};

struct DispatchSummary {
  std::uint64_t events_dispatched = 0;
  double wall_seconds = 0.0;
  std::size_t peak_pending = 0;
};

struct KernelConfig {
  Duration bucket_width = Duration::millis(1);
  std::size_t bucket_count = 1024;
  /// Packet arrivals for one node that are scheduled in timestamp order are
  /// parked in a per-node FIFO; only the head competes in the event set.
  bool receive_queues = true;
};

/// Event ids pack a logical (Lamport) clock over the creating node:
/// id = clock << 24 | creator. An event scheduled while another is being
/// dispatched always gets a larger id than its parent, and the value does not
/// depend on how nodes are spread across kernels.
inline constexpr unsigned kCreatorBits = 24;
inline constexpr EventId kCreatorMask = (EventId{1} << kCreatorBits) - 1;
inline constexpr EventId lamport_of(EventId id) { return id >> kCreatorBits; }
inline constexpr NodeId creator_of(EventId id) { return static_cast<NodeId>(id & kCreatorMask); }

/// Single-threaded discrete-event engine. Pending events live in a bucketed
/// time wheel (near future) backed by an ordered overflow heap, with one
/// receive FIFO per node. Dispatch order is (time, id).
class Kernel {
 public:
  using Handler = std::function<void(Event&&)>;

  explicit Kernel(KernelConfig config = {});

  void set_handler(Handler handler) { handler_ = std::move(handler); }

  SimTime now() const { return now_; }

  /// Assigns a fresh id and enqueues the event at `at`. Throws PastTime.
  EventHandle schedule(Event event, SimTime at);
  /// Same as schedule(), with the id drawn from `creator`'s logical clock.
  /// Outside dispatch this is how setup code acts on behalf of a node.
  EventHandle schedule_from(NodeId creator, Event event, SimTime at);
  /// Draws the id schedule() would have used, without enqueuing anything.
  EventId next_id();
  EventId next_id_from(NodeId creator);
  /// Enqueues an event whose id was assigned elsewhere (e.g. by another
  /// partition's kernel). The time must not precede now().
  EventHandle inject(Event event);

  bool cancel(EventHandle handle);

  DispatchSummary run_until(SimTime stop);

  /// Time of the earliest pending event, if any.
  std::optional<SimTime> next_event_time();

  std::size_t pending() const { return live_; }
  std::uint64_t dispatched() const { return dispatched_; }
  /// Time of the last dispatched event, if any.
  std::optional<SimTime> last_dispatch_time() const { return last_dispatch_; }
  /// Id of the event whose handler is currently running.
  std::optional<EventId> current_event() const { return current_; }

 private:
  struct Entry {
    std::uint64_t time;
    EventId id;
    std::uint32_t slot;
    NodeId fifo_owner;  // kInternal when not parked in a receive queue

    bool operator>(const Entry& o) const { return time != o.time ? time > o.time : id > o.id; }
  };
  enum class SlotState : std::uint8_t { kFree, kPending, kCancelled };
  struct Slot {
    Event event;
    SlotState state = SlotState::kFree;
  };
  struct ReceiveQueue {
    std::vector<Entry> items;
    std::size_t head = 0;
    bool empty() const { return head == items.size(); }
  };
  using MinHeap = std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>>;

  EventId allocate_id(NodeId creator);
  EventHandle enqueue(Event event);
  void insert(const Entry& e);
  void pop_front();
  std::optional<Entry> peek();
  void release(std::uint32_t slot);

  KernelConfig config_;
  Handler handler_;
  SimTime now_;
  std::optional<SimTime> last_dispatch_;
  std::optional<EventId> current_;
  NodeId current_target_ = kInternal;

  std::vector<std::uint64_t> clocks_;  // per creator logical clock
  std::uint64_t internal_clock_ = 0;

  std::vector<Slot> slots_;
  std::vector<std::uint32_t> free_slots_;
  std::vector<ReceiveQueue> receive_queues_;

  MinHeap current_bucket_;
  std::vector<std::vector<Entry>> wheel_;
  std::uint64_t base_bucket_ = 0;
  std::size_t wheel_count_ = 0;
  MinHeap overflow_;

  std::size_t live_ = 0;
  std::size_t peak_live_ = 0;
  std::uint64_t dispatched_ = 0;
};

}  // namespace wsnsim
