#include "wsnsim/kernel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

namespace wsnsim {

Duration Duration::from_seconds(double s) {
  if (!std::isfinite(s) || s < 0.0) throw PastTime("duration must be finite and non-negative");
  const double ns = std::round(s * 1e9);
  if (ns >= 18446744073709551615.0) throw TimeOverflow("duration out of range");
  return Duration{static_cast<std::uint64_t>(ns)};
}

std::string format_seconds(SimTime t) {
  std::string frac = std::to_string(t.ticks % 1000000000ULL);
  frac.insert(0, 9 - frac.size(), '0');
  return std::to_string(t.ticks / 1000000000ULL) + "." + frac;
}

namespace {

constexpr std::string_view kKindNames[] = {
    "packet-arrival", "timer-expiry", "interrupt-delivery",
    "mobility-update", "energy-sample", "user-defined",
};

constexpr std::uint64_t kMaxLamport = (std::uint64_t{1} << (64 - kCreatorBits)) - 1;

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i)
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  return std::nullopt;
}

Kernel::Kernel(KernelConfig config) : config_(config) {
  if (config_.bucket_width.ns == 0) throw Error("bucket width must be positive");
  if (config_.bucket_count < 2) throw Error("time wheel needs at least two buckets");
  wheel_.resize(config_.bucket_count);
}

EventId Kernel::allocate_id(NodeId creator) {
  if (creator > kInternal) throw UnknownNode(creator);
  const std::uint64_t parent = current_ ? lamport_of(*current_) : 0;
  std::uint64_t* clock = &internal_clock_;
  if (creator != kInternal) {
    if (creator >= clocks_.size()) clocks_.resize(creator + 1, 0);
    clock = &clocks_[creator];
  }
  const std::uint64_t base = std::max(*clock, parent);
  if (base >= kMaxLamport) throw TimeOverflow("event id space exhausted");
  *clock = base + 1;
  // Kernel-internal events always order after everything created so far.
  internal_clock_ = std::max(internal_clock_, *clock);
  return (*clock << kCreatorBits) | creator;
}

EventId Kernel::next_id() { return allocate_id(current_ ? current_target_ : kInternal); }

EventId Kernel::next_id_from(NodeId creator) { return allocate_id(creator); }

EventHandle Kernel::schedule(Event event, SimTime at) {
  if (at < now_)
    throw PastTime("cannot schedule at " + std::to_string(at.ticks) + " ns, now is " +
                   std::to_string(now_.ticks) + " ns");
  event.time = at;
  event.id = next_id();
  return enqueue(std::move(event));
}

EventHandle Kernel::schedule_from(NodeId creator, Event event, SimTime at) {
  if (at < now_)
    throw PastTime("cannot schedule at " + std::to_string(at.ticks) + " ns, now is " +
                   std::to_string(now_.ticks) + " ns");
  event.time = at;
  event.id = allocate_id(creator);
  return enqueue(std::move(event));
}

EventHandle Kernel::inject(Event event) {
  if (event.time < now_)
    throw PastTime("injected event " + std::to_string(event.id) + " precedes the clock");
  return enqueue(std::move(event));
}

EventHandle Kernel::enqueue(Event event) {
  std::uint32_t slot;
  if (!free_slots_.empty()) {
    slot = free_slots_.back();
    free_slots_.pop_back();
  } else {
    slot = static_cast<std::uint32_t>(slots_.size());
    slots_.emplace_back();
  }
  const Entry entry{event.time.ticks, event.id, slot, kInternal};
  const bool parkable = config_.receive_queues && event.kind == EventKind::kPacketArrival &&
                        event.target < kInternal;
  const NodeId target = event.target;
  slots_[slot].event = std::move(event);
  slots_[slot].state = SlotState::kPending;
  ++live_;
  peak_live_ = std::max(peak_live_, live_);

  if (parkable) {
    if (target >= receive_queues_.size()) receive_queues_.resize(target + 1);
    ReceiveQueue& q = receive_queues_[target];
    Entry parked = entry;
    parked.fifo_owner = target;
    if (q.empty()) {
      q.items.push_back(parked);
      insert(parked);
      return {entry.id, slot};
    }
    if (!(q.items.back() > parked)) {
      q.items.push_back(parked);
      return {entry.id, slot};
    }
  }
  insert(entry);
  return {entry.id, slot};
}

void Kernel::insert(const Entry& e) {
  const std::uint64_t bucket = e.time / config_.bucket_width.ns;
  if (bucket <= base_bucket_) {
    current_bucket_.push(e);
  } else if (bucket - base_bucket_ < config_.bucket_count) {
    wheel_[bucket % config_.bucket_count].push_back(e);
    ++wheel_count_;
  } else {
    overflow_.push(e);
  }
}

void Kernel::release(std::uint32_t slot) {
  slots_[slot].event = Event{};
  slots_[slot].state = SlotState::kFree;
  free_slots_.push_back(slot);
}

void Kernel::pop_front() {
  const Entry e = current_bucket_.top();
  current_bucket_.pop();
  if (e.fifo_owner != kInternal) {
    ReceiveQueue& q = receive_queues_[e.fifo_owner];
    ++q.head;
    if (q.empty()) {
      q.items.clear();
      q.head = 0;
    } else {
      if (q.head >= 64 && q.head * 2 >= q.items.size()) {
        q.items.erase(q.items.begin(), q.items.begin() + static_cast<std::ptrdiff_t>(q.head));
        q.head = 0;
      }
      insert(q.items[q.head]);
    }
  }
  if (slots_[e.slot].state == SlotState::kCancelled) release(e.slot);
}

std::optional<Kernel::Entry> Kernel::peek() {
  const std::uint64_t n = config_.bucket_count;
  const std::uint64_t width = config_.bucket_width.ns;
  for (;;) {
    if (!current_bucket_.empty()) {
      const Entry top = current_bucket_.top();
      if (slots_[top.slot].state == SlotState::kCancelled) {
        pop_front();
        continue;
      }
      return top;
    }
    if (wheel_count_ == 0) {
      if (overflow_.empty()) return std::nullopt;
      base_bucket_ = overflow_.top().time / width;
    } else {
      ++base_bucket_;
    }
    while (!overflow_.empty() && overflow_.top().time / width < base_bucket_ + n) {
      const Entry e = overflow_.top();
      overflow_.pop();
      insert(e);
    }
    auto& bucket = wheel_[base_bucket_ % n];
    for (const Entry& e : bucket) current_bucket_.push(e);
    wheel_count_ -= bucket.size();
    bucket.clear();
  }
}

std::optional<SimTime> Kernel::next_event_time() {
  if (auto e = peek()) return SimTime{e->time};
  return std::nullopt;
}

bool Kernel::cancel(EventHandle handle) {
  if (handle.slot >= slots_.size()) return false;
  Slot& s = slots_[handle.slot];
  if (s.state != SlotState::kPending || s.event.id != handle.id) return false;
  s.state = SlotState::kCancelled;
  s.event.payload = std::monostate{};
  --live_;
  return true;
}

DispatchSummary Kernel::run_until(SimTime stop) {
  if (current_) throw Error("run_until called from inside an event handler");
  if (stop < now_)
    throw PastTime("run_until(" + std::to_string(stop.ticks) + ") is before now (" +
                   std::to_string(now_.ticks) + ")");
  const auto wall_start = std::chrono::steady_clock::now();
  DispatchSummary summary;
  for (;;) {
    const auto next = peek();
    if (!next || next->time > stop.ticks) break;
    pop_front();
    Event event = std::move(slots_[next->slot].event);
    release(next->slot);
    --live_;
    now_ = event.time;
    last_dispatch_ = event.time;
    current_ = event.id;
    current_target_ = event.target;
    ++dispatched_;
    ++summary.events_dispatched;
    const EventId id = event.id;
    try {
      if (handler_) handler_(std::move(event));
    } catch (const std::exception& ex) {
      current_.reset();
      std::throw_with_nested(HandlerFault(id, ex.what()));
    } catch (...) {
      current_.reset();
      std::throw_with_nested(HandlerFault(id, "unknown exception"));
    }
    current_.reset();
  }
  now_ = stop;
  summary.peak_pending = peak_live_;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return summary;
}

}  // namespace wsnsim
