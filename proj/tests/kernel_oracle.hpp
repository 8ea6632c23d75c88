#pragma once
// Reference kernel for equivalence checks, shared by the unit tests and the
// acceptance run.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "wsnsim/kernel.hpp"

namespace wsnsim::testing {

// Naive pending list: linear scan for the smallest (time, id). Ids follow the
// logical-clock rule written out independently here.
class NaiveKernel {
 public:
  struct Item {
    Event event;
    bool live = true;
  };

  EventId allocate(NodeId creator) {
    const std::uint64_t parent = current_ ? (*current_ >> 24) : 0;
    std::uint64_t& clock = creator == kInternal ? internal_ : clocks_[creator];
    clock = std::max(clock, parent) + 1;
    internal_ = std::max(internal_, clock);
    return clock << 24 | creator;
  }
  std::size_t schedule(Event e, SimTime at, std::optional<NodeId> creator = std::nullopt) {
    e.time = at;
    e.id = allocate(creator ? *creator : (current_ ? current_target_ : kInternal));
    items_.push_back({std::move(e), true});
    return items_.size() - 1;
  }
  bool cancel(std::size_t h) {
    if (!items_[h].live) return false;
    items_[h].live = false;
    return true;
  }
  template <typename F>
  void run_until(SimTime stop, F&& handler) {
    for (;;) {
      std::optional<std::size_t> best;
      for (std::size_t i = 0; i < items_.size(); ++i) {
        if (!items_[i].live || items_[i].event.time > stop) continue;
        if (!best || std::pair(items_[i].event.time, items_[i].event.id) <
                         std::pair(items_[*best].event.time, items_[*best].event.id))
          best = i;
      }
      if (!best) break;
      items_[*best].live = false;
      now_ = items_[*best].event.time;
      current_ = items_[*best].event.id;
      current_target_ = items_[*best].event.target;
      handler(Event(items_[*best].event));
      current_.reset();
    }
    now_ = stop;
  }
  SimTime now() const { return now_; }

 private:
  std::vector<Item> items_;
  std::map<NodeId, std::uint64_t> clocks_;
  std::uint64_t internal_ = 0;
  std::optional<EventId> current_;
  NodeId current_target_ = kInternal;
  SimTime now_;
};

struct Dispatch {
  std::uint64_t time;
  EventId id;
  NodeId target;
  EventKind kind;
  friend bool operator==(const Dispatch&, const Dispatch&) = default;
};

// Random workload driven through either engine. Handlers spawn children and
// cancel earlier handles, drawing decisions from a stream consumed in dispatch
// order, so any ordering difference shows up as a diverging log.
template <typename Engine, typename Sched, typename Cancel, typename Run>
std::vector<Dispatch> drive(std::uint64_t seed, Engine& engine, Sched sched, Cancel cancel, Run run) {
  std::mt19937_64 rng(seed);
  const NodeId nodes = 1 + static_cast<NodeId>(rng() % 12);
  const std::uint64_t horizon = 1 + rng() % 50'000'000;  // up to 50 ms
  std::vector<Dispatch> log;
  std::vector<std::size_t> handles;
  std::vector<bool> cancel_results;

  auto random_event = [&]() {
    Event e;
    e.target = rng() % 5 == 0 ? kInternal : static_cast<NodeId>(rng() % nodes);
    e.kind = rng() % 3 == 0 ? EventKind::kPacketArrival : EventKind::kTimerExpiry;
    return e;
  };
  auto random_delay = [&]() -> std::uint64_t {
    switch (rng() % 4) {
      case 0: return 0;
      case 1: return rng() % 1000;
      case 2: return rng() % 3'000'000;
      default: return rng() % (horizon * 3);  // lands past the wheel sometimes
    }
  };
  auto handler = [&](Event&& e) {
    log.push_back({e.time.ticks, e.id, e.target, e.kind});
    const int children = static_cast<int>(rng() % 3);
    for (int c = 0; c < children && log.size() < 400; ++c)
      handles.push_back(sched(random_event(), SimTime{e.time.ticks + random_delay()}, std::nullopt));
    if (!handles.empty() && rng() % 4 == 0) cancel_results.push_back(cancel(handles[rng() % handles.size()]));
  };

  const int initial = 1 + static_cast<int>(rng() % 60);
  for (int i = 0; i < initial; ++i) {
    Event e = random_event();
    const NodeId creator = e.target;
    handles.push_back(sched(std::move(e), SimTime{rng() % horizon}, creator));
  }
  for (int i = 0; i < 5; ++i)
    if (!handles.empty()) cancel_results.push_back(cancel(handles[rng() % handles.size()]));
  run(SimTime{horizon}, handler);
  run(SimTime{horizon * 4}, handler);
  for (bool b : cancel_results) log.push_back({b, 0, 0, EventKind::kUserDefined});
  (void)engine;
  return log;
}

inline std::vector<Dispatch> with_kernel(std::uint64_t seed, KernelConfig cfg) {
  Kernel k(cfg);
  std::vector<EventHandle> handles;
  std::function<void(Event&&)> current;
  k.set_handler([&](Event&& e) { current(std::move(e)); });
  return drive(
      seed, k,
      [&](Event e, SimTime at, std::optional<NodeId> creator) {
        handles.push_back(creator ? k.schedule_from(*creator, std::move(e), at) : k.schedule(std::move(e), at));
        return handles.size() - 1;
      },
      [&](std::size_t h) { return k.cancel(handles[h]); },
      [&](SimTime stop, auto& handler) {
        current = handler;
        k.run_until(stop);
      });
}

inline std::vector<Dispatch> with_oracle(std::uint64_t seed) {
  NaiveKernel k;
  return drive(
      seed, k, [&](Event e, SimTime at, std::optional<NodeId> creator) { return k.schedule(std::move(e), at, creator); },
      [&](std::size_t h) { return k.cancel(h); }, [&](SimTime stop, auto& handler) { k.run_until(stop, handler); });
}

}  // namespace wsnsim::testing
