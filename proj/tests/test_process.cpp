#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "wsnsim/errors.hpp"
#include "wsnsim/kernel.hpp"
#include "wsnsim/process.hpp"
#include "wsnsim/protocols.hpp"

using namespace wsnsim;

namespace {

// Services backed by a real kernel; timers come back as timer interrupts.
class Host : public ProcessServices {
 public:
  Host() {
    kernel.set_handler([this](Event&& e) {
      if (e.kind == EventKind::kTimerExpiry && instance) {
        log.push_back({kernel.now(), std::get<TimerPayload>(e.payload).tag});
        instance->deliver(Interrupt::timer(std::get<TimerPayload>(e.payload).tag));
      }
    });
  }

  SimTime now() const override { return kernel.now(); }
  EventHandle set_timer(NodeId node, Duration delay, std::uint64_t tag) override {
    Event e;
    e.target = node;
    e.kind = EventKind::kTimerExpiry;
    e.payload = TimerPayload{tag};
    return kernel.schedule(std::move(e), kernel.now() + delay);
  }
  bool cancel_timer(EventHandle h) override { return kernel.cancel(h); }
  bool broadcast(NodeId, const Packet& p) override {
    sent.push_back(p);
    return true;
  }
  std::uint64_t next_packet_id(NodeId) override { return ++ids; }
  std::optional<NixVector> compute_route(NodeId, NodeId) override { return std::nullopt; }
  NodeId next_hop(NodeId, NixVector&) override { throw RouteExhausted(); }
  void annotate(std::string_view note) override { notes.emplace_back(note); }
  void record(std::string_view, double) override {}
  void record_series(std::string_view, double) override {}

  Kernel kernel;
  ProcessInstance* instance = nullptr;
  std::vector<std::pair<SimTime, std::uint64_t>> log;
  std::vector<Packet> sent;
  std::vector<std::string> notes;
  std::uint64_t ids = 0;
};

Guard is(InterruptKind k) {
  return [k](const GuardContext& g) { return g.interrupt.kind == k; };
}

Action note(std::string text) {
  return [text](ActionContext& c) { c.services().annotate(text); };
}

bool has(const std::vector<std::string>& diags, const std::string& needle) {
  return std::any_of(diags.begin(), diags.end(), [&](const std::string& d) { return d.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("validate") {
  SUBCASE("single resting state") {
    ProcessModel m("one");
    m.state("A", StateKind::kResting).initial("A");
    CHECK(m.validate().empty());
  }
  SUBCASE("unknown state") {
    ProcessModel m("bad");
    m.state("A", StateKind::kResting).initial("A").transition("A", "X");
    CHECK(has(m.validate(), "unknown state X"));
  }
  SUBCASE("forced cycle") {
    ProcessModel m("loop");
    m.state("A", StateKind::kResting)
        .state("F", StateKind::kForced)
        .state("G", StateKind::kForced)
        .initial("A")
        .transition("A", "F", is(InterruptKind::kUser))
        .transition("F", "G")
        .transition("G", "F");
    CHECK(has(m.validate(), "forced-state cycle"));
  }
  SUBCASE("unreachable, duplicate, bad initial") {
    ProcessModel m("mess");
    m.state("A", StateKind::kResting).state("A", StateKind::kResting).state("Z", StateKind::kResting).initial("Q");
    const auto d = m.validate();
    CHECK(has(d, "duplicate state A"));
    CHECK(has(d, "unknown initial state Q"));
    ProcessModel n("island");
    n.state("A", StateKind::kResting).state("Z", StateKind::kResting).initial("A");
    CHECK(has(n.validate(), "unreachable state Z"));
  }
  SUBCASE("a resting state breaks a cycle") {
    ProcessModel m("ok");
    m.state("A", StateKind::kResting)
        .state("F", StateKind::kForced)
        .initial("A")
        .transition("A", "F", is(InterruptKind::kUser))
        .transition("F", "A");
    CHECK(m.validate().empty());
  }
  SUBCASE("instances refuse invalid models") {
    ProcessModel m("bad");
    m.state("A", StateKind::kResting).initial("A").transition("A", "X");
    Host h;
    CHECK_THROWS_AS(ProcessInstance(std::make_shared<ProcessModel>(m), 0, h), InvalidModel);
  }
}

TEST_CASE("deliver picks the transition whose guard holds") {
  auto m = std::make_shared<ProcessModel>("route");
  m->state("A", StateKind::kResting)
      .state("B", StateKind::kResting)
      .state("C", StateKind::kResting)
      .initial("A")
      .transition("A", "B", is(InterruptKind::kTimer))
      .transition("A", "C", is(InterruptKind::kPacketArrival));
  Host h;
  ProcessInstance p(m, 0, h);
  p.start();
  CHECK(p.deliver(Interrupt::timer(1)) == "B");
  ProcessInstance q(m, 1, h);
  q.start();
  CHECK(q.deliver(Interrupt::arrival(Packet(1, 0, kBroadcast, 8), 0)) == "C");
  // nothing matches: consumed, counted, unchanged
  ProcessInstance r(m, 2, h);
  r.start();
  CHECK(r.deliver(Interrupt::user("noise")) == "A");
  CHECK(r.unmatched() == 1);
  CHECK(r.fired() == 0);
}

TEST_CASE("two satisfied guards are ambiguous") {
  auto m = std::make_shared<ProcessModel>("amb");
  m->state("A", StateKind::kResting)
      .state("B", StateKind::kResting)
      .state("C", StateKind::kResting)
      .initial("A")
      .transition("A", "B", is(InterruptKind::kTimer))
      .transition("A", "C", [](const GuardContext& g) { return g.interrupt.tag == 4; });
  Host h;
  ProcessInstance p(m, 0, h);
  p.start();
  CHECK_THROWS_AS(p.deliver(Interrupt::timer(4)), AmbiguousTransition);
  CHECK(p.state() == "A");
  CHECK(p.deliver(Interrupt::timer(3)) == "B");
}

TEST_CASE("forced traversal runs exit, transition and entry actions at one instant") {
  auto m = std::make_shared<ProcessModel>("forced");
  m->state("A", StateKind::kResting, note("enter A"), note("exit A"))
      .state("F", StateKind::kForced, note("enter F"), note("exit F"))
      .state("B", StateKind::kResting, note("enter B"), note("exit B"))
      .initial("A")
      .transition("A", "F", {}, note("A->F"))
      .transition("F", "B", {}, note("F->B"));
  Host h;
  h.kernel.set_handler([](Event&&) {});
  h.kernel.run_until(SimTime::from_seconds(3));
  ProcessInstance p(m, 0, h);
  p.start();
  h.notes.clear();
  CHECK(p.deliver(Interrupt::user("go")) == "B");
  CHECK(h.now() == SimTime::from_seconds(3));
  CHECK(p.resting());
  CHECK(h.notes == std::vector<std::string>{"exit A", "A->F", "enter F", "exit F", "F->B", "enter B"});
}

TEST_CASE("timers") {
  auto m = std::make_shared<ProcessModel>("timers");
  m->state("A", StateKind::kResting).initial("A").transition("A", "A", is(InterruptKind::kTimer));
  Host h;
  ProcessInstance p(m, 0, h);
  h.instance = &p;
  p.start();

  SUBCASE("zero delay fires after the current handler at the same time") {
    std::vector<std::string> order;
    h.kernel.set_handler([&](Event&& e) {
      if (e.kind == EventKind::kUserDefined) {
        order.push_back("handler-start");
        h.set_timer(0, Duration{}, 9);
        order.push_back("handler-end");
      } else {
        order.push_back("timer@" + format_seconds(h.now()));
        p.deliver(Interrupt::timer(9));
      }
    });
    Event e;
    e.target = 0;
    e.kind = EventKind::kUserDefined;
    h.kernel.schedule(std::move(e), SimTime::from_seconds(1));
    h.kernel.run_until(SimTime::from_seconds(2));
    CHECK(order == std::vector<std::string>{"handler-start", "handler-end", "timer@1.000000000"});
  }
  SUBCASE("cancelled timer never fires") {
    const auto handle = h.set_timer(0, Duration::secs(5), 1);
    CHECK(h.cancel_timer(handle));
    h.kernel.run_until(SimTime::from_seconds(10));
    CHECK(h.log.empty());
  }
  SUBCASE("timers fire in delay order") {
    h.set_timer(0, Duration::secs(2), 2);
    h.set_timer(0, Duration::secs(1), 1);
    h.kernel.run_until(SimTime::from_seconds(10));
    REQUIRE(h.log.size() == 2);
    CHECK(h.log[0] == std::make_pair(SimTime::from_seconds(1), std::uint64_t{1}));
    CHECK(h.log[1] == std::make_pair(SimTime::from_seconds(2), std::uint64_t{2}));
    CHECK(p.fired() == 2);
  }
}

TEST_CASE("deliver is not re-entrant") {
  auto m = std::make_shared<ProcessModel>("reenter");
  ProcessInstance* self = nullptr;
  m->state("A", StateKind::kResting)
      .initial("A")
      .transition("A", "A", {}, [&](ActionContext&) { self->deliver(Interrupt::user("again")); });
  Host h;
  ProcessInstance p(m, 0, h);
  self = &p;
  p.start();
  CHECK_THROWS(p.deliver(Interrupt::user("x")));
  // the flag is cleared after the failure
  CHECK_THROWS(p.deliver(Interrupt::user("y")));
}

namespace {

// Calls every guard of the current state twice on the same interrupt and
// checks that results and variables stay put.
void check_guard_purity(const ProcessInstance& p, const Interrupt& i, SimTime now) {
  const Variables before = p.vars();
  const GuardContext ctx{p.node(), now, i, p.vars()};
  for (const auto& t : p.model().transitions()) {
    if (t.from != p.state() || !t.guard) continue;
    const bool first = t.guard(ctx);
    const bool second = t.guard(ctx);
    REQUIRE(first == second);
  }
  REQUIRE(p.vars() == before);
}

}  // namespace

TEST_CASE("property: built-in protocol guards are pure") {
  Scenario s;
  for (const auto& name : registered_processes()) {
    auto model = make_process_model(name, s);
    Host h;
    ProcessInstance p(model, 0, h);
    p.start();
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
      Interrupt in;
      switch (rng() % 4) {
        case 0: {
          Packet pkt(rng() % 5, 1, kBroadcast, 64);
          pkt.flow = rng() % 5;
          in = Interrupt::arrival(pkt, 1);
          break;
        }
        case 1: in = Interrupt::timer(kFloodTimerTag); break;
        case 2: in = Interrupt::user(rng() % 2 ? "originate" : "send", 1 + rng() % 3); break;
        default: in = Interrupt::energy_depleted();
      }
      check_guard_purity(p, in, h.now());
      try {
        p.deliver(in);
      } catch (const Error&) {
      }
      REQUIRE(p.resting());
    }
  }
}

namespace {

// Random model: resting states split interrupts by tag residue, forced
// states have one unconditional exit.
std::shared_ptr<ProcessModel> random_model(std::mt19937_64& rng) {
  const int n = 2 + static_cast<int>(rng() % 6);
  auto m = std::make_shared<ProcessModel>("random");
  std::vector<bool> forced(n);
  for (int i = 0; i < n; ++i) {
    forced[i] = i > 0 && rng() % 3 == 0;
    m->state("S" + std::to_string(i), forced[i] ? StateKind::kForced : StateKind::kResting,
             [](ActionContext& c) { ++std::get<std::int64_t>(c.vars()["entries"]); });
  }
  m->initial("S0").variable("entries", std::int64_t{0});
  for (int i = 0; i < n; ++i) {
    if (forced[i]) {
      m->transition("S" + std::to_string(i), "S" + std::to_string(rng() % n));
      continue;
    }
    const std::uint64_t mod = 1 + rng() % 3;
    for (std::uint64_t r = 0; r < mod; ++r) {
      if (rng() % 4 == 0) continue;
      m->transition("S" + std::to_string(i), "S" + std::to_string(rng() % n),
                    [mod, r](const GuardContext& g) { return g.interrupt.tag % mod == r; });
    }
  }
  return m;
}

std::vector<std::string> trajectory(const std::shared_ptr<ProcessModel>& m, std::uint64_t seed) {
  Host h;
  ProcessInstance p(m, 0, h);
  p.start();
  std::mt19937_64 rng(seed);
  std::vector<std::string> out{p.state()};
  for (int i = 0; i < 100; ++i) {
    out.push_back(p.deliver(Interrupt::user("u", rng() % 7)));
    REQUIRE(p.resting());
  }
  return out;
}

}  // namespace

TEST_CASE("property: validated models run without structural errors and deterministically") {
  std::mt19937_64 rng(17);
  int valid = 0;
  for (int trial = 0; trial < 500; ++trial) {
    auto m = random_model(rng);
    if (!m->validate().empty()) {
      Host h;
      CHECK_THROWS_AS(ProcessInstance(m, 0, h), InvalidModel);
      continue;
    }
    ++valid;
    const auto a = trajectory(m, trial);
    CHECK(a == trajectory(m, trial));
    for (const auto& s : a) REQUIRE(m->index_of(s).has_value());
  }
  CHECK(valid > 50);
}

TEST_CASE("flood model rebroadcasts once per flow") {
  Scenario s;
  auto m = make_flood_model(Duration::secs(1), s.packet);
  Host h;
  ProcessInstance p(m, 3, h);
  p.start();
  Packet pkt(77, 0, kBroadcast, 512);
  pkt.flow = 77;
  p.deliver(Interrupt::arrival(pkt, 0));
  p.deliver(Interrupt::arrival(pkt, 1));
  REQUIRE(h.sent.size() == 1);
  CHECK(h.sent[0].flow == 77);
  CHECK(h.sent[0].size_bits() == s.packet.size_bits());
  CHECK(p.state() == "wait");
}
