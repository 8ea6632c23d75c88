#include "wsnsim/protocols.hpp"

#include <map>
#include <mutex>

#include "wsnsim/errors.hpp"

namespace wsnsim {

namespace {

struct Registry {
  std::mutex mu;
  std::map<std::string, ProcessFactory, std::less<>> factories;
};

Registry& registry() {
  static Registry r;
  static const bool seeded = [] {
    auto& f = r.factories;
    f["flood"] = [](const Scenario& s) {
      return make_flood_model(Duration::from_seconds(s.flood.interval_s), s.packet);
    };
    f["unicast"] = [](const Scenario& s) { return make_unicast_model(s.packet); };
    f["idle"] = [](const Scenario&) { return make_idle_model(); };
    return true;
  }();
  (void)seeded;
  return r;
}

bool is_arrival(const GuardContext& c) {
  return c.interrupt.kind == InterruptKind::kPacketArrival && c.interrupt.packet.has_value();
}

bool is_user(const GuardContext& c, std::string_view name) {
  return c.interrupt.kind == InterruptKind::kUser && c.interrupt.name == name;
}

}  // namespace

void register_process_model(std::string name, ProcessFactory factory) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  r.factories[std::move(name)] = std::move(factory);
}

std::shared_ptr<const ProcessModel> make_process_model(std::string_view name, const Scenario& scenario) {
  Registry& r = registry();
  ProcessFactory factory;
  {
    std::lock_guard lock(r.mu);
    auto it = r.factories.find(name);
    if (it == r.factories.end()) throw InvalidModel("unknown process model '" + std::string(name) + "'");
    factory = it->second;
  }
  return factory(scenario);
}

bool is_registered_process(std::string_view name) {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  return r.factories.find(name) != r.factories.end();
}

std::vector<std::string> registered_processes() {
  Registry& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> out;
  for (const auto& [name, f] : r.factories) out.push_back(name);
  return out;
}

std::shared_ptr<const ProcessModel> make_flood_model(Duration interval, PacketSpec spec) {
  auto model = std::make_shared<ProcessModel>("flood");

  auto relay = [spec](ActionContext& ctx) {
    const Packet& in = *ctx.interrupt().packet;
    ctx.var<IdSet>("seen").insert(in.flow);
    ctx.services().annotate("first-rx");
    ctx.services().record("flood.first_rx", 1.0);
    ctx.services().record_series("flood.first_rx_node", static_cast<double>(ctx.node()));
    Packet out(ctx.services().next_packet_id(ctx.node()), ctx.node(), kBroadcast, spec.payload_bits);
    out.push_header("flood", spec.header_bits);
    out.flow = in.flow;
    if (ctx.services().broadcast(ctx.node(), out)) ctx.services().record("flood.relayed", 1.0);
  };

  auto originate = [spec, interval](ActionContext& ctx) {
    auto& remaining = ctx.var<std::int64_t>("remaining");
    if (ctx.interrupt().kind == InterruptKind::kUser) remaining = static_cast<std::int64_t>(ctx.interrupt().tag);
    if (remaining <= 0) return;
    Packet out(ctx.services().next_packet_id(ctx.node()), ctx.node(), kBroadcast, spec.payload_bits);
    out.push_header("flood", spec.header_bits);
    out.flow = out.id();
    ctx.var<IdSet>("seen").insert(out.flow);
    ctx.services().annotate("originate flow=" + std::to_string(out.flow));
    if (ctx.services().broadcast(ctx.node(), out)) ctx.services().record("flood.originated", 1.0);
    if (--remaining > 0) ctx.set_timer(interval, kFloodTimerTag);
  };

  model->variable("seen", IdSet{})
      .variable("remaining", std::int64_t{0})
      .state("wait", StateKind::kResting)
      .state("relay", StateKind::kForced, relay)
      .state("originate", StateKind::kForced, originate)
      .initial("wait")
      .transition("wait", "relay",
                  [](const GuardContext& c) {
                    if (!is_arrival(c)) return false;
                    const auto& seen = std::get<IdSet>(c.vars.find("seen")->second);
                    return !seen.contains(c.interrupt.packet->flow);
                  })
      .transition("wait", "originate",
                  [](const GuardContext& c) {
                    if (is_user(c, "originate")) return true;
                    return c.interrupt.kind == InterruptKind::kTimer && c.interrupt.tag == kFloodTimerTag &&
                           std::get<std::int64_t>(c.vars.find("remaining")->second) > 0;
                  })
      .transition("relay", "wait")
      .transition("originate", "wait");
  return model;
}

std::shared_ptr<const ProcessModel> make_unicast_model(PacketSpec spec) {
  auto model = std::make_shared<ProcessModel>("unicast");

  auto send = [spec](ActionContext& ctx) {
    ProcessServices& sv = ctx.services();
    const NodeId dst = static_cast<NodeId>(ctx.interrupt().tag);
    if (dst == ctx.node()) {
      sv.annotate("delivered hops=0");
      sv.record("unicast.hops", 0.0);
      return;
    }
    auto route = sv.compute_route(ctx.node(), dst);
    if (!route) {
      sv.annotate("no-route dst=" + std::to_string(dst));
      sv.record("unicast.no_route", 1.0);
      return;
    }
    Packet out(sv.next_packet_id(ctx.node()), ctx.node(), dst, spec.payload_bits);
    out.push_header("nix", spec.header_bits);
    out.flow = out.id();
    out.link_dst = sv.next_hop(ctx.node(), *route);
    out.route = std::move(*route);
    sv.annotate("send dst=" + std::to_string(dst) + " next=" + std::to_string(out.link_dst));
    if (sv.broadcast(ctx.node(), out)) sv.record("unicast.sent", 1.0);
  };

  auto forward = [](ActionContext& ctx) {
    ProcessServices& sv = ctx.services();
    Packet out = *ctx.interrupt().packet;
    if (!out.route) {
      sv.annotate("route-broken");
      sv.record("unicast.broken", 1.0);
      return;
    }
    try {
      out.link_dst = sv.next_hop(ctx.node(), *out.route);
    } catch (const Error&) {
      // adjacency changed under the packet (mobility)
      sv.annotate("route-broken");
      sv.record("unicast.broken", 1.0);
      return;
    }
    sv.annotate("forward next=" + std::to_string(out.link_dst));
    if (sv.broadcast(ctx.node(), out)) sv.record("unicast.forwarded", 1.0);
  };

  auto deliver = [](ActionContext& ctx) {
    const Packet& in = *ctx.interrupt().packet;
    const std::size_t hops = in.route ? in.route->hops() : 0;
    ctx.services().annotate("delivered hops=" + std::to_string(hops));
    ctx.services().record("unicast.hops", static_cast<double>(hops));
  };

  auto addressed = [](const GuardContext& c) { return is_arrival(c) && c.interrupt.packet->link_dst == c.node; };

  model->state("wait", StateKind::kResting)
      .state("send", StateKind::kForced, send)
      .state("forward", StateKind::kForced, forward)
      .state("deliver", StateKind::kForced, deliver)
      .initial("wait")
      .transition("wait", "send", [](const GuardContext& c) { return is_user(c, "send"); })
      .transition("wait", "forward",
                  [addressed](const GuardContext& c) { return addressed(c) && c.interrupt.packet->dst() != c.node; })
      .transition("wait", "deliver",
                  [addressed](const GuardContext& c) { return addressed(c) && c.interrupt.packet->dst() == c.node; })
      .transition("send", "wait")
      .transition("forward", "wait")
      .transition("deliver", "wait");
  return model;
}

std::shared_ptr<const ProcessModel> make_idle_model() {
  auto model = std::make_shared<ProcessModel>("idle");
  model->state("idle", StateKind::kResting).initial("idle");
  return model;
}

}  // namespace wsnsim
