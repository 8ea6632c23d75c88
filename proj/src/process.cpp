#include "wsnsim/process.hpp"

#include <algorithm>
#include <set>

#include "wsnsim/errors.hpp"

namespace wsnsim {

ProcessModel& ProcessModel::state(std::string name, StateKind kind, Action on_enter, Action on_exit) {
  states_.push_back({std::move(name), kind, std::move(on_enter), std::move(on_exit)});
  return *this;
}

ProcessModel& ProcessModel::transition(std::string from, std::string to, Guard guard, Action action) {
  transitions_.push_back({std::move(from), std::move(to), std::move(guard), std::move(action)});
  return *this;
}

ProcessModel& ProcessModel::initial(std::string name) {
  initial_ = std::move(name);
  return *this;
}

ProcessModel& ProcessModel::variable(std::string name, Value initial) {
  variables_[std::move(name)] = std::move(initial);
  return *this;
}

std::optional<std::size_t> ProcessModel::index_of(std::string_view state) const {
  for (std::size_t i = 0; i < states_.size(); ++i)
    if (states_[i].name == state) return i;
  return std::nullopt;
}

std::vector<std::string> ProcessModel::validate() const {
  std::vector<std::string> diags;
  std::set<std::string_view> seen;
  for (const State& s : states_)
    if (!seen.insert(s.name).second) diags.push_back("duplicate state " + s.name);

  const auto initial = index_of(initial_);
  if (!initial) diags.push_back("unknown initial state " + initial_);

  const std::size_t n = states_.size();
  std::vector<std::vector<std::size_t>> edges(n);
  for (const Transition& t : transitions_) {
    const auto from = index_of(t.from);
    const auto to = index_of(t.to);
    if (!from) diags.push_back("unknown state " + t.from);
    if (!to) diags.push_back("unknown state " + t.to);
    if (from && to) edges[*from].push_back(*to);
  }

  if (initial) {
    std::vector<bool> reached(n, false);
    std::vector<std::size_t> stack{*initial};
    reached[*initial] = true;
    while (!stack.empty()) {
      const std::size_t s = stack.back();
      stack.pop_back();
      for (std::size_t t : edges[s])
        if (!reached[t]) reached[t] = stack.emplace_back(t), true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!reached[i]) diags.push_back("unreachable state " + states_[i].name);
  }

  // Any cycle made only of forced states would spin at one instant.
  enum Mark : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<Mark> mark(n, kWhite);
  std::vector<std::size_t> path;
  std::function<void(std::size_t)> visit = [&](std::size_t s) {
    mark[s] = kGrey;
    path.push_back(s);
    for (std::size_t t : edges[s]) {
      if (states_[t].kind != StateKind::kForced) continue;
      if (mark[t] == kGrey) {
        std::string cycle = "forced-state cycle: ";
        auto it = std::find(path.begin(), path.end(), t);
        for (; it != path.end(); ++it) cycle += states_[*it].name + " -> ";
        diags.push_back(cycle + states_[t].name);
      } else if (mark[t] == kWhite) {
        visit(t);
      }
    }
    path.pop_back();
    mark[s] = kBlack;
  };
  for (std::size_t i = 0; i < n; ++i)
    if (states_[i].kind == StateKind::kForced && mark[i] == kWhite) visit(i);

  return diags;
}

ProcessInstance::ProcessInstance(std::shared_ptr<const ProcessModel> model, NodeId node,
                                 ProcessServices& services)
    : model_(std::move(model)), node_(node), services_(services) {
  if (!model_) throw InvalidModel("null process model");
  if (auto diags = model_->validate(); !diags.empty()) {
    std::string msg = "process model " + model_->name() + ":";
    for (const auto& d : diags) msg += " " + d + ";";
    throw InvalidModel(msg);
  }
  vars_ = model_->variables();
  current_ = *model_->index_of(model_->initial_state());
  outgoing_.resize(model_->states().size());
  const auto& transitions = model_->transitions();
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    outgoing_[*model_->index_of(transitions[i].from)].push_back(i);
    to_index_.push_back(*model_->index_of(transitions[i].to));
  }
}

const std::string& ProcessInstance::state() const { return model_->states()[current_].name; }

bool ProcessInstance::resting() const {
  return model_->states()[current_].kind == StateKind::kResting;
}

void ProcessInstance::run(const Action& action, const Interrupt& interrupt) {
  if (!action) return;
  ActionContext ctx(node_, interrupt, vars_, services_);
  action(ctx);
}

std::optional<std::size_t> ProcessInstance::select(std::size_t state, const Interrupt& interrupt) const {
  const GuardContext ctx{node_, services_.now(), interrupt, vars_};
  std::optional<std::size_t> chosen;
  for (std::size_t t : outgoing_[state]) {
    const Guard& guard = model_->transitions()[t].guard;
    if (guard && !guard(ctx)) continue;
    if (chosen) {
      throw AmbiguousTransition("state " + model_->states()[state].name + ": transitions to " +
                                model_->transitions()[*chosen].to + " and " +
                                model_->transitions()[t].to + " are both enabled");
    }
    chosen = t;
  }
  return chosen;
}

void ProcessInstance::settle_forced(const Interrupt& interrupt) {
  // validate() rules out forced-only cycles, so this chain is bounded.
  std::size_t hops = 0;
  while (model_->states()[current_].kind == StateKind::kForced) {
    const auto t = select(current_, interrupt);
    if (!t) throw Error("process " + model_->name() + " stuck in forced state " + state());
    if (++hops > model_->states().size()) throw Error("forced traversal does not terminate");
    const auto& tr = model_->transitions()[*t];
    run(model_->states()[current_].on_exit, interrupt);
    run(tr.action, interrupt);
    current_ = to_index_[*t];
    ++fired_;
    run(model_->states()[current_].on_enter, interrupt);
  }
}

void ProcessInstance::start() {
  const Interrupt begin = Interrupt::user("begin");
  run(model_->states()[current_].on_enter, begin);
  settle_forced(begin);
}

const std::string& ProcessInstance::deliver(const Interrupt& interrupt) {
  if (delivering_) throw Error("re-entrant deliver on node " + std::to_string(node_));
  delivering_ = true;
  try {
    const auto t = select(current_, interrupt);
    if (!t) {
      ++unmatched_;
    } else {
      const auto& tr = model_->transitions()[*t];
      run(model_->states()[current_].on_exit, interrupt);
      run(tr.action, interrupt);
      current_ = to_index_[*t];
      ++fired_;
      run(model_->states()[current_].on_enter, interrupt);
      settle_forced(interrupt);
    }
  } catch (...) {
    delivering_ = false;
    throw;
  }
  delivering_ = false;
  return state();
}

}  // namespace wsnsim
