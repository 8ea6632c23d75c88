#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include "wsnsim/process.hpp"
#include "wsnsim/scenario.hpp"

namespace wsnsim {

using ProcessFactory = std::function<std::shared_ptr<const ProcessModel>(const Scenario&)>;

/// Adds or replaces a named model; built-ins are flood, idle and unicast.
void register_process_model(std::string name, ProcessFactory factory);
/// Throws InvalidModel for an unknown name.
std::shared_ptr<const ProcessModel> make_process_model(std::string_view name, const Scenario& scenario);

inline constexpr std::uint64_t kFloodTimerTag = 1;

/// Rebroadcast-once flooding with a duplicate cache. A user interrupt
/// "originate" (value = number of floods) starts a flow; the next ones
/// follow every `interval`.
std::shared_ptr<const ProcessModel> make_flood_model(Duration interval, PacketSpec packet);

/// Source-routed delivery over NIx vectors. A user interrupt "send"
/// (value = destination) launches one packet.
std::shared_ptr<const ProcessModel> make_unicast_model(PacketSpec packet);

/// One resting state; consumes everything.
std::shared_ptr<const ProcessModel> make_idle_model();

}  // namespace wsnsim
