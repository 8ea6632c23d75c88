#include "wsnsim/harness.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <chrono>
#include <fstream>

#include "wsnsim/errors.hpp"
#include "wsnsim/simulation.hpp"

namespace wsnsim {

std::uint64_t peak_rss_bytes() {
  rusage usage{};
  if (getrusage(RUSAGE_SELF, &usage) != 0) return 0;
  return static_cast<std::uint64_t>(usage.ru_maxrss) * 1024;  // Linux reports KiB
}

RunResult simulate(const Scenario& scenario) {
  if (auto bad = validate(scenario); !bad.empty()) throw ScenarioError(bad.front());
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<Position> positions = place_nodes(scenario);
  RunResult result;

  if (scenario.partitions <= 1) {
    Simulation sim(scenario, positions);
    const DispatchSummary d = sim.run_until(scenario.stop);
    sim.finish();
    result.summary.events_dispatched = d.events_dispatched;
    result.summary.peak_pending = d.peak_pending;
    result.summary.partitions.push_back({d.events_dispatched, d.peak_pending, 0, 0.0});
    result.telemetry = std::move(sim.telemetry());
  } else {
    Federation fed(scenario, positions);
    FederatedResult f = fed.run(scenario.stop);
    result.summary.events_dispatched = f.events;
    for (const auto& p : f.partitions) result.summary.peak_pending += p.peak_pending;
    result.summary.partitions = std::move(f.partitions);
    result.telemetry = std::move(f.telemetry);
  }

  result.summary.simulated_end = scenario.stop;
  result.summary.trace_lines = result.telemetry.trace_lines();
  result.summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.summary.peak_memory_bytes = peak_rss_bytes();
  return result;
}

RunSummary run(const Scenario& scenario, const std::filesystem::path& out_dir) {
  RunResult result = simulate(scenario);
  RunSummary& summary = result.summary;
  summary.manifest = result.telemetry.flush(out_dir);

  const auto effective = out_dir / "effective.scenario";
  {
    std::ofstream out(effective, std::ios::binary | std::ios::trunc);
    const std::string text = serialize(scenario);
    out << text;
    if (!out.flush()) throw IoFailure("cannot write " + effective.string());
    summary.manifest.push_back({effective, static_cast<std::uint64_t>(std::count(text.begin(), text.end(), '\n'))});
  }

  const auto manifest = out_dir / "manifest.tsv";
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  out << "# file\tlines\n";
  for (const ManifestEntry& e : summary.manifest) out << e.path.filename().string() << '\t' << e.lines << '\n';
  if (!out.flush()) throw IoFailure("cannot write " + manifest.string());
  summary.peak_memory_bytes = peak_rss_bytes();
  return summary;
}

}  // namespace wsnsim
