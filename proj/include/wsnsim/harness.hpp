#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "wsnsim/federation.hpp"
#include "wsnsim/scenario.hpp"
#include "wsnsim/telemetry.hpp"

namespace wsnsim {

struct RunSummary {
  std::uint64_t events_dispatched = 0;
  SimTime simulated_end;
  double wall_seconds = 0.0;
  /// Peak resident set of the process so far, bytes.
  std::uint64_t peak_memory_bytes = 0;
  std::size_t peak_pending = 0;
  std::uint64_t trace_lines = 0;
  /// One entry per partition; a single entry for monolithic runs.
  std::vector<PartitionReport> partitions;
  Manifest manifest;
};

struct RunResult {
  RunSummary summary;
  Telemetry telemetry;
};

/// Builds and executes the scenario (federated when partitions > 1)
/// without touching the file system.
RunResult simulate(const Scenario& scenario);

/// simulate(), then writes the telemetry files, the effective scenario and
/// a manifest into `out_dir`.
RunSummary run(const Scenario& scenario, const std::filesystem::path& out_dir);

std::uint64_t peak_rss_bytes();

}  // namespace wsnsim
