// wsnsim command-line front end.
// Exit codes: 0 ok, 1 usage or scenario error, 2 failure while running.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "wsnsim/errors.hpp"
#include "wsnsim/harness.hpp"
#include "wsnsim/scenario.hpp"

namespace {

void print_nested(const std::exception& e, int depth = 0) {
  std::cerr << (depth == 0 ? "error: " : "  caused by: ") << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_nested(inner, depth + 1);
  } catch (...) {
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event wireless sensor network simulator"};
  app.require_subcommand(1);
  CLI::App* run = app.add_subcommand("run", "Run (or just check) a scenario file");

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> stop_at;
  std::optional<std::uint32_t> partitions;
  std::string out_dir = "out";
  std::optional<std::string> log_filter;
  bool check_only = false;
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--stop-at", stop_at, "Override the stop time, seconds")->check(CLI::NonNegativeNumber);
  run->add_option("--partitions", partitions, "Number of federated partitions")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "Output directory (default: out)");
  run->add_option("--log-filter", log_filter, "kinds=A+B,nodes=LO-HI+N,window=START:STOP");
  run->add_flag("--check", check_only, "Parse and validate only");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ifstream in(scenario_path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read " << scenario_path << '\n';
    return 1;
  }
  std::stringstream text;
  text << in.rdbuf();

  wsnsim::ParseResult parsed = wsnsim::parse_scenario(text.str());
  if (!parsed.ok()) {
    for (const auto& d : parsed.diagnostics) std::cerr << scenario_path << ": " << d << '\n';
    return 1;
  }
  wsnsim::Scenario scenario = std::move(*parsed.scenario);
  try {
    if (seed) scenario.seed = *seed;
    if (stop_at) scenario.stop = wsnsim::SimTime::from_seconds(*stop_at);
    if (partitions) scenario.partitions = *partitions;
    if (log_filter) scenario.log_filter = wsnsim::LogFilter::parse(*log_filter);
  } catch (const wsnsim::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  if (auto bad = wsnsim::validate(scenario); !bad.empty()) {
    for (const auto& d : bad) std::cerr << "error: " << d << '\n';
    return 1;
  }
  if (check_only) {
    std::cout << "ok: " << scenario.name << " (" << scenario.node_count() << " nodes)\n";
    return 0;
  }

  try {
    const wsnsim::RunSummary s = wsnsim::run(scenario, out_dir);
    std::printf("scenario        %s\n", scenario.name.c_str());
    std::printf("events          %llu\n", static_cast<unsigned long long>(s.events_dispatched));
    std::printf("simulated end   %s s\n", wsnsim::format_seconds(s.simulated_end).c_str());
    std::printf("wall clock      %.3f s\n", s.wall_seconds);
    std::printf("peak memory     %.1f MiB\n", static_cast<double>(s.peak_memory_bytes) / (1024.0 * 1024.0));
    std::printf("peak pending    %zu\n", s.peak_pending);
    for (std::size_t p = 0; p < s.partitions.size() && s.partitions.size() > 1; ++p)
      std::printf("partition %-4zu  events %llu, remote sends %llu, blocked %.1f%%\n", p,
                  static_cast<unsigned long long>(s.partitions[p].events),
                  static_cast<unsigned long long>(s.partitions[p].remote_sent),
                  100.0 * s.partitions[p].blocked_fraction);
    for (const auto& m : s.manifest)
      std::printf("wrote           %s (%llu lines)\n", m.path.string().c_str(),
                  static_cast<unsigned long long>(m.lines));
  } catch (const std::exception& e) {
    print_nested(e);
    return 2;
  }
  return 0;
}
