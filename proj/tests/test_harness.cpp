#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wsnsim/errors.hpp"
#include "wsnsim/harness.hpp"
#include "wsnsim/protocols.hpp"

using namespace wsnsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wsnsim_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool same_directories(const fs::path& a, const fs::path& b) {
  std::vector<std::string> na, nb;
  for (const auto& e : fs::directory_iterator(a)) na.push_back(e.path().filename().string());
  for (const auto& e : fs::directory_iterator(b)) nb.push_back(e.path().filename().string());
  std::sort(na.begin(), na.end());
  std::sort(nb.begin(), nb.end());
  if (na != nb) return false;
  for (const auto& n : na)
    if (slurp(a / n) != slurp(b / n)) return false;
  return true;
}

int cli(const std::string& args, std::string* out = nullptr) {
  const fs::path capture = scratch("cli_capture");
  const std::string cmd = std::string(WSNSIM_CLI) + " " + args + " >" + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) *out = slurp(capture);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch(name);
  std::ofstream(p) << text;
  return p;
}

const char* kMinimal =
    "seed = 5\n"
    "stop_s = 2\n"
    "field.width_m = 200\n"
    "field.height_m = 200\n"
    "nodes.random.count = 10\n"
    "propagation = unit-disk\n"
    "radio.disk_range_m = 90\n";

bool mentions(const std::vector<std::string>& diags, const std::string& what) {
  return std::any_of(diags.begin(), diags.end(), [&](const std::string& d) { return d.find(what) != std::string::npos; });
}

}  // namespace

TEST_CASE("minimal scenario parses") {
  const ParseResult r = parse_scenario(kMinimal);
  REQUIRE(r.ok());
  CHECK(r.scenario->node_count() == 10);
  CHECK(r.scenario->seed == 5);
  CHECK(r.scenario->stop == SimTime::from_seconds(2));
  CHECK(r.scenario->radio.disk_range_m == 90);
  CHECK(place_nodes(*r.scenario).size() == 10);
}

TEST_CASE("parse diagnostics carry line numbers") {
  SUBCASE("unknown propagation model") {
    const ParseResult r = parse_scenario("seed = 1\npropagation = warp-drive\n");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.diagnostics, "line 2"));
    CHECK(mentions(r.diagnostics, "unknown propagation model"));
  }
  SUBCASE("ber without snr") {
    const ParseResult r = parse_scenario("seed = 1\n\n# comment\nber_enabled = true\n");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.diagnostics, "line 4"));
    CHECK(mentions(r.diagnostics, "ber_enabled requires snr_enabled"));
  }
  SUBCASE("unknown keys are errors") {
    const ParseResult r = parse_scenario("seed = 1\nradio.flux_capacitor = 3\n");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.diagnostics, "line 2: unknown key 'radio.flux_capacitor'"));
  }
  SUBCASE("duplicates, bad numbers, missing equals") {
    const ParseResult r = parse_scenario("seed = 1\nseed = 2\nstop_s = soon\njust words\n");
    CHECK_FALSE(r.ok());
    CHECK(mentions(r.diagnostics, "line 2: duplicate key"));
    CHECK(mentions(r.diagnostics, "line 3"));
    CHECK(mentions(r.diagnostics, "line 4"));
  }
  SUBCASE("unit and model checks") {
    CHECK_FALSE(parse_scenario("radio.system_loss = 0.5\n").ok());
    CHECK_FALSE(parse_scenario("energy.tx_cost_j = -1\n").ok());
    CHECK_FALSE(parse_scenario("process = nonesuch\n").ok());
    CHECK_FALSE(parse_scenario("process = unicast\nunicast.pairs = 0>1\nnodes.random.count = 2\n").ok());
    CHECK(parse_scenario("process = unicast\nrouting = nix\nunicast.pairs = 0>1\nnodes.random.count = 2\n").ok());
    CHECK_FALSE(parse_scenario("node = 10 10\nfield.width_m = 5\n").ok());
  }
}

TEST_CASE("property: serialize then parse gives the same scenario") {
  std::mt19937_64 rng(8);
  auto real = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  for (int trial = 0; trial < 200; ++trial) {
    Scenario s;
    s.name = "trial-" + std::to_string(trial);
    s.seed = rng();
    s.stop = SimTime::from_ns(rng() % 100'000'000'000ULL);
    s.field = Field{real(10, 5000), real(10, 5000)};
    for (int i = static_cast<int>(rng() % 4); i > 0; --i) s.nodes.push_back({real(0, s.field.width), real(0, s.field.height), real(0, 3)});
    s.random_nodes = rng() % 500 + 1;
    s.radio.tx_power_w = real(0, 2);
    s.radio.tx_gain = real(0, 4);
    s.radio.wavelength_m = real(0.01, 1);
    s.radio.system_loss = real(1, 3);
    s.radio.rx_threshold_w = real(0, 1e-6);
    s.radio.disk_range_m = real(1, 300);
    s.radio.noise_floor_w = real(1e-15, 1e-9);
    s.radio.bitrate_bps = real(1e3, 1e7);
    s.pipeline.closure = static_cast<ClosureModel>(rng() % 3);
    s.pipeline.tx_gain_enabled = rng() % 2;
    s.pipeline.power_enabled = rng() % 2;
    s.pipeline.snr_enabled = rng() % 2;
    s.pipeline.ber_enabled = s.pipeline.snr_enabled && rng() % 2;
    s.pipeline.error_enabled = s.pipeline.ber_enabled && rng() % 2;
    s.pipeline.ecc_enabled = s.pipeline.error_enabled && rng() % 2;
    s.pipeline.ecc_capability = rng() % 64;
    s.energy.model = static_cast<EnergyModelKind>(rng() % 3);
    s.energy.capacity_j = real(0.001, 100);
    s.energy.tx_cost_j = real(0, 0.01);
    for (auto& d : s.energy.draw_w) d = real(0, 0.1);
    s.routing = static_cast<RoutingChoice>(rng() % 2);
    s.route_cache_size = rng() % 10000;
    s.process = rng() % 2 ? "flood" : "idle";
    s.flood = FloodSpec{0, real(0, 1), real(0.01, 2), rng() % 10 + 1};
    s.packet = PacketSpec{static_cast<std::uint32_t>(rng() % 4096 + 1), static_cast<std::uint32_t>(rng() % 256)};
    s.partitions = 1 + static_cast<std::uint32_t>(rng() % 4);
    if (s.partitions == 1 && rng() % 2) {
      s.mobility.model = MobilityModel::kWaypoint;
      s.mobility.vmin_mps = real(0.1, 2);
      s.mobility.vmax_mps = s.mobility.vmin_mps + real(0, 5);
      s.mobility.pause_s = real(0, 3);
    }
    if (rng() % 2) s.log_filter = LogFilter::parse("kinds=packet-arrival+timer-expiry,nodes=0-9+42,window=0.5:3");
    s.bucket_width_s = real(1e-6, 1e-2);
    REQUIRE(validate(s).empty());
    const std::string text = serialize(s);
    const ParseResult back = parse_scenario(text);
    REQUIRE_MESSAGE(back.ok(), text);
    REQUIRE(*back.scenario == s);
    REQUIRE(serialize(*back.scenario) == text);
  }
}

TEST_CASE("same scenario twice gives byte-identical output directories") {
  Scenario s = *parse_scenario(kMinimal).scenario;
  s.energy.model = EnergyModelKind::kBucket;
  s.energy.capacity_j = 0.01;
  s.energy.tx_cost_j = 0.001;
  const auto a = scratch("twice_a");
  const auto b = scratch("twice_b");
  const RunSummary ra = run(s, a);
  run(s, b);
  CHECK(ra.events_dispatched > 0);
  CHECK(same_directories(a, b));
  CHECK(fs::exists(a / "effective.scenario"));
  CHECK(*parse_scenario(slurp(a / "effective.scenario")).scenario == s);
  CHECK(fs::exists(a / "manifest.tsv"));
}

TEST_CASE("stop at zero dispatches nothing and still writes outputs") {
  Scenario s = *parse_scenario(kMinimal).scenario;
  s.stop = SimTime::zero();
  s.flood.start_s = 0.5;
  const auto dir = scratch("stop0");
  const RunSummary r = run(s, dir);
  CHECK(r.events_dispatched == 0);
  CHECK(r.simulated_end == SimTime::zero());
  CHECK(slurp(dir / "trace.tsv").empty());
  CHECK(slurp(dir / "scalars.tsv").rfind("# name", 0) == 0);
}

TEST_CASE("summary fields") {
  Scenario s = *parse_scenario(kMinimal).scenario;
  const RunResult r = simulate(s);
  CHECK(r.summary.simulated_end <= s.stop);
  CHECK(r.summary.peak_memory_bytes > 0);
  CHECK(r.summary.partitions.size() == 1);
  CHECK(r.summary.trace_lines == r.telemetry.trace_lines());
}

TEST_CASE("ten-node flood: each reachable node hears it first exactly once") {
  int connected_seen = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Scenario s = *parse_scenario(kMinimal).scenario;
    s.seed = seed;
    const auto pos = place_nodes(s);
    // adjacency straight from the positions
    std::vector<std::vector<std::size_t>> adj(pos.size());
    for (std::size_t i = 0; i < pos.size(); ++i)
      for (std::size_t j = 0; j < pos.size(); ++j)
        if (i != j && std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y) <= s.radio.disk_range_m) adj[i].push_back(j);
    std::vector<bool> reach(pos.size(), false);
    std::deque<std::size_t> q{s.flood.origin};
    reach[s.flood.origin] = true;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop_front();
      for (auto v : adj[u])
        if (!reach[v]) reach[v] = true, q.push_back(v);
    }
    const bool connected = std::all_of(reach.begin(), reach.end(), [](bool b) { return b; });
    connected_seen += connected;

    const RunResult r = simulate(s);
    std::vector<int> first(pos.size(), 0);
    std::istringstream in(r.telemetry.trace_text());
    std::string line;
    while (std::getline(in, line)) {
      if (line.find("first-rx") == std::string::npos) continue;
      std::istringstream cols(line);
      std::string t, kind, node;
      std::getline(cols, t, '\t');
      std::getline(cols, kind, '\t');
      std::getline(cols, node, '\t');
      ++first[std::stoul(node)];
    }
    for (std::size_t n = 0; n < pos.size(); ++n) {
      CAPTURE(seed);
      CAPTURE(n);
      CHECK(first[n] == (reach[n] && n != s.flood.origin ? 1 : 0));
    }
  }
  CHECK(connected_seen > 0);
}

TEST_CASE("custom process models can be registered by name") {
  register_process_model("test-quiet", [](const Scenario&) { return make_idle_model(); });
  CHECK(is_registered_process("test-quiet"));
  Scenario s = *parse_scenario(std::string(kMinimal) + "process = test-quiet\n").scenario;
  const RunResult r = simulate(s);
  CHECK(r.telemetry.scalar("radio.sent") == nullptr);
}

TEST_CASE("command line") {
  const fs::path good = write_file("good.scenario", kMinimal);
  const fs::path bad = write_file("bad.scenario", "propagation = warp-drive\n");
  std::string out;

  SUBCASE("success writes the outputs") {
    const auto dir = scratch("cli_out");
    CHECK(cli("run --scenario " + good.string() + " --out " + dir.string(), &out) == 0);
    CHECK(fs::exists(dir / "trace.tsv"));
    CHECK(out.find("events") != std::string::npos);
  }
  SUBCASE("check mode") {
    CHECK(cli("run --scenario " + good.string() + " --check", &out) == 0);
    CHECK(out.find("ok: ") != std::string::npos);
    CHECK(out.find("10 nodes") != std::string::npos);
  }
  SUBCASE("usage and parse errors exit 1") {
    CHECK(cli("", &out) == 1);
    CHECK(cli("run", &out) == 1);
    CHECK(cli("run --scenario " + good.string() + " --bogus", &out) == 1);
    CHECK(cli("run --scenario /nonexistent/x.scenario", &out) == 1);
    CHECK(cli("run --scenario " + bad.string(), &out) == 1);
    CHECK(out.find("line 1") != std::string::npos);
    CHECK(cli("run --scenario " + good.string() + " --log-filter kinds=nope", &out) == 1);
    CHECK(cli("run --scenario " + good.string() + " --partitions 11", &out) == 1);
  }
  SUBCASE("runtime failures exit 2") {
    const fs::path blocker = write_file("blocker", "x");
    CHECK(cli("run --scenario " + good.string() + " --out " + (blocker / "sub").string(), &out) == 2);
    CHECK(out.find((blocker / "sub").string()) != std::string::npos);
  }
  SUBCASE("flags override the file and are echoed") {
    const auto dir = scratch("cli_override");
    CHECK(cli("run --scenario " + good.string() + " --seed 99 --stop-at 1.5 --partitions 2 --log-filter kinds=packet-arrival --out " +
                  dir.string(),
              &out) == 0);
    const ParseResult eff = parse_scenario(slurp(dir / "effective.scenario"));
    REQUIRE(eff.ok());
    CHECK(eff.scenario->seed == 99);
    CHECK(eff.scenario->stop == SimTime::from_seconds(1.5));
    CHECK(eff.scenario->partitions == 2);
    CHECK(eff.scenario->log_filter == LogFilter::parse("kinds=packet-arrival"));
    CHECK(slurp(dir / "trace.tsv").find("interrupt-delivery") == std::string::npos);
  }
  SUBCASE("shipped scenarios validate") {
    for (const auto& e : fs::directory_iterator(WSNSIM_SCENARIOS)) {
      CAPTURE(e.path().string());
      CHECK(cli("run --check --scenario " + e.path().string(), &out) == 0);
    }
  }
}
