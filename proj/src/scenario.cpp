#include "wsnsim/scenario.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>

#include "wsnsim/errors.hpp"
#include "wsnsim/rng.hpp"

namespace wsnsim {

namespace {

struct Issue {
  std::string key;  // key to cite a line for; empty for whole-file issues
  std::string text;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v))
    throw ScenarioError("expected a finite number, got '" + std::string(s) + "'");
  return v;
}

std::uint64_t to_u64(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || end != s.data() + s.size())
    throw ScenarioError("expected an unsigned integer, got '" + std::string(s) + "'");
  return v;
}

std::uint32_t to_u32(std::string_view s) {
  const std::uint64_t v = to_u64(s);
  if (v > 0xFFFFFFFFull) throw ScenarioError("value " + std::to_string(v) + " is too large");
  return static_cast<std::uint32_t>(v);
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true") return true;
  if (s == "false") return false;
  throw ScenarioError("expected true or false, got '" + std::string(s) + "'");
}

double non_negative(std::string_view s) {
  const double v = to_double(s);
  if (v < 0.0) throw ScenarioError("must be >= 0");
  return v;
}

double positive(std::string_view s) {
  const double v = to_double(s);
  if (v <= 0.0) throw ScenarioError("must be > 0");
  return v;
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

constexpr const char* kDrawKeys[kPowerStateCount] = {
    "energy.draw.sleep_w", "energy.draw.idle_w",  "energy.draw.rx_w",
    "energy.draw.tx_w",    "energy.draw.sense_w", "energy.draw.compute_w"};

using Setter = std::function<void(Scenario&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = [] {
    std::map<std::string, Setter, std::less<>> t;
    t["name"] = [](Scenario& s, std::string_view v) {
      if (v.empty()) throw ScenarioError("name must not be empty");
      s.name = std::string(v);
    };
    t["seed"] = [](Scenario& s, std::string_view v) { s.seed = to_u64(v); };
    t["stop_s"] = [](Scenario& s, std::string_view v) { s.stop = SimTime::from_seconds(non_negative(v)); };
    t["partitions"] = [](Scenario& s, std::string_view v) { s.partitions = to_u32(v); };
    t["kernel.bucket_width_s"] = [](Scenario& s, std::string_view v) { s.bucket_width_s = positive(v); };
    t["field.width_m"] = [](Scenario& s, std::string_view v) { s.field.width = positive(v); };
    t["field.height_m"] = [](Scenario& s, std::string_view v) { s.field.height = positive(v); };
    t["node"] = [](Scenario& s, std::string_view v) {
      const auto w = words(v);
      if (w.size() != 2 && w.size() != 3) throw ScenarioError("node needs 'X Y [Z]' in meters");
      s.nodes.push_back({to_double(w[0]), to_double(w[1]), w.size() == 3 ? to_double(w[2]) : 0.0});
    };
    t["nodes.random.count"] = [](Scenario& s, std::string_view v) { s.random_nodes = to_u64(v); };
    t["propagation"] = [](Scenario& s, std::string_view v) {
      if (v == "unit-disk") s.pipeline.closure = ClosureModel::kUnitDisk;
      else if (v == "free-space") s.pipeline.closure = ClosureModel::kFreeSpace;
      else if (v == "two-ray") s.pipeline.closure = ClosureModel::kTwoRay;
      else throw ScenarioError("unknown propagation model '" + std::string(v) + "'");
    };
    auto radio = [&t](const char* key, double RadioParams::*field) {
      t[key] = [field](Scenario& s, std::string_view v) { s.radio.*field = to_double(v); };
    };
    radio("radio.tx_power_w", &RadioParams::tx_power_w);
    radio("radio.tx_gain", &RadioParams::tx_gain);
    radio("radio.rx_gain", &RadioParams::rx_gain);
    radio("radio.wavelength_m", &RadioParams::wavelength_m);
    radio("radio.system_loss", &RadioParams::system_loss);
    radio("radio.tx_height_m", &RadioParams::tx_height_m);
    radio("radio.rx_height_m", &RadioParams::rx_height_m);
    radio("radio.rx_threshold_w", &RadioParams::rx_threshold_w);
    radio("radio.disk_range_m", &RadioParams::disk_range_m);
    radio("radio.noise_floor_w", &RadioParams::noise_floor_w);
    radio("radio.bitrate_bps", &RadioParams::bitrate_bps);
    auto stage = [&t](const char* key, bool PipelineConfig::*field) {
      t[key] = [field](Scenario& s, std::string_view v) { s.pipeline.*field = to_bool(v); };
    };
    stage("tx_gain_enabled", &PipelineConfig::tx_gain_enabled);
    stage("rx_gain_enabled", &PipelineConfig::rx_gain_enabled);
    stage("power_enabled", &PipelineConfig::power_enabled);
    stage("bkgnoise_enabled", &PipelineConfig::bkgnoise_enabled);
    stage("snr_enabled", &PipelineConfig::snr_enabled);
    stage("ber_enabled", &PipelineConfig::ber_enabled);
    stage("error_enabled", &PipelineConfig::error_enabled);
    stage("ecc_enabled", &PipelineConfig::ecc_enabled);
    t["ecc_capability_bits"] = [](Scenario& s, std::string_view v) { s.pipeline.ecc_capability = to_u64(v); };
    t["modulation"] = [](Scenario& s, std::string_view v) {
      if (v != "bpsk") throw ScenarioError("unknown modulation '" + std::string(v) + "'");
      s.pipeline.modulation = Modulation::kBpsk;
    };
    t["energy.model"] = [](Scenario& s, std::string_view v) {
      if (v == "none") s.energy.model = EnergyModelKind::kNone;
      else if (v == "bucket") s.energy.model = EnergyModelKind::kBucket;
      else if (v == "state") s.energy.model = EnergyModelKind::kState;
      else throw ScenarioError("unknown energy model '" + std::string(v) + "'");
    };
    t["energy.capacity_j"] = [](Scenario& s, std::string_view v) { s.energy.capacity_j = to_double(v); };
    t["energy.tx_cost_j"] = [](Scenario& s, std::string_view v) { s.energy.tx_cost_j = to_double(v); };
    t["energy.rx_cost_j"] = [](Scenario& s, std::string_view v) { s.energy.rx_cost_j = to_double(v); };
    for (std::size_t i = 0; i < kPowerStateCount; ++i)
      t[kDrawKeys[i]] = [i](Scenario& s, std::string_view v) { s.energy.draw_w[i] = to_double(v); };
    t["routing"] = [](Scenario& s, std::string_view v) {
      if (v == "nix") s.routing = RoutingChoice::kNix;
      else if (v == "none") s.routing = RoutingChoice::kNone;
      else throw ScenarioError("unknown routing '" + std::string(v) + "'");
    };
    t["routing.cache_size"] = [](Scenario& s, std::string_view v) { s.route_cache_size = to_u64(v); };
    t["process"] = [](Scenario& s, std::string_view v) { s.process = std::string(v); };
    t["mobility.model"] = [](Scenario& s, std::string_view v) {
      if (v == "none") s.mobility.model = MobilityModel::kNone;
      else if (v == "waypoint") s.mobility.model = MobilityModel::kWaypoint;
      else throw ScenarioError("unknown mobility model '" + std::string(v) + "'");
    };
    t["mobility.vmin_mps"] = [](Scenario& s, std::string_view v) { s.mobility.vmin_mps = to_double(v); };
    t["mobility.vmax_mps"] = [](Scenario& s, std::string_view v) { s.mobility.vmax_mps = to_double(v); };
    t["mobility.pause_s"] = [](Scenario& s, std::string_view v) { s.mobility.pause_s = non_negative(v); };
    t["mobility.period_s"] = [](Scenario& s, std::string_view v) { s.mobility.period_s = positive(v); };
    t["flood.origin"] = [](Scenario& s, std::string_view v) { s.flood.origin = to_u32(v); };
    t["flood.start_s"] = [](Scenario& s, std::string_view v) { s.flood.start_s = non_negative(v); };
    t["flood.interval_s"] = [](Scenario& s, std::string_view v) { s.flood.interval_s = positive(v); };
    t["flood.count"] = [](Scenario& s, std::string_view v) { s.flood.count = to_u64(v); };
    t["unicast.pairs"] = [](Scenario& s, std::string_view v) {
      s.unicast.pairs.clear();
      if (v.empty()) return;
      std::size_t start = 0;
      for (;;) {
        const std::size_t comma = v.find(',', start);
        const std::string_view item = trim(v.substr(start, comma == std::string_view::npos ? v.npos : comma - start));
        const std::size_t arrow = item.find('>');
        if (arrow == std::string_view::npos) throw ScenarioError("unicast pair '" + std::string(item) + "' needs SRC>DST");
        s.unicast.pairs.emplace_back(to_u32(item.substr(0, arrow)), to_u32(item.substr(arrow + 1)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    };
    t["unicast.start_s"] = [](Scenario& s, std::string_view v) { s.unicast.start_s = non_negative(v); };
    t["packet.payload_bits"] = [](Scenario& s, std::string_view v) { s.packet.payload_bits = to_u32(v); };
    t["packet.header_bits"] = [](Scenario& s, std::string_view v) { s.packet.header_bits = to_u32(v); };
    t["log.filter"] = [](Scenario& s, std::string_view v) {
      try {
        s.log_filter = LogFilter::parse(v);
      } catch (const ScenarioError&) {
        throw;
      } catch (const Error& e) {
        throw ScenarioError(e.what());
      }
    };
    return t;
  }();
  return table;
}

std::vector<Issue> collect_issues(const Scenario& s) {
  std::vector<Issue> out;
  for (const auto& v : s.radio.violations()) out.push_back({"", "radio: " + v});
  for (const auto& v : s.pipeline.violations()) out.push_back({v.substr(0, v.find(' ')), v});
  for (const auto& v : s.energy.violations()) out.push_back({"", "energy: " + v});
  if (!(s.field.width > 0.0 && s.field.height > 0.0 && std::isfinite(s.field.width) && std::isfinite(s.field.height)))
    out.push_back({"", "field dimensions must be finite and > 0"});
  for (std::size_t i = 0; i < s.nodes.size(); ++i)
    if (!s.field.contains(s.nodes[i]))
      out.push_back({"node", "node " + std::to_string(i) + " lies outside the field"});
  const std::uint64_t n = s.node_count();
  if (n >= kInternal) out.push_back({"nodes.random.count", "at most " + std::to_string(kInternal - 1) + " nodes"});
  if (s.partitions == 0) out.push_back({"partitions", "partitions must be >= 1"});
  else if (n > 0 && s.partitions > n) out.push_back({"partitions", "partitions exceeds node count"});
  if (Duration::from_seconds(s.bucket_width_s).ns == 0)
    out.push_back({"kernel.bucket_width_s", "bucket width must be at least 1 ns"});
  if (s.mobility.model == MobilityModel::kWaypoint) {
    if (!(s.mobility.vmin_mps > 0.0 && s.mobility.vmin_mps <= s.mobility.vmax_mps))
      out.push_back({"mobility.vmin_mps", "mobility needs 0 < vmin_mps <= vmax_mps"});
    if (s.partitions > 1) out.push_back({"mobility.model", "mobility requires partitions = 1 (static topology)"});
  }
  for (const std::string* text : {&s.name, &s.process})
    if (text->find_first_of("#\n") != std::string::npos)
      out.push_back({"", "names must not contain '#' or line breaks"});
  if (!is_registered_process(s.process))
    out.push_back({"process", "unknown process model '" + s.process + "'"});
  if (s.process == "flood" && n > 0 && s.flood.origin >= n)
    out.push_back({"flood.origin", "flood origin " + std::to_string(s.flood.origin) + " is not a node"});
  if (s.process == "unicast") {
    if (s.routing != RoutingChoice::kNix) out.push_back({"process", "unicast needs routing = nix"});
    for (const auto& [a, b] : s.unicast.pairs)
      if (a >= n || b >= n)
        out.push_back({"unicast.pairs", "unicast pair " + std::to_string(a) + ">" + std::to_string(b) + " names no node"});
  }
  if (s.packet.size_bits() == 0) out.push_back({"packet.payload_bits", "packets must have at least one bit"});
  return out;
}

}  // namespace

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  for (auto& issue : collect_issues(s)) out.push_back(std::move(issue.text));
  return out;
}

ParseResult parse_scenario(std::string_view text) {
  ParseResult result;
  Scenario s;
  std::map<std::string, std::size_t, std::less<>> lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto diag = [&](const std::string& msg) {
      result.diagnostics.push_back("line " + std::to_string(line_no) + ": " + msg);
    };
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      diag("expected 'key = value'");
      continue;
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      diag("unknown key '" + std::string(key) + "'");
      continue;
    }
    if (key != "node" && lines.contains(key)) {
      diag("duplicate key '" + std::string(key) + "' (first set on line " +
           std::to_string(lines.find(key)->second) + ")");
      continue;
    }
    if (!lines.contains(key)) lines.emplace(std::string(key), line_no);
    try {
      it->second(s, value);
    } catch (const Error& e) {
      diag(std::string(key) + ": " + e.what());
    }
  }
  if (!result.diagnostics.empty()) return result;
  for (const Issue& issue : collect_issues(s)) {
    const auto at = lines.find(issue.key);
    result.diagnostics.push_back(at == lines.end() ? issue.text
                                                   : "line " + std::to_string(at->second) + ": " + issue.text);
  }
  if (result.diagnostics.empty()) result.scenario = std::move(s);
  return result;
}

std::string serialize(const Scenario& s) {
  std::string out;
  auto put = [&](std::string_view key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  put("name", s.name);
  put("seed", std::to_string(s.seed));
  put("stop_s", format_seconds(s.stop));
  put("partitions", std::to_string(s.partitions));
  put("kernel.bucket_width_s", fmt(s.bucket_width_s));
  put("field.width_m", fmt(s.field.width));
  put("field.height_m", fmt(s.field.height));
  for (const Position& p : s.nodes) put("node", fmt(p.x) + " " + fmt(p.y) + " " + fmt(p.z));
  put("nodes.random.count", std::to_string(s.random_nodes));
  put("propagation", to_string(s.pipeline.closure));
  put("radio.tx_power_w", fmt(s.radio.tx_power_w));
  put("radio.tx_gain", fmt(s.radio.tx_gain));
  put("radio.rx_gain", fmt(s.radio.rx_gain));
  put("radio.wavelength_m", fmt(s.radio.wavelength_m));
  put("radio.system_loss", fmt(s.radio.system_loss));
  put("radio.tx_height_m", fmt(s.radio.tx_height_m));
  put("radio.rx_height_m", fmt(s.radio.rx_height_m));
  put("radio.rx_threshold_w", fmt(s.radio.rx_threshold_w));
  put("radio.disk_range_m", fmt(s.radio.disk_range_m));
  put("radio.noise_floor_w", fmt(s.radio.noise_floor_w));
  put("radio.bitrate_bps", fmt(s.radio.bitrate_bps));
  put("tx_gain_enabled", flag(s.pipeline.tx_gain_enabled));
  put("rx_gain_enabled", flag(s.pipeline.rx_gain_enabled));
  put("power_enabled", flag(s.pipeline.power_enabled));
  put("bkgnoise_enabled", flag(s.pipeline.bkgnoise_enabled));
  put("snr_enabled", flag(s.pipeline.snr_enabled));
  put("ber_enabled", flag(s.pipeline.ber_enabled));
  put("error_enabled", flag(s.pipeline.error_enabled));
  put("ecc_enabled", flag(s.pipeline.ecc_enabled));
  put("ecc_capability_bits", std::to_string(s.pipeline.ecc_capability));
  put("modulation", "bpsk");
  put("energy.model", std::string(to_string(s.energy.model)));
  put("energy.capacity_j", fmt(s.energy.capacity_j));
  put("energy.tx_cost_j", fmt(s.energy.tx_cost_j));
  put("energy.rx_cost_j", fmt(s.energy.rx_cost_j));
  for (std::size_t i = 0; i < kPowerStateCount; ++i) put(kDrawKeys[i], fmt(s.energy.draw_w[i]));
  put("routing", s.routing == RoutingChoice::kNix ? "nix" : "none");
  put("routing.cache_size", std::to_string(s.route_cache_size));
  put("process", s.process);
  put("mobility.model", s.mobility.model == MobilityModel::kWaypoint ? "waypoint" : "none");
  put("mobility.vmin_mps", fmt(s.mobility.vmin_mps));
  put("mobility.vmax_mps", fmt(s.mobility.vmax_mps));
  put("mobility.pause_s", fmt(s.mobility.pause_s));
  put("mobility.period_s", fmt(s.mobility.period_s));
  put("flood.origin", std::to_string(s.flood.origin));
  put("flood.start_s", fmt(s.flood.start_s));
  put("flood.interval_s", fmt(s.flood.interval_s));
  put("flood.count", std::to_string(s.flood.count));
  std::string pairs;
  for (const auto& [a, b] : s.unicast.pairs) {
    if (!pairs.empty()) pairs += ',';
    pairs += std::to_string(a) + ">" + std::to_string(b);
  }
  put("unicast.pairs", pairs);
  put("unicast.start_s", fmt(s.unicast.start_s));
  put("packet.payload_bits", std::to_string(s.packet.payload_bits));
  put("packet.header_bits", std::to_string(s.packet.header_bits));
  put("log.filter", s.log_filter.to_string());
  return out;
}

std::vector<Position> place_nodes(const Scenario& s) {
  std::vector<Position> out = s.nodes;
  out.reserve(s.node_count());
  Rng rng(derive_seed(s.seed, StreamPurpose::kPlacement, 0));
  for (std::uint64_t i = 0; i < s.random_nodes; ++i) {
    const double x = uniform01(rng) * s.field.width;
    const double y = uniform01(rng) * s.field.height;
    out.push_back({x, y, 0.0});
  }
  return out;
}

}  // namespace wsnsim
