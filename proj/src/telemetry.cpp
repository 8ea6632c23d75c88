#include "wsnsim/telemetry.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <queue>
#include <system_error>

#include "wsnsim/errors.hpp"

namespace wsnsim {

namespace {

constexpr EventKind kAllKinds[] = {EventKind::kPacketArrival,     EventKind::kTimerExpiry,
                                   EventKind::kInterruptDelivery, EventKind::kMobilityUpdate,
                                   EventKind::kEnergySample,      EventKind::kUserDefined};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t at = s.find(sep, start);
    out.push_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) return out;
    start = at + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

NodeId parse_node(std::string_view s) {
  s = trim(s);
  std::uint64_t v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty() || v > kBroadcast)
    throw Error("bad node id '" + std::string(s) + "' in log filter");
  return static_cast<NodeId>(v);
}

SimTime parse_seconds(std::string_view s) {
  s = trim(s);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || s.empty())
    throw Error("bad time '" + std::string(s) + "' in log filter");
  try {
    return SimTime::from_seconds(v);
  } catch (const Error&) {
    throw Error("bad time '" + std::string(s) + "' in log filter");
  }
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoFailure("write failed for " + path.string());
}

}  // namespace

void ScalarStats::add(double v) {
  ++count;
  sum += v;
  min = std::min(min, v);
  max = std::max(max, v);
}

void ScalarStats::merge(const ScalarStats& o) {
  count += o.count;
  sum += o.sum;
  min = std::min(min, o.min);
  max = std::max(max, o.max);
}

LogFilter LogFilter::all() {
  LogFilter f;
  f.kinds.insert(std::begin(kAllKinds), std::end(kAllKinds));
  f.nodes = {{0, kBroadcast}};
  return f;
}

LogFilter LogFilter::none() {
  LogFilter f = all();
  f.kinds.clear();
  return f;
}

LogFilter LogFilter::parse(std::string_view spec) {
  LogFilter f = all();
  spec = trim(spec);
  if (spec.empty()) return f;
  std::set<std::string_view> seen;
  for (std::string_view clause : split(spec, ',')) {
    clause = trim(clause);
    const std::size_t eq = clause.find('=');
    if (eq == std::string_view::npos) throw Error("log filter clause '" + std::string(clause) + "' lacks '='");
    const std::string_view key = trim(clause.substr(0, eq));
    const std::string_view value = trim(clause.substr(eq + 1));
    if (!seen.insert(key).second) throw Error("log filter clause '" + std::string(key) + "' repeated");
    if (key == "kinds") {
      f.kinds.clear();
      if (value.empty()) continue;
      for (std::string_view name : split(value, '+')) {
        const auto kind = parse_event_kind(trim(name));
        if (!kind) throw Error("unknown event kind '" + std::string(trim(name)) + "'");
        f.kinds.insert(*kind);
      }
    } else if (key == "nodes") {
      f.nodes.clear();
      if (value.empty()) continue;
      for (std::string_view range : split(value, '+')) {
        const std::size_t dash = range.find('-');
        const NodeId lo = parse_node(range.substr(0, dash));
        const NodeId hi = dash == std::string_view::npos ? lo : parse_node(range.substr(dash + 1));
        if (hi < lo) throw Error("empty node range '" + std::string(range) + "'");
        f.nodes.emplace_back(lo, hi);
      }
    } else if (key == "window") {
      const std::size_t colon = value.find(':');
      if (colon == std::string_view::npos) throw Error("window needs START:STOP");
      const std::string_view a = trim(value.substr(0, colon));
      const std::string_view b = trim(value.substr(colon + 1));
      f.window_start = a.empty() ? SimTime::zero() : parse_seconds(a);
      f.window_stop = b.empty() ? SimTime::max() : parse_seconds(b);
      if (f.window_stop < f.window_start) throw Error("window stop precedes start");
    } else {
      throw Error("unknown log filter clause '" + std::string(key) + "'");
    }
  }
  return f;
}

bool LogFilter::matches(EventKind kind, NodeId node, SimTime t) const {
  if (t < window_start || t > window_stop) return false;
  if (!kinds.contains(kind)) return false;
  return std::any_of(nodes.begin(), nodes.end(),
                     [&](const auto& r) { return node >= r.first && node <= r.second; });
}

std::string LogFilter::to_string() const {
  std::string out = "kinds=";
  bool first = true;
  for (EventKind k : kinds) {
    if (!first) out += '+';
    out += wsnsim::to_string(k);
    first = false;
  }
  out += ",nodes=";
  first = true;
  for (const auto& [lo, hi] : nodes) {
    if (!first) out += '+';
    out += std::to_string(lo);
    if (hi != lo) out += "-" + std::to_string(hi);
    first = false;
  }
  out += ",window=" + format_seconds(window_start) + ":";
  if (window_stop != SimTime::max()) out += format_seconds(window_stop);
  return out;
}

Telemetry::Telemetry(LogFilter filter) : filter_(std::move(filter)) {}

Telemetry::Probe& Telemetry::probe(std::string_view name, ProbeKind kind) {
  auto it = probes_.find(name);
  if (it == probes_.end()) {
    if (name.empty()) throw Error("probe name must not be empty");
    it = probes_.emplace(std::string(name), Probe{kind, "", {}, {}}).first;
  } else if (it->second.kind != kind) {
    throw KindMismatch("probe " + std::string(name) + " is registered as " +
                       (it->second.kind == ProbeKind::kScalar ? "scalar" : "vector"));
  }
  return it->second;
}

void Telemetry::register_probe(std::string_view name, ProbeKind kind, std::string units) {
  Probe& p = probe(name, kind);
  if (!units.empty()) p.units = std::move(units);
}

void Telemetry::record_scalar(std::string_view name, double value) {
  probe(name, ProbeKind::kScalar).stats.add(value);
}

void Telemetry::record_vector(std::string_view name, SimTime t, double value, EventId id) {
  Probe& p = probe(name, ProbeKind::kVector);
  if (!p.points.empty() && t < p.points.back().time)
    throw TimeRegression("probe " + std::string(name) + ": point at " + std::to_string(t.ticks) +
                         " ns after one at " + std::to_string(p.points.back().time.ticks) + " ns");
  p.points.push_back({t, id, value});
}

bool Telemetry::log_event(const Event& event, std::string_view detail) {
  return log_event(event.time, event.id, event.kind, event.target, detail);
}

bool Telemetry::log_event(SimTime time, EventId id, EventKind kind, NodeId node, std::string_view detail) {
  if (!filter_.matches(kind, node, time)) return false;
  const std::uint64_t offset = trace_buffer_.size();
  trace_buffer_ += std::to_string(time.ticks);
  trace_buffer_ += '\t';
  trace_buffer_ += to_string(kind);
  trace_buffer_ += '\t';
  if (node == kInternal)
    trace_buffer_ += '-';
  else
    trace_buffer_ += std::to_string(node);
  trace_buffer_ += '\t';
  trace_buffer_ += detail;
  trace_buffer_ += '\n';
  trace_index_.push_back({time.ticks, id, offset, static_cast<std::uint32_t>(trace_buffer_.size() - offset)});
  return true;
}

std::string Telemetry::trace_text() const { return trace_buffer_; }

const ScalarStats* Telemetry::scalar(std::string_view name) const {
  auto it = probes_.find(name);
  return it != probes_.end() && it->second.kind == ProbeKind::kScalar ? &it->second.stats : nullptr;
}

const std::vector<VectorPoint>* Telemetry::vector(std::string_view name) const {
  auto it = probes_.find(name);
  return it != probes_.end() && it->second.kind == ProbeKind::kVector ? &it->second.points : nullptr;
}

std::vector<std::string> Telemetry::probe_names() const {
  std::vector<std::string> out;
  for (const auto& [name, p] : probes_) out.push_back(name);
  return out;
}

std::string probe_file_name(std::string_view probe) {
  std::string out;
  for (char c : probe) {
    const bool safe = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '-' || c == '_';
    out += safe ? c : '_';
  }
  return "vector_" + out + ".tsv";
}

Manifest Telemetry::flush(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw IoFailure("cannot create directory " + dir.string() + (ec ? ": " + ec.message() : ""));

  Manifest manifest;
  {
    const auto path = dir / "trace.tsv";
    auto out = open_for_write(path);
    out.write(trace_buffer_.data(), static_cast<std::streamsize>(trace_buffer_.size()));
    finish(out, path);
    manifest.push_back({path, trace_index_.size()});
  }
  {
    const auto path = dir / "scalars.tsv";
    auto out = open_for_write(path);
    out << "# name\tcount\tsum\tmin\tmax\tmean\n";
    std::uint64_t lines = 0;
    for (const auto& [name, p] : probes_) {
      if (p.kind != ProbeKind::kScalar || p.stats.count == 0) continue;
      out << name << '\t' << p.stats.count << '\t' << fmt_double(p.stats.sum) << '\t'
          << fmt_double(p.stats.min) << '\t' << fmt_double(p.stats.max) << '\t'
          << fmt_double(p.stats.mean()) << '\n';
      ++lines;
    }
    finish(out, path);
    manifest.push_back({path, lines});
  }
  for (const auto& [name, p] : probes_) {
    if (p.kind != ProbeKind::kVector) continue;
    const auto path = dir / probe_file_name(name);
    auto out = open_for_write(path);
    out << "# " << name;
    if (!p.units.empty()) out << " [" << p.units << "]";
    out << "\n# time_s\tvalue\n";
    for (const VectorPoint& pt : p.points) out << format_seconds(pt.time) << '\t' << fmt_double(pt.value) << '\n';
    finish(out, path);
    manifest.push_back({path, p.points.size()});
  }
  return manifest;
}

Telemetry Telemetry::merge(const std::vector<const Telemetry*>& parts) {
  Telemetry out(parts.empty() ? LogFilter::all() : parts.front()->filter_);

  // trace: k-way merge by (time, id)
  using Cursor = std::pair<std::size_t, std::size_t>;  // part, line
  auto later = [&](const Cursor& a, const Cursor& b) {
    const TraceLine& x = parts[a.first]->trace_index_[a.second];
    const TraceLine& y = parts[b.first]->trace_index_[b.second];
    return x.time != y.time ? x.time > y.time : x.id > y.id;
  };
  std::priority_queue<Cursor, std::vector<Cursor>, decltype(later)> heads(later);
  std::size_t total = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i]->trace_index_.empty()) heads.push({i, 0});
    total += parts[i]->trace_buffer_.size();
  }
  out.trace_buffer_.reserve(total);
  while (!heads.empty()) {
    const auto [part, line] = heads.top();
    heads.pop();
    const TraceLine& tl = parts[part]->trace_index_[line];
    out.trace_index_.push_back({tl.time, tl.id, out.trace_buffer_.size(), tl.length});
    out.trace_buffer_.append(parts[part]->trace_buffer_, tl.offset, tl.length);
    if (line + 1 < parts[part]->trace_index_.size()) heads.push({part, line + 1});
  }

  for (const Telemetry* t : parts) {
    for (const auto& [name, p] : t->probes_) {
      Probe& dst = out.probe(name, p.kind);
      if (dst.units.empty()) dst.units = p.units;
      if (p.kind == ProbeKind::kScalar) {
        dst.stats.merge(p.stats);
      } else {
        std::vector<VectorPoint> merged;
        merged.reserve(dst.points.size() + p.points.size());
        std::merge(dst.points.begin(), dst.points.end(), p.points.begin(), p.points.end(),
                   std::back_inserter(merged), [](const VectorPoint& a, const VectorPoint& b) {
                     return a.time != b.time ? a.time < b.time : a.id < b.id;
                   });
        dst.points = std::move(merged);
      }
    }
  }
  return out;
}

}  // namespace wsnsim
