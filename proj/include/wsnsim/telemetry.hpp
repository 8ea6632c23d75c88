#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wsnsim/kernel.hpp"
#include "wsnsim/sim_time.hpp"

namespace wsnsim {

enum class ProbeKind : std::uint8_t { kScalar, kVector };

struct ScalarStats {
  std::uint64_t count = 0;
  double sum = 0.0;
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  void add(double v);
  void merge(const ScalarStats& o);
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

struct VectorPoint {
  SimTime time;
  EventId id = 0;  // orders equal-time points when partitions are merged
  double value = 0.0;
};

/// Which dispatched events reach the trace. Each clause defaults to
/// "everything"; an empty kind set logs nothing.
struct LogFilter {
  std::set<EventKind> kinds;
  std::vector<std::pair<NodeId, NodeId>> nodes;  // inclusive ranges
  SimTime window_start = SimTime::zero();
  SimTime window_stop = SimTime::max();

  static LogFilter all();
  static LogFilter none();
  /// `kinds=a+b,nodes=0-9+20,window=START:STOP` (seconds); clauses optional.
  static LogFilter parse(std::string_view spec);

  bool matches(EventKind kind, NodeId node, SimTime t) const;
  std::string to_string() const;

  friend bool operator==(const LogFilter&, const LogFilter&) = default;
};

struct ManifestEntry {
  std::filesystem::path path;
  std::uint64_t lines = 0;
};
using Manifest = std::vector<ManifestEntry>;

/// Probes plus the filtered event trace of one kernel.
class Telemetry {
 public:
  explicit Telemetry(LogFilter filter = LogFilter::all());

  const LogFilter& filter() const { return filter_; }

  /// Registering twice with the same kind is harmless; a different kind
  /// throws KindMismatch. Recording to an unregistered name registers it.
  void register_probe(std::string_view name, ProbeKind kind, std::string units = "");

  void record_scalar(std::string_view name, double value);
  /// Throws TimeRegression if `t` precedes the probe's last point.
  void record_vector(std::string_view name, SimTime t, double value, EventId id = 0);

  /// Appends the event to the trace if the filter lets it through.
  bool log_event(const Event& event, std::string_view detail);
  bool log_event(SimTime time, EventId id, EventKind kind, NodeId node, std::string_view detail);

  /// Writes trace.tsv, scalars.tsv and one vector_<name>.tsv per vector
  /// probe. Throws IoFailure naming the path that could not be written.
  Manifest flush(const std::filesystem::path& dir) const;

  /// Interleaves per-partition results: trace and vectors by (time, id),
  /// scalars combined in the order given.
  static Telemetry merge(const std::vector<const Telemetry*>& parts);

  std::uint64_t trace_lines() const { return trace_index_.size(); }
  /// The trace exactly as trace.tsv would hold it.
  std::string trace_text() const;
  const ScalarStats* scalar(std::string_view name) const;
  const std::vector<VectorPoint>* vector(std::string_view name) const;
  std::vector<std::string> probe_names() const;

 private:
  struct Probe {
    ProbeKind kind = ProbeKind::kScalar;
    std::string units;
    ScalarStats stats;
    std::vector<VectorPoint> points;
  };
  struct TraceLine {
    std::uint64_t time;
    EventId id;
    std::uint64_t offset;
    std::uint32_t length;
  };

  Probe& probe(std::string_view name, ProbeKind kind);

  LogFilter filter_;
  std::map<std::string, Probe, std::less<>> probes_;
  std::string trace_buffer_;
  std::vector<TraceLine> trace_index_;
};

/// Escapes a probe name into something safe for a file name.
std::string probe_file_name(std::string_view probe);

}  // namespace wsnsim
