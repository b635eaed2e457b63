#pragma once

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace faasim {

/// Stable identifier of one serverless function. Restricted to `[A-Za-z0-9_-]+`
/// after trimming surrounding whitespace, so it can be written unquoted to CSV.
class FunctionId {
 public:
  explicit FunctionId(std::string_view id);

  const std::string& str() const noexcept { return id_; }

  friend auto operator<=>(const FunctionId&, const FunctionId&) = default;
  friend bool operator==(const FunctionId&, const FunctionId&) = default;

  static bool is_valid(std::string_view id) noexcept;

 private:
  std::string id_;
};

/// `count` invocations of one function arriving in [t, t+1), each running `duration_ms`.
/// `function` indexes Trace::functions.
struct ArrivalRecord {
  std::int64_t t = 0;
  std::uint64_t count = 0;
  std::uint32_t function = 0;
  std::uint32_t duration_ms = 0;

  friend bool operator==(const ArrivalRecord&, const ArrivalRecord&) = default;
};

/// A normalized invocation trace.
///
/// `functions` is sorted and unique, so ordering records by function index is the
/// same as ordering them by function id. Records are sorted by (t, function,
/// duration_ms); rows sharing all three are merged. Two records may share
/// (t, function) only when their durations differ.
struct Trace {
  std::vector<FunctionId> functions;
  std::vector<ArrivalRecord> records;
  std::int64_t horizon_s = 0;

  const FunctionId& function_of(const ArrivalRecord& r) const { return functions.at(r.function); }

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Accumulates rows keyed by function name and produces a normalized Trace.
class TraceBuilder {
 public:
  void add(std::int64_t t, std::string_view function, std::uint64_t count,
           std::uint32_t duration_ms);

  /// Horizon defaults to max(t)+1. Throws ValidationError if an explicit horizon
  /// does not cover every record.
  Trace build(std::optional<std::int64_t> horizon_s = std::nullopt) &&;

  bool empty() const noexcept { return rows_.empty(); }

 private:
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<FunctionId> names_;
  std::vector<ArrivalRecord> rows_;
};

/// Sorts the function table, remaps indices, sorts records and merges duplicates.
Trace normalize(Trace trace);

enum class TraceFormat { Canonical, Huawei };

std::optional<TraceFormat> parse_trace_format(std::string_view name);

/// Options for the Huawei per-second table adapter (see docs/trace-formats.md).
struct HuaweiOptions {
  /// Which `day` to keep when the table spans several days. Defaults to the first day seen.
  std::optional<std::int64_t> day;
  /// Used when no duration table is supplied or its cell is empty.
  std::uint32_t default_duration_ms = 1000;
};

/// Parses a trace. Throws ParseError (with line number) on malformed input,
/// non-positive counts or durations, rows beyond a declared horizon, or empty input.
Trace parse_trace(std::istream& in, TraceFormat format = TraceFormat::Canonical,
                  const HuaweiOptions& options = {});

/// Huawei adapter with an optional companion table of per-second mean execution times.
Trace parse_huawei(std::istream& requests, std::istream* durations,
                   const HuaweiOptions& options = {});

/// Writes the canonical CSV form, including the `# horizon_s=` comment line.
void emit_trace_csv(const Trace& trace, std::ostream& out);

struct Violation {
  std::string invariant;
  std::optional<std::size_t> record_index;
  std::string message;
};

/// Empty iff every Trace invariant holds.
std::vector<Violation> validate_trace(const Trace& trace);

struct TraceStats {
  std::uint64_t total_requests = 0;
  double avg_rps = 0.0;
  std::size_t function_count = 0;
  std::uint64_t max_per_second_arrivals = 0;
};

TraceStats trace_stats(const Trace& trace);

struct FixedDuration {
  std::uint32_t ms = 1000;
};

/// Execution time in ms is exp(mu + sigma * z), z standard normal.
struct LognormalDuration {
  double mu = 0.0;
  double sigma = 1.0;
};

using DurationDistribution = std::variant<FixedDuration, LognormalDuration>;

/// Parameters for the synthetic diurnal workload generator.
struct SynthSpec {
  std::uint32_t functions = 200;
  std::int64_t horizon_s = 86400;
  double base_rps = 500.0;
  double diurnal_amplitude = 0.5;
  double spike_rate_per_hour = 2.0;
  double spike_magnitude = 5.0;
  std::int64_t spike_duration_s = 10;
  DurationDistribution duration = LognormalDuration{6.0, 1.0};
};

/// Throws ValidationError naming the first offending field.
void validate_synth_spec(const SynthSpec& spec);

/// Deterministic in (spec, seed). Per-second totals follow the modulated rate
/// exactly (fractional parts carried forward); arrivals are split across
/// functions by seeded popularity weights.
Trace generate_synthetic(const SynthSpec& spec, std::uint64_t seed);

/// Request rate of the generator at second t, before integer carrying.
/// `in_spike` says whether t falls inside a spike window.
double synth_rate(const SynthSpec& spec, std::int64_t t, bool in_spike);

}  // namespace faasim
