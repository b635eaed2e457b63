#include "faasim/trace.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <tuple>

#include "csv_util.hpp"
#include "faasim/error.hpp"

namespace faasim {

using detail::parse_int;
using detail::read_line;
using detail::split;
using detail::trim;

FunctionId::FunctionId(std::string_view id) : id_(trim(id)) {
  if (!is_valid(id_)) {
    throw ValidationError("invalid function id '" + std::string(id) +
                          "' (expected [A-Za-z0-9_-]+)");
  }
}

bool FunctionId::is_valid(std::string_view id) noexcept {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  });
}

void TraceBuilder::add(std::int64_t t, std::string_view function, std::uint64_t count,
                       std::uint32_t duration_ms) {
  FunctionId id(function);
  auto [it, inserted] = index_.try_emplace(id.str(), static_cast<std::uint32_t>(names_.size()));
  if (inserted) names_.push_back(std::move(id));
  rows_.push_back({t, count, it->second, duration_ms});
}

Trace TraceBuilder::build(std::optional<std::int64_t> horizon_s) && {
  Trace trace;
  trace.functions = std::move(names_);
  trace.records = std::move(rows_);
  std::int64_t max_t = -1;
  for (const auto& r : trace.records) max_t = std::max(max_t, r.t);
  if (horizon_s) {
    if (*horizon_s <= max_t) {
      throw ValidationError("record at t=" + std::to_string(max_t) +
                            " exceeds horizon_s=" + std::to_string(*horizon_s));
    }
    trace.horizon_s = *horizon_s;
  } else {
    trace.horizon_s = max_t + 1;
  }
  index_.clear();
  return normalize(std::move(trace));
}

Trace normalize(Trace trace) {
  const auto n = trace.functions.size();
  std::vector<std::uint32_t> order(n);
  for (std::uint32_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto a, auto b) { return trace.functions[a] < trace.functions[b]; });

  // Equal names collapse onto one slot.
  std::vector<std::uint32_t> remap(n);
  std::vector<FunctionId> sorted;
  sorted.reserve(n);
  for (auto old : order) {
    if (sorted.empty() || !(sorted.back() == trace.functions[old])) {
      sorted.push_back(trace.functions[old]);
    }
    remap[old] = static_cast<std::uint32_t>(sorted.size() - 1);
  }
  for (auto& r : trace.records) r.function = remap.at(r.function);
  trace.functions = std::move(sorted);

  auto key = [](const ArrivalRecord& r) { return std::tie(r.t, r.function, r.duration_ms); };
  std::stable_sort(trace.records.begin(), trace.records.end(),
                   [&](const auto& a, const auto& b) { return key(a) < key(b); });

  std::vector<ArrivalRecord> merged;
  merged.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    if (!merged.empty() && key(merged.back()) == key(r)) {
      if (merged.back().count > std::numeric_limits<std::uint64_t>::max() - r.count) {
        throw ValidationError("arrival count overflow at t=" + std::to_string(r.t));
      }
      merged.back().count += r.count;
    } else {
      merged.push_back(r);
    }
  }
  trace.records = std::move(merged);
  return trace;
}

std::optional<TraceFormat> parse_trace_format(std::string_view name) {
  if (name == "canonical" || name == "canonical-csv") return TraceFormat::Canonical;
  if (name == "huawei" || name == "huawei-adapter") return TraceFormat::Huawei;
  return std::nullopt;
}

namespace {

constexpr std::string_view kCanonicalHeader = "t,function,count,duration_ms";
constexpr std::string_view kHorizonKey = "horizon_s=";

std::optional<std::int64_t> parse_horizon_comment(std::string_view line, std::size_t lineno) {
  auto body = trim(line.substr(1));
  if (body.substr(0, kHorizonKey.size()) != kHorizonKey) return std::nullopt;
  auto v = parse_int<std::int64_t>(body.substr(kHorizonKey.size()));
  if (!v || *v <= 0) throw ParseError(lineno, "invalid horizon_s comment");
  return v;
}

Trace parse_canonical(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<std::int64_t> horizon;
  bool header_seen = false;
  TraceBuilder builder;

  while (read_line(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (text.front() == '#') {
      if (auto h = parse_horizon_comment(text, lineno)) {
        if (header_seen) throw ParseError(lineno, "horizon_s comment must precede the header");
        horizon = h;
      }
      continue;
    }
    if (!header_seen) {
      if (text != kCanonicalHeader) {
        throw ParseError(lineno, "expected header '" + std::string(kCanonicalHeader) + "'");
      }
      header_seen = true;
      continue;
    }

    const auto fields = split(text);
    if (fields.size() != 4) {
      throw ParseError(lineno, "expected 4 fields, got " + std::to_string(fields.size()));
    }
    const auto t = parse_int<std::int64_t>(fields[0]);
    if (!t || *t < 0) throw ParseError(lineno, "t must be a non-negative integer");
    if (!FunctionId::is_valid(fields[1])) {
      throw ParseError(lineno, "invalid function id '" + std::string(fields[1]) + "'");
    }
    const auto count = parse_int<std::int64_t>(fields[2]);
    if (!count) throw ParseError(lineno, "count must be an integer");
    if (*count <= 0) throw ParseError(lineno, "count must be >= 1");
    const auto duration = parse_int<std::int64_t>(fields[3]);
    if (!duration) throw ParseError(lineno, "duration_ms must be an integer");
    if (*duration <= 0) throw ParseError(lineno, "duration_ms must be >= 1");
    if (*duration > std::numeric_limits<std::uint32_t>::max()) {
      throw ParseError(lineno, "duration_ms out of range");
    }
    if (horizon && *t >= *horizon) {
      throw ParseError(lineno, "t=" + std::to_string(*t) + " exceeds horizon_s=" +
                                   std::to_string(*horizon));
    }
    builder.add(*t, fields[1], static_cast<std::uint64_t>(*count),
                static_cast<std::uint32_t>(*duration));
  }

  if (!header_seen) throw ParseError(0, "empty trace input");
  if (builder.empty()) throw ParseError(0, "trace contains no records");
  return std::move(builder).build(horizon);
}

constexpr std::int64_t kSecondsPerDay = 86400;

struct HuaweiTable {
  std::istream& in;
  std::size_t lineno = 0;
  std::optional<std::size_t> day_col;
  std::size_t time_col = 0;
  std::vector<std::string> columns;

  explicit HuaweiTable(std::istream& s) : in(s) {}

  void read_header(const char* what) {
    std::string line;
    while (read_line(in, line)) {
      ++lineno;
      if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw ParseError(0, std::string("empty ") + what + " table");
    std::optional<std::size_t> time;
    const auto fields = split(line);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string name(fields[i]);
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (name == "day") {
        day_col = i;
      } else if (name == "time") {
        time = i;
      }
      columns.emplace_back(fields[i]);
    }
    if (!time) throw ParseError(lineno, std::string(what) + " table lacks a 'time' column");
    time_col = *time;
  }

  bool is_function_column(std::size_t i) const { return i != time_col && i != day_col; }

  // Returns false at end of input.
  bool next(std::vector<std::string_view>& fields, std::string& storage) {
    while (read_line(in, storage)) {
      ++lineno;
      if (trim(storage).empty()) continue;
      fields = split(storage);
      if (fields.size() != columns.size()) {
        throw ParseError(lineno, "expected " + std::to_string(columns.size()) + " fields, got " +
                                     std::to_string(fields.size()));
      }
      return true;
    }
    return false;
  }

  std::int64_t integer_cell(std::string_view cell, const char* what) const {
    auto v = detail::parse_double(cell);
    if (!v || *v != std::floor(*v)) throw ParseError(lineno, std::string(what) + " is not an integer");
    return static_cast<std::int64_t>(*v);
  }
};

}  // namespace

Trace parse_huawei(std::istream& requests, std::istream* durations, const HuaweiOptions& options) {
  HuaweiTable req(requests);
  req.read_header("requests");
  std::optional<HuaweiTable> dur;
  std::vector<std::optional<std::size_t>> dur_index(req.columns.size());
  if (durations) {
    dur.emplace(*durations);
    dur->read_header("durations");
    for (std::size_t i = 0; i < req.columns.size(); ++i) {
      if (!req.is_function_column(i)) continue;
      for (std::size_t j = 0; j < dur->columns.size(); ++j) {
        if (dur->is_function_column(j) && dur->columns[j] == req.columns[i]) dur_index[i] = j;
      }
    }
  }
  for (std::size_t i = 0; i < req.columns.size(); ++i) {
    if (req.is_function_column(i) && !FunctionId::is_valid(req.columns[i])) {
      throw ParseError(1, "invalid function id '" + req.columns[i] + "'");
    }
  }

  std::optional<std::int64_t> day = options.day;
  TraceBuilder builder;
  std::vector<std::string_view> fields, dfields;
  std::string storage, dstorage;
  while (req.next(fields, storage)) {
    const std::int64_t row_day = req.day_col ? req.integer_cell(fields[*req.day_col], "day") : 0;
    const std::int64_t time = req.integer_cell(fields[req.time_col], "time");
    if (time < 0) throw ParseError(req.lineno, "time must be non-negative");
    if (dur) {
      if (!dur->next(dfields, dstorage)) {
        throw ParseError(dur->lineno, "durations table ends before requests table");
      }
      const std::int64_t dday = dur->day_col ? dur->integer_cell(dfields[*dur->day_col], "day") : 0;
      const std::int64_t dtime = dur->integer_cell(dfields[dur->time_col], "time");
      if (dday != row_day || dtime != time) {
        throw ParseError(dur->lineno, "durations row does not align with requests line " +
                                          std::to_string(req.lineno));
      }
    }
    if (!day) day = row_day;
    if (row_day != *day) continue;

    const std::int64_t t = time % kSecondsPerDay;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (!req.is_function_column(i) || fields[i].empty()) continue;
      const auto count = req.integer_cell(fields[i], "request count");
      if (count < 0) throw ParseError(req.lineno, "request count must be non-negative");
      if (count == 0) continue;
      std::uint32_t duration = options.default_duration_ms;
      if (dur && dur_index[i] && !dfields[*dur_index[i]].empty()) {
        auto ms = detail::parse_double(dfields[*dur_index[i]]);
        if (!ms || *ms < 0) throw ParseError(dur->lineno, "invalid duration cell");
        duration = static_cast<std::uint32_t>(
            std::clamp(std::ceil(*ms), 1.0, double(std::numeric_limits<std::uint32_t>::max())));
      }
      builder.add(t, req.columns[i], static_cast<std::uint64_t>(count), duration);
    }
  }
  if (builder.empty()) throw ParseError(0, "requests table contains no invocations");
  return std::move(builder).build(kSecondsPerDay);
}

Trace parse_trace(std::istream& in, TraceFormat format, const HuaweiOptions& options) {
  switch (format) {
    case TraceFormat::Canonical:
      return parse_canonical(in);
    case TraceFormat::Huawei:
      return parse_huawei(in, nullptr, options);
  }
  throw ValidationError("unknown trace format");
}

void emit_trace_csv(const Trace& trace, std::ostream& out) {
  out << "# horizon_s=" << trace.horizon_s << '\n' << kCanonicalHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.t << ',' << trace.function_of(r).str() << ',' << r.count << ',' << r.duration_ms
        << '\n';
  }
}

std::vector<Violation> validate_trace(const Trace& trace) {
  std::vector<Violation> out;
  if (trace.horizon_s < 0) out.push_back({"horizon", std::nullopt, "horizon_s is negative"});
  for (std::size_t i = 1; i < trace.functions.size(); ++i) {
    if (!(trace.functions[i - 1] < trace.functions[i])) {
      out.push_back({"function_table", std::nullopt,
                     "function table not strictly sorted at '" + trace.functions[i].str() + "'"});
    }
  }
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& r = trace.records[i];
    if (r.function >= trace.functions.size()) {
      out.push_back({"function", i, "function index out of range"});
    }
    if (r.count < 1) out.push_back({"count", i, "count must be >= 1"});
    if (r.duration_ms < 1) out.push_back({"duration", i, "duration_ms must be >= 1"});
    if (r.t < 0 || r.t >= trace.horizon_s) {
      out.push_back({"horizon", i, "t=" + std::to_string(r.t) + " outside [0, horizon_s)"});
    }
    if (i > 0) {
      const auto& p = trace.records[i - 1];
      const auto prev = std::tie(p.t, p.function, p.duration_ms);
      const auto cur = std::tie(r.t, r.function, r.duration_ms);
      if (cur < prev) {
        out.push_back({"ordering", i, "record not sorted by (t, function)"});
      } else if (cur == prev) {
        out.push_back({"duplicate", i, "duplicate (t, function, duration_ms) record"});
      }
    }
  }
  return out;
}

TraceStats trace_stats(const Trace& trace) {
  TraceStats s;
  s.function_count = trace.functions.size();
  std::uint64_t second_total = 0;
  std::int64_t second = -1;
  for (const auto& r : trace.records) {
    if (r.t != second) {
      second = r.t;
      second_total = 0;
    }
    second_total += r.count;
    s.total_requests += r.count;
    s.max_per_second_arrivals = std::max(s.max_per_second_arrivals, second_total);
  }
  s.avg_rps = trace.horizon_s > 0
                  ? static_cast<double>(s.total_requests) / static_cast<double>(trace.horizon_s)
                  : 0.0;
  return s;
}

}  // namespace faasim
