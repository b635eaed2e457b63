#include "faasim/simcore.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <queue>
#include <span>
#include <thread>

#include "csv_util.hpp"
#include "faasim/error.hpp"

namespace faasim {

KeepAlivePolicy parse_keepalive(std::string_view text) {
  text = detail::trim(text);
  if (text == "none") return NoKeepAlive{};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError("keepalive '" + std::string(text) +
                          "': expected fixed:<seconds>, halving:<seconds> or none");
  }
  const auto kind = text.substr(0, colon);
  const auto value = detail::parse_int<std::int64_t>(text.substr(colon + 1));
  if (!value) throw ValidationError("keepalive '" + std::string(text) + "': seconds must be an integer");
  if (kind == "fixed") {
    if (*value < 0) throw ValidationError("keepalive timeout_s must be >= 0");
    return FixedTimeout{*value};
  }
  if (kind == "halving") {
    if (*value < 1) throw ValidationError("keepalive interval_s must be >= 1");
    return HalvingInterval{*value};
  }
  throw ValidationError("keepalive kind '" + std::string(kind) + "' is not fixed, halving or none");
}

std::string to_string(const KeepAlivePolicy& policy) {
  if (const auto* f = std::get_if<FixedTimeout>(&policy)) return "fixed:" + std::to_string(f->timeout_s);
  if (const auto* h = std::get_if<HalvingInterval>(&policy)) {
    return "halving:" + std::to_string(h->interval_s);
  }
  return "none";
}

void validate_config(const SimConfig& config) {
  if (config.timestep_s != 1) throw ValidationError("timestep_s must be 1");
  if (const auto* f = std::get_if<FixedTimeout>(&config.keepalive); f && f->timeout_s < 0) {
    throw ValidationError("keepalive timeout_s must be >= 0");
  }
  if (const auto* h = std::get_if<HalvingInterval>(&config.keepalive); h && h->interval_s < 1) {
    throw ValidationError("keepalive interval_s must be >= 1");
  }
}

void IdlePool::push(IdleWorker w) { workers_.push_back(w); }

IdleWorker IdlePool::pop_most_recent() {
  auto w = workers_.back();
  workers_.pop_back();
  return w;
}

IdleWorker IdlePool::pop_longest_idle() {
  auto w = workers_.front();
  workers_.pop_front();
  return w;
}

std::uint64_t evict(IdlePool& pool, const KeepAlivePolicy& policy, std::int64_t t) {
  std::uint64_t removed = 0;
  if (const auto* fixed = std::get_if<FixedTimeout>(&policy)) {
    while (!pool.empty() && t - pool.longest_idle().idle_since_s > fixed->timeout_s) {
      pool.pop_longest_idle();
      ++removed;
    }
  } else if (const auto* halving = std::get_if<HalvingInterval>(&policy)) {
    if (t > 0 && t % halving->interval_s == 0) {
      const auto n = pool.size() / 2;
      for (std::size_t i = 0; i < n; ++i) pool.pop_longest_idle();
      removed = n;
    }
  } else {
    removed = pool.size();
    while (!pool.empty()) pool.pop_longest_idle();
  }
  return removed;
}

Assignment assign(IdlePool& pool, std::uint64_t arrivals, std::vector<IdleWorker>* taken) {
  Assignment a;
  a.warm = std::min<std::uint64_t>(arrivals, pool.size());
  a.cold = arrivals - a.warm;
  for (std::uint64_t i = 0; i < a.warm; ++i) {
    auto w = pool.pop_most_recent();
    if (taken) taken->push_back(w);
  }
  return a;
}

SimResult SimResult::from_series(std::vector<TimestepMetrics> series) {
  SimResult r;
  for (const auto& m : series) {
    r.totals.requests += m.arrivals();
    r.totals.cold_starts += m.cold_starts;
    r.totals.warm_starts += m.warm_starts;
    r.totals.evictions += m.evictions;
    r.totals.idle_worker_seconds += m.idle;
    r.totals.busy_worker_seconds += m.busy;
    r.totals.peak_total_workers = std::max(r.totals.peak_total_workers, m.total);
  }
  r.series = std::move(series);
  return r;
}

std::uint64_t min_capacity(const SimResult& result) {
  if (result.series.empty()) throw ValidationError("min_capacity: empty series");
  return result.totals.peak_total_workers;
}

namespace {

// Per-timestep counters summed over the functions one thread simulated.
struct Accumulator {
  explicit Accumulator(std::size_t horizon)
      : busy(horizon), idle(horizon), cold(horizon), warm(horizon), evictions(horizon) {}

  std::vector<std::uint64_t> busy, idle, cold, warm, evictions;
};

struct Completion {
  std::int64_t step;
  std::uint64_t id;
  bool operator>(const Completion& o) const {
    return step != o.step ? step > o.step : id > o.id;
  }
};

// A worker assigned at t with duration d is busy until t*1000 + d ms and turns
// idle at the first timestep boundary at or after that instant.
std::int64_t completion_step(std::int64_t t, std::uint32_t duration_ms) {
  return t + (static_cast<std::int64_t>(duration_ms) + 999) / 1000;
}

void simulate_function(std::span<const ArrivalRecord> records, std::int64_t horizon,
                       const KeepAlivePolicy& policy, Accumulator& acc) {
  const bool keep_alive = !std::holds_alternative<NoKeepAlive>(policy);
  std::priority_queue<Completion, std::vector<Completion>, std::greater<>> running;
  IdlePool pool;
  std::uint64_t next_id = 0;
  std::size_t next = 0;
  std::vector<IdleWorker> taken;

  for (std::int64_t t = 0; t < horizon; ++t) {
    if (running.empty() && pool.empty()) {
      if (next == records.size()) break;
      t = records[next].t;
    }
    const auto step = static_cast<std::size_t>(t);

    // COMPLETE
    while (!running.empty() && running.top().step <= t) {
      const auto done = running.top();
      running.pop();
      if (keep_alive) {
        pool.push({t, done.id});
      } else {
        ++acc.evictions[step];
      }
    }

    // EVICT
    acc.evictions[step] += evict(pool, policy, t);

    // ASSIGN
    for (; next < records.size() && records[next].t == t; ++next) {
      const auto& r = records[next];
      const auto done = completion_step(t, r.duration_ms);
      taken.clear();
      const auto a = assign(pool, r.count, &taken);
      for (const auto& w : taken) running.push({done, w.id});
      for (std::uint64_t i = 0; i < a.cold; ++i) running.push({done, next_id++});
      acc.warm[step] += a.warm;
      acc.cold[step] += a.cold;
    }

    // RECORD
    acc.busy[step] += running.size();
    acc.idle[step] += pool.size();
  }
}

}  // namespace

SimResult simulate(const Trace& trace, const SimConfig& config, unsigned threads) {
  validate_config(config);
  if (const auto violations = validate_trace(trace); !violations.empty()) {
    const auto& v = violations.front();
    throw ValidationError("invalid trace (" + v.invariant + "): " + v.message +
                          (v.record_index ? " at record " + std::to_string(*v.record_index) : ""));
  }

  const auto horizon = static_cast<std::size_t>(trace.horizon_s);
  const auto nfunc = trace.functions.size();

  // Group records by function, keeping time order.
  std::vector<std::size_t> offsets(nfunc + 1, 0);
  for (const auto& r : trace.records) ++offsets[r.function + 1];
  for (std::size_t f = 0; f < nfunc; ++f) offsets[f + 1] += offsets[f];
  std::vector<ArrivalRecord> grouped(trace.records.size());
  {
    auto cursor = offsets;
    for (const auto& r : trace.records) grouped[cursor[r.function]++] = r;
  }

  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(nfunc, 1)));
  std::vector<Accumulator> accs(threads, Accumulator(horizon));
  auto run = [&](unsigned worker) {
    for (std::size_t f = worker; f < nfunc; f += threads) {
      std::span<const ArrivalRecord> recs(grouped.data() + offsets[f], offsets[f + 1] - offsets[f]);
      simulate_function(recs, trace.horizon_s, config.keepalive, accs[worker]);
    }
  };
  if (threads == 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run, w);
  }

  std::vector<TimestepMetrics> series(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    auto& m = series[t];
    m.t = static_cast<std::int64_t>(t);
    for (const auto& a : accs) {
      m.busy += a.busy[t];
      m.idle += a.idle[t];
      m.cold_starts += a.cold[t];
      m.warm_starts += a.warm[t];
      m.evictions += a.evictions[t];
    }
    m.total = m.busy + m.idle;
  }
  return SimResult::from_series(std::move(series));
}

namespace {
constexpr std::string_view kMetricsHeader = "t,busy,idle,cold_starts,warm_starts,evictions,total";
}

void emit_metrics_csv(const SimResult& result, std::ostream& out) {
  out << kMetricsHeader << '\n';
  for (const auto& m : result.series) {
    out << m.t << ',' << m.busy << ',' << m.idle << ',' << m.cold_starts << ',' << m.warm_starts
        << ',' << m.evictions << ',' << m.total << '\n';
  }
}

SimResult parse_metrics_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<TimestepMetrics> series;
  while (detail::read_line(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != kMetricsHeader) {
        throw ParseError(lineno, "expected header '" + std::string(kMetricsHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = detail::split(text);
    if (f.size() != 7) throw ParseError(lineno, "expected 7 fields, got " + std::to_string(f.size()));
    TimestepMetrics m;
    const auto t = detail::parse_int<std::int64_t>(f[0]);
    if (!t) throw ParseError(lineno, "t must be an integer");
    m.t = *t;
    std::uint64_t* fields[] = {&m.busy, &m.idle, &m.cold_starts, &m.warm_starts, &m.evictions, &m.total};
    for (std::size_t i = 0; i < 6; ++i) {
      const auto v = detail::parse_int<std::uint64_t>(f[i + 1]);
      if (!v) throw ParseError(lineno, "field " + std::to_string(i + 2) + " must be a non-negative integer");
      *fields[i] = *v;
    }
    if (m.t != static_cast<std::int64_t>(series.size())) {
      throw ParseError(lineno, "expected t=" + std::to_string(series.size()));
    }
    if (m.total != m.busy + m.idle) throw ParseError(lineno, "total != busy + idle");
    series.push_back(m);
  }
  if (!header_seen) throw ParseError(0, "empty metrics input");
  return SimResult::from_series(std::move(series));
}

}  // namespace faasim
