#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "faasim/trace.hpp"

namespace faasim {

/// Idle workers older than `timeout_s` seconds are evicted. A worker idle for
/// exactly `timeout_s` survives.
struct FixedTimeout {
  std::int64_t timeout_s = 900;
  friend bool operator==(const FixedTimeout&, const FixedTimeout&) = default;
};

/// At every t > 0 divisible by `interval_s`, the longest-idle half (rounded down)
/// of each function's idle pool is evicted.
struct HalvingInterval {
  std::int64_t interval_s = 380;
  friend bool operator==(const HalvingInterval&, const HalvingInterval&) = default;
};

/// Workers are destroyed as soon as their execution completes.
struct NoKeepAlive {
  friend bool operator==(const NoKeepAlive&, const NoKeepAlive&) = default;
};

using KeepAlivePolicy = std::variant<FixedTimeout, HalvingInterval, NoKeepAlive>;

/// Accepts `fixed:<seconds>`, `halving:<seconds>` and `none`.
KeepAlivePolicy parse_keepalive(std::string_view text);
std::string to_string(const KeepAlivePolicy& policy);

enum class SchedulerPolicy { LowestIdleFirst };

struct SimConfig {
  std::int64_t timestep_s = 1;
  KeepAlivePolicy keepalive = FixedTimeout{};
  SchedulerPolicy scheduler = SchedulerPolicy::LowestIdleFirst;
};

/// Throws ValidationError when the config cannot be simulated.
void validate_config(const SimConfig& config);

struct IdleWorker {
  std::int64_t idle_since_s = 0;
  std::uint64_t id = 0;  // creation order within the function
  friend bool operator==(const IdleWorker&, const IdleWorker&) = default;
};

struct BusyWorker {
  std::int64_t busy_until_ms = 0;
  std::uint64_t id = 0;
};

/// Idle workers of one function, ordered by (idle_since_s, id).
/// Front is the longest idle, back the most recently idled. Both ends are O(1).
class IdlePool {
 public:
  /// Appends at the recent end. The worker must not sort before the current back.
  void push(IdleWorker w);
  IdleWorker pop_most_recent();
  IdleWorker pop_longest_idle();

  const IdleWorker& most_recent() const { return workers_.back(); }
  const IdleWorker& longest_idle() const { return workers_.front(); }
  std::size_t size() const noexcept { return workers_.size(); }
  bool empty() const noexcept { return workers_.empty(); }
  const std::deque<IdleWorker>& workers() const noexcept { return workers_; }

 private:
  std::deque<IdleWorker> workers_;
};

/// Applies the keep-alive policy at timestep t and returns how many workers were removed.
/// Under NoKeepAlive the pool is expected to be empty already; any stragglers are removed.
std::uint64_t evict(IdlePool& pool, const KeepAlivePolicy& policy, std::int64_t t);

struct Assignment {
  std::uint64_t warm = 0;
  std::uint64_t cold = 0;
};

/// Serves `arrivals` invocations from `pool`, lowest idle duration first.
/// Reused workers are appended to `taken` when given.
Assignment assign(IdlePool& pool, std::uint64_t arrivals, std::vector<IdleWorker>* taken = nullptr);

struct TimestepMetrics {
  std::int64_t t = 0;
  std::uint64_t busy = 0;
  std::uint64_t idle = 0;
  std::uint64_t cold_starts = 0;
  std::uint64_t warm_starts = 0;
  std::uint64_t evictions = 0;
  std::uint64_t total = 0;

  std::uint64_t arrivals() const noexcept { return cold_starts + warm_starts; }
  friend bool operator==(const TimestepMetrics&, const TimestepMetrics&) = default;
};

struct SimTotals {
  std::uint64_t requests = 0;
  std::uint64_t cold_starts = 0;
  std::uint64_t warm_starts = 0;
  std::uint64_t evictions = 0;
  std::uint64_t idle_worker_seconds = 0;
  std::uint64_t busy_worker_seconds = 0;
  std::uint64_t peak_total_workers = 0;
  friend bool operator==(const SimTotals&, const SimTotals&) = default;
};

struct SimResult {
  std::vector<TimestepMetrics> series;
  SimTotals totals;

  /// Builds a result whose totals are the exact sums and maxima of `series`.
  static SimResult from_series(std::vector<TimestepMetrics> series);

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// Replays `trace` one second at a time. Each step runs COMPLETE, EVICT, ASSIGN
/// and RECORD in that order. Functions are simulated independently and may be
/// spread over `threads` workers; the result does not depend on the thread count.
SimResult simulate(const Trace& trace, const SimConfig& config, unsigned threads = 1);

/// Peak concurrent workers. Throws ValidationError on an empty series.
std::uint64_t min_capacity(const SimResult& result);

/// `t,busy,idle,cold_starts,warm_starts,evictions,total`, one row per timestep.
void emit_metrics_csv(const SimResult& result, std::ostream& out);

/// Reads a metrics CSV back. Rejects rows breaking total = busy + idle or skipping timesteps.
SimResult parse_metrics_csv(std::istream& in);

}  // namespace faasim
