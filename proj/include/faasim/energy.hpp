#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "faasim/simcore.hpp"

namespace faasim {

/// Energy characteristics of one worker isolation backend.
struct IsolationProfile {
  std::string name;
  double start_energy_j = 0.0;
  double idle_power_w = 0.0;
  /// false: every request boots a fresh worker and nothing ever idles.
  bool warm_pool = true;
  /// true: idle power is charged for all non-busy capacity up to a fixed fleet size.
  bool reserve_accounting = false;

  friend bool operator==(const IsolationProfile&, const IsolationProfile&) = default;
};

/// Throws ValidationError with a field-level message.
void validate_profile(const IsolationProfile& profile);

/// uvm, uvm_reserve, soc, soc_idle, in that order.
const std::vector<IsolationProfile>& builtin_profiles();
const IsolationProfile& builtin_profile(std::string_view name);

/// Reads a JSON array of profile objects. Entries named like a built-in override
/// it (omitted fields keep the built-in value); other names are appended and must
/// give every field. Blank input yields the built-ins.
std::vector<IsolationProfile> load_profiles(std::istream& in);

/// Cumulative excess (start + idle) energy over a simulation.
struct EnergySeries {
  std::string profile;
  std::vector<double> cumulative_j;
  double total_j = 0.0;
  double avg_excess_power_w = 0.0;
};

/// Per timestep: start_energy_j * starts(t) + idle_power_w * idle_base(t) * 1 s.
///
/// starts(t) is cold starts for warm-pool profiles and all arrivals otherwise.
/// idle_base(t) is idle(t), or capacity - busy(t) under reserve accounting, in
/// which case `capacity` is required and must cover the observed peak. Starts
/// and idle worker-seconds are accumulated as integers and scaled once per
/// step, so cumulative_j[t] = start * starts[0..t] + idle * idle[0..t].
EnergySeries excess_energy(const SimResult& result, const IsolationProfile& profile,
                           std::optional<std::uint64_t> capacity = std::nullopt);

/// Idle seconds after which keeping a worker warm costs more than restarting it.
/// Throws ValidationError when the profile draws no idle power.
double break_even_idle(const IsolationProfile& profile);

struct PowerSample {
  double t_s = 0.0;
  double power_w = 0.0;
};

/// Trapezoidal integral of power over [t0, t1], interpolating linearly at the
/// window edges. Samples must be strictly increasing in time and cover the window.
double integrate_power(std::span<const PowerSample> samples, double t0, double t1);

/// `t_s,power_w` CSV.
std::vector<PowerSample> parse_power_csv(std::istream& in);

}  // namespace faasim
