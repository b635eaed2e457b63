#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faasim/energy.hpp"

namespace faasim {

inline constexpr double kJoulesPerKwh = 3.6e6;

struct ComparisonRow {
  std::string profile;
  double total_j = 0.0;
  double total_kwh = 0.0;
  /// 1 - total_j / baseline total_j.
  double reduction_vs_baseline = 0.0;
  double avg_excess_power_w = 0.0;
  /// Average power saved relative to the baseline, (baseline_total - total) / wall time.
  double power_delta_w = 0.0;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonSummary {
  std::string baseline;
  double wall_time_s = 0.0;
  std::vector<ComparisonRow> rows;

  friend bool operator==(const ComparisonSummary&, const ComparisonSummary&) = default;
};

/// Rows keep the order of `series`. Throws ValidationError on an empty list,
/// an unknown baseline or a non-positive wall time.
ComparisonSummary compare(std::span<const EnergySeries> series, const std::string& baseline,
                          double wall_time_s);

struct Extrapolation {
  /// Profile whose saving is scaled; empty when not tied to one.
  std::string profile;
  double base_rps = 0.0;
  double target_rps = 0.0;
  double base_power_delta_w = 0.0;
  double scaled_power_delta_w = 0.0;

  friend bool operator==(const Extrapolation&, const Extrapolation&) = default;
};

/// Scales a power delta linearly with request rate.
Extrapolation extrapolate_power(double base_power_delta_w, double base_rps, double target_rps);

/// `t,<profile>_cum_j,...`, one row per timestep, columns in input order.
void emit_energy_csv(std::span<const EnergySeries> series, std::ostream& out);

/// Inverse of emit_energy_csv. avg_excess_power_w is recomputed per timestep count.
std::vector<EnergySeries> parse_energy_csv(std::istream& in);

/// Stable field order. Reductions are rounded to 4 decimals; energies are
/// written in joules with the derived kWh alongside.
void emit_summary_json(const ComparisonSummary& summary, std::span<const Extrapolation> extrapolations,
                       std::ostream& out);

struct SummaryDocument {
  ComparisonSummary summary;
  std::vector<Extrapolation> extrapolations;
};

SummaryDocument parse_summary_json(std::istream& in);

}  // namespace faasim
