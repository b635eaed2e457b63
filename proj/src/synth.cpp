#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "faasim/error.hpp"
#include "faasim/trace.hpp"

// Synthetic workload generator.
//
// Randomness comes only from std::mt19937_64, whose output sequence is fixed by
// the C++ standard. The std:: distributions are implementation-defined, so the
// uniform and normal transforms below are written out by hand.

namespace faasim {

namespace {

constexpr double kDaySeconds = 86400.0;
constexpr double kMaxDurationMs = 3'600'000.0;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Box-Muller, cosine branch only.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

std::uint32_t draw_duration(const DurationDistribution& dist, Rng& rng) {
  if (const auto* fixed = std::get_if<FixedDuration>(&dist)) return fixed->ms;
  const auto& ln = std::get<LognormalDuration>(dist);
  const double ms = std::exp(ln.mu + ln.sigma * rng.normal());
  return static_cast<std::uint32_t>(std::clamp(std::round(ms), 1.0, kMaxDurationMs));
}

}  // namespace

void validate_synth_spec(const SynthSpec& spec) {
  auto fail = [](const char* field, const std::string& why) {
    throw ValidationError(std::string("synth spec: ") + field + " " + why);
  };
  if (spec.functions == 0) fail("functions", "must be >= 1");
  if (spec.horizon_s <= 0) fail("horizon_s", "must be >= 1");
  if (!(spec.base_rps > 0.0) || !std::isfinite(spec.base_rps)) fail("base_rps", "must be > 0");
  if (!(spec.diurnal_amplitude >= 0.0 && spec.diurnal_amplitude <= 1.0)) {
    fail("diurnal_amplitude", "must lie in [0, 1]");
  }
  if (!(spec.spike_rate_per_hour >= 0.0) || !std::isfinite(spec.spike_rate_per_hour)) {
    fail("spike_rate", "must be >= 0");
  }
  if (!(spec.spike_magnitude > 0.0) || !std::isfinite(spec.spike_magnitude)) {
    fail("spike_magnitude", "must be > 0");
  }
  if (spec.spike_duration_s <= 0) fail("spike_duration_s", "must be >= 1");
  if (const auto* fixed = std::get_if<FixedDuration>(&spec.duration)) {
    if (fixed->ms == 0) fail("duration", "fixed duration must be >= 1 ms");
  } else {
    const auto& ln = std::get<LognormalDuration>(spec.duration);
    if (!std::isfinite(ln.mu)) fail("duration", "lognormal mu must be finite");
    if (!(ln.sigma > 0.0) || !std::isfinite(ln.sigma)) fail("duration", "lognormal sigma must be > 0");
  }
}

double synth_rate(const SynthSpec& spec, std::int64_t t, bool in_spike) {
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(t) / kDaySeconds;
  const double rate = spec.base_rps * (1.0 + spec.diurnal_amplitude * std::sin(phase));
  return in_spike ? rate * spec.spike_magnitude : rate;
}

Trace generate_synthetic(const SynthSpec& spec, std::uint64_t seed) {
  validate_synth_spec(spec);
  Rng rng(seed);

  Trace trace;
  trace.horizon_s = spec.horizon_s;
  trace.functions.reserve(spec.functions);
  const int width = spec.functions > 1 ? static_cast<int>(std::log10(spec.functions - 1)) + 1 : 1;
  for (std::uint32_t i = 0; i < spec.functions; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "fn%0*u", width, i);
    trace.functions.emplace_back(name);
  }

  // Popularity weights, lognormal(0, 1.5), as a cumulative table.
  std::vector<double> cdf(spec.functions);
  double acc = 0.0;
  for (auto& c : cdf) {
    acc += std::exp(1.5 * rng.normal());
    c = acc;
  }
  for (auto& c : cdf) c /= acc;
  cdf.back() = 1.0;

  const auto spikes = static_cast<std::int64_t>(
      std::llround(spec.spike_rate_per_hour * static_cast<double>(spec.horizon_s) / 3600.0));
  std::vector<bool> in_spike(static_cast<std::size_t>(spec.horizon_s), false);
  for (std::int64_t s = 0; s < spikes; ++s) {
    const auto start = static_cast<std::int64_t>(rng.uniform() * static_cast<double>(spec.horizon_s));
    const auto end = std::min(spec.horizon_s, start + spec.spike_duration_s);
    for (auto t = start; t < end; ++t) in_spike[static_cast<std::size_t>(t)] = true;
  }

  std::vector<std::uint64_t> per_function(spec.functions, 0);
  double carry = 0.0;
  for (std::int64_t t = 0; t < spec.horizon_s; ++t) {
    carry += synth_rate(spec, t, in_spike[static_cast<std::size_t>(t)]);
    const double whole = std::floor(carry);
    carry -= whole;
    const auto arrivals = static_cast<std::uint64_t>(whole);
    if (arrivals == 0) continue;

    std::fill(per_function.begin(), per_function.end(), 0);
    for (std::uint64_t a = 0; a < arrivals; ++a) {
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), rng.uniform());
      ++per_function[static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), cdf.size() - 1))];
    }
    for (std::uint32_t f = 0; f < spec.functions; ++f) {
      if (per_function[f] == 0) continue;
      trace.records.push_back({t, per_function[f], f, draw_duration(spec.duration, rng)});
    }
  }
  return trace;
}

}  // namespace faasim
