#include "faasim/energy.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <set>

#include "json.hpp"

#include "csv_util.hpp"
#include "faasim/error.hpp"

namespace faasim {

void validate_profile(const IsolationProfile& p) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("profile '" + p.name + "': " + what);
  };
  if (p.name.empty()) throw ValidationError("profile: name must not be empty");
  if (!FunctionId::is_valid(p.name)) fail("name must match [A-Za-z0-9_-]+");
  if (!(p.start_energy_j >= 0.0) || !std::isfinite(p.start_energy_j)) {
    fail("start_energy_j must be >= 0 (got " + detail::format_double(p.start_energy_j) + ")");
  }
  if (!(p.idle_power_w >= 0.0) || !std::isfinite(p.idle_power_w)) {
    fail("idle_power_w must be >= 0 (got " + detail::format_double(p.idle_power_w) + ")");
  }
  if (!p.warm_pool && p.reserve_accounting) fail("reserve_accounting requires warm_pool");
}

const std::vector<IsolationProfile>& builtin_profiles() {
  static const std::vector<IsolationProfile> profiles = {
#define FAASIM_PROFILE(name, start, idle, warm, reserve) {#name, start, idle, warm, reserve},
#include "faasim/builtin_profiles.def"
#undef FAASIM_PROFILE
  };
  return profiles;
}

const IsolationProfile& builtin_profile(std::string_view name) {
  for (const auto& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  throw ValidationError("no built-in profile named '" + std::string(name) + "'");
}

namespace {

template <typename T>
bool read_field(const nlohmann::json& obj, const std::string& profile, const char* key, T& out,
                bool required) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ValidationError("profile '" + profile + "': missing field " + key);
    return false;
  }
  try {
    out = it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("profile '" + profile + "': field " + key + " has the wrong type");
  }
  return true;
}

}  // namespace

std::vector<IsolationProfile> load_profiles(std::istream& in) {
  const std::string text(std::istreambuf_iterator<char>(in), {});
  auto profiles = builtin_profiles();
  if (detail::trim(text).empty()) return profiles;

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("profiles file: ") + e.what());
  }
  if (!doc.is_array()) throw ParseError(0, "profiles file must be a JSON array");

  std::set<std::string> seen;
  for (const auto& obj : doc) {
    if (!obj.is_object()) throw ParseError(0, "profiles file entries must be objects");
    std::string name;
    read_field(obj, "?", "name", name, true);
    if (!seen.insert(name).second) throw ValidationError("duplicate profile name '" + name + "'");

    auto existing = std::find_if(profiles.begin(), profiles.end(),
                                 [&](const auto& p) { return p.name == name; });
    const bool builtin = existing != profiles.end();
    IsolationProfile p = builtin ? *existing : IsolationProfile{name};
    read_field(obj, name, "start_energy_j", p.start_energy_j, !builtin);
    read_field(obj, name, "idle_power_w", p.idle_power_w, !builtin);
    read_field(obj, name, "warm_pool", p.warm_pool, !builtin);
    read_field(obj, name, "reserve_accounting", p.reserve_accounting, !builtin);
    validate_profile(p);
    if (builtin) {
      *existing = std::move(p);
    } else {
      profiles.push_back(std::move(p));
    }
  }
  return profiles;
}

EnergySeries excess_energy(const SimResult& result, const IsolationProfile& profile,
                           std::optional<std::uint64_t> capacity) {
  validate_profile(profile);
  if (profile.reserve_accounting) {
    if (!capacity) {
      throw ValidationError("profile '" + profile.name + "' needs a reserve capacity");
    }
    if (*capacity < result.totals.peak_total_workers) {
      throw ValidationError("capacity " + std::to_string(*capacity) + " is below the peak of " +
                            std::to_string(result.totals.peak_total_workers) + " workers");
    }
  }

  EnergySeries out;
  out.profile = profile.name;
  out.cumulative_j.reserve(result.series.size());
  std::uint64_t starts = 0;
  std::uint64_t idle_worker_seconds = 0;
  for (const auto& m : result.series) {
    starts += profile.warm_pool ? m.cold_starts : m.arrivals();
    if (profile.warm_pool) idle_worker_seconds += profile.reserve_accounting ? *capacity - m.busy : m.idle;
    out.cumulative_j.push_back(profile.start_energy_j * static_cast<double>(starts) +
                               profile.idle_power_w * static_cast<double>(idle_worker_seconds));
  }
  out.total_j = out.cumulative_j.empty() ? 0.0 : out.cumulative_j.back();
  const auto wall = static_cast<double>(result.series.size());
  out.avg_excess_power_w = wall > 0 ? out.total_j / wall : 0.0;
  return out;
}

double break_even_idle(const IsolationProfile& profile) {
  validate_profile(profile);
  if (profile.idle_power_w == 0.0) {
    throw ValidationError("profile '" + profile.name +
                          "' draws no idle power; idling never costs more than a restart");
  }
  return profile.start_energy_j / profile.idle_power_w;
}

double integrate_power(std::span<const PowerSample> samples, double t0, double t1) {
  if (!(t0 < t1)) throw ValidationError("integration window needs t0 < t1");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].t_s) || !std::isfinite(samples[i].power_w)) {
      throw ValidationError("power sample " + std::to_string(i) + " is not finite");
    }
    if (samples[i].power_w < 0) {
      throw ValidationError("power sample " + std::to_string(i) + " is negative");
    }
    if (i > 0 && !(samples[i - 1].t_s < samples[i].t_s)) {
      throw ValidationError("power sample timestamps must be strictly increasing (sample " +
                            std::to_string(i) + ")");
    }
  }
  if (samples.size() < 2 || samples.front().t_s > t0 || samples.back().t_s < t1) {
    throw ValidationError("integration window [" + detail::format_double(t0) + ", " +
                          detail::format_double(t1) + "] is outside the sampled range");
  }

  // First segment whose right end lies beyond t0.
  auto it = std::upper_bound(samples.begin(), samples.end(), t0,
                             [](double t, const PowerSample& s) { return t < s.t_s; });
  std::size_t i = static_cast<std::size_t>(std::distance(samples.begin(), it));
  i = std::clamp<std::size_t>(i, 1, samples.size() - 1) - 1;

  auto at = [&](std::size_t seg, double t) {
    const auto& a = samples[seg];
    const auto& b = samples[seg + 1];
    if (t == a.t_s) return a.power_w;
    if (t == b.t_s) return b.power_w;
    return a.power_w + (b.power_w - a.power_w) * (t - a.t_s) / (b.t_s - a.t_s);
  };

  double area = 0.0;
  for (; i + 1 < samples.size() && samples[i].t_s < t1; ++i) {
    const double lo = std::max(samples[i].t_s, t0);
    const double hi = std::min(samples[i + 1].t_s, t1);
    if (hi > lo) area += 0.5 * (hi - lo) * (at(i, lo) + at(i, hi));
  }
  return area;
}

std::vector<PowerSample> parse_power_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::vector<PowerSample> out;
  while (detail::read_line(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      if (text != "t_s,power_w") throw ParseError(lineno, "expected header 't_s,power_w'");
      header_seen = true;
      continue;
    }
    const auto f = detail::split(text);
    if (f.size() != 2) throw ParseError(lineno, "expected 2 fields");
    const auto t = detail::parse_double(f[0]);
    const auto p = detail::parse_double(f[1]);
    if (!t || !p) throw ParseError(lineno, "fields must be numbers");
    if (*p < 0) throw ParseError(lineno, "power_w must be >= 0");
    if (!out.empty() && !(out.back().t_s < *t)) {
      throw ParseError(lineno, "t_s must be strictly increasing");
    }
    out.push_back({*t, *p});
  }
  if (out.empty()) throw ParseError(0, "no power samples");
  return out;
}

}  // namespace faasim
