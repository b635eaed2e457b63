#include "faasim/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "csv_util.hpp"
#include "faasim/energy.hpp"
#include "faasim/error.hpp"
#include "faasim/manifest.hpp"
#include "faasim/measured.hpp"
#include "faasim/report.hpp"
#include "faasim/simcore.hpp"
#include "faasim/trace.hpp"
#include "faasim/version.hpp"

namespace fs = std::filesystem;

namespace faasim::cli {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

void close_output(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

struct TraceInput {
  std::string path;
  std::string format = "canonical";
  std::string huawei_durations;
  std::optional<std::int64_t> huawei_day;
  std::uint32_t huawei_default_duration_ms = 1000;

  void add_options(CLI::App& app) {
    app.add_option("--trace", path, "Trace file")->required();
    app.add_option("--format", format, "Trace format: canonical | huawei")
        ->check(CLI::IsMember({"canonical", "canonical-csv", "huawei", "huawei-adapter"}))
        ->capture_default_str();
    app.add_option("--huawei-durations", huawei_durations,
                   "Huawei adapter: per-second mean execution time table (ms)");
    app.add_option("--huawei-day", huawei_day, "Huawei adapter: day to select (default: first)");
    app.add_option("--huawei-default-duration-ms", huawei_default_duration_ms,
                   "Huawei adapter: duration when no duration cell exists")
        ->capture_default_str();
  }

  Trace load(RunManifest& manifest) const {
    manifest.inputs.push_back(digest_file(path));
    auto in = open_input(path);
    const auto fmt = *parse_trace_format(format);
    if (fmt == TraceFormat::Canonical) return parse_trace(in);
    HuaweiOptions opts{huawei_day, huawei_default_duration_ms};
    if (huawei_durations.empty()) return parse_huawei(in, nullptr, opts);
    manifest.inputs.push_back(digest_file(huawei_durations));
    auto din = open_input(huawei_durations);
    return parse_huawei(in, &din, opts);
  }

  void record(nlohmann::ordered_json& params) const {
    params["trace"] = path;
    params["format"] = format;
    if (!huawei_durations.empty()) params["huawei_durations"] = huawei_durations;
    if (huawei_day) params["huawei_day"] = *huawei_day;
    if (*parse_trace_format(format) == TraceFormat::Huawei) {
      params["huawei_default_duration_ms"] = huawei_default_duration_ms;
    }
  }
};

nlohmann::ordered_json totals_json(const SimTotals& t) {
  return {{"requests", t.requests},
          {"cold_starts", t.cold_starts},
          {"warm_starts", t.warm_starts},
          {"evictions", t.evictions},
          {"idle_worker_seconds", t.idle_worker_seconds},
          {"busy_worker_seconds", t.busy_worker_seconds},
          {"peak_total_workers", t.peak_total_workers}};
}

// --- simulate --------------------------------------------------------------

struct SimulateArgs {
  TraceInput trace;
  std::string keepalive = "fixed:900";
  std::string out_dir;
  unsigned threads = 1;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "simulate";
  SimConfig config;
  config.keepalive = parse_keepalive(args.keepalive);
  const auto trace = args.trace.load(manifest);
  ensure_dir(args.out_dir);

  const auto result = simulate(trace, config, args.threads);
  const auto metrics_path = fs::path(args.out_dir) / "metrics.csv";
  auto csv = open_output(metrics_path);
  emit_metrics_csv(result, csv);
  close_output(csv, metrics_path);

  args.trace.record(manifest.parameters);
  manifest.parameters["keepalive"] = to_string(config.keepalive);
  manifest.parameters["scheduler"] = "lowest-idle-first";
  manifest.parameters["timestep_s"] = config.timestep_s;
  manifest.parameters["threads"] = args.threads;
  manifest.parameters["out_dir"] = args.out_dir;
  manifest.outputs = {"metrics.csv"};
  manifest.results = totals_json(result.totals);
  manifest.results["horizon_s"] = trace.horizon_s;
  manifest.results["function_count"] = trace.functions.size();
  manifest.wall_clock_s = seconds_since(start);
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.json");

  out << "simulated " << trace.horizon_s << " s, " << result.totals.requests << " requests, "
      << result.totals.cold_starts << " cold starts, peak " << result.totals.peak_total_workers
      << " workers\n";
  return kOk;
}

// --- energy ----------------------------------------------------------------

struct EnergyArgs {
  std::string metrics;
  std::string profiles_path;
  std::vector<std::string> select;
  std::optional<std::uint64_t> capacity;
  std::string baseline = "uvm";
  std::vector<double> target_rps{measured::kProviderScaleRps};
  std::string out_dir;
};

int cmd_energy(const EnergyArgs& args, std::ostream& out) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.command = "energy";
  manifest.inputs.push_back(digest_file(args.metrics));
  auto min = open_input(args.metrics);
  const auto result = parse_metrics_csv(min);
  if (result.series.empty()) throw ValidationError("metrics file has no timesteps");

  std::vector<IsolationProfile> profiles;
  if (args.profiles_path.empty()) {
    profiles = builtin_profiles();
  } else {
    manifest.inputs.push_back(digest_file(args.profiles_path));
    auto pin = open_input(args.profiles_path);
    profiles = load_profiles(pin);
  }
  if (!args.select.empty()) {
    std::vector<IsolationProfile> chosen;
    for (const auto& name : args.select) {
      auto it = std::find_if(profiles.begin(), profiles.end(), [&](const auto& p) { return p.name == name; });
      if (it == profiles.end()) throw ValidationError("unknown profile '" + name + "'");
      chosen.push_back(*it);
    }
    profiles = std::move(chosen);
  }

  const auto capacity = args.capacity.value_or(min_capacity(result));
  if (capacity < result.totals.peak_total_workers) {
    throw ValidationError("capacity " + std::to_string(capacity) + " is below the observed peak of " +
                          std::to_string(result.totals.peak_total_workers) + " workers");
  }

  std::vector<EnergySeries> series;
  for (const auto& p : profiles) series.push_back(excess_energy(result, p, capacity));

  const auto baseline = std::any_of(series.begin(), series.end(),
                                    [&](const auto& s) { return s.profile == args.baseline; })
                            ? args.baseline
                            : series.front().profile;
  const double wall = static_cast<double>(result.series.size());
  const auto summary = compare(series, baseline, wall);

  std::vector<Extrapolation> extrapolations;
  const double base_rps = static_cast<double>(result.totals.requests) / wall;
  if (base_rps > 0) {
    for (const auto& row : summary.rows) {
      if (row.profile == baseline) continue;
      for (double target : args.target_rps) {
        auto e = extrapolate_power(row.power_delta_w, base_rps, target);
        e.profile = row.profile;
        extrapolations.push_back(e);
      }
    }
  }

  ensure_dir(args.out_dir);
  const auto energy_path = fs::path(args.out_dir) / "energy.csv";
  auto csv = open_output(energy_path);
  emit_energy_csv(series, csv);
  close_output(csv, energy_path);
  const auto summary_path = fs::path(args.out_dir) / "summary.json";
  auto json = open_output(summary_path);
  emit_summary_json(summary, extrapolations, json);
  close_output(json, summary_path);

  manifest.parameters["metrics"] = args.metrics;
  if (!args.profiles_path.empty()) manifest.parameters["profiles"] = args.profiles_path;
  auto& prof = manifest.parameters["profiles_used"] = nlohmann::ordered_json::array();
  for (const auto& p : profiles) {
    prof.push_back({{"name", p.name},
                    {"start_energy_j", p.start_energy_j},
                    {"idle_power_w", p.idle_power_w},
                    {"warm_pool", p.warm_pool},
                    {"reserve_accounting", p.reserve_accounting}});
  }
  manifest.parameters["capacity"] = capacity;
  manifest.parameters["capacity_source"] = args.capacity ? "flag" : "min_capacity";
  manifest.parameters["baseline"] = baseline;
  manifest.parameters["target_rps"] = args.target_rps;
  manifest.parameters["out_dir"] = args.out_dir;
  manifest.outputs = {"energy.csv", "summary.json"};
  manifest.results = totals_json(result.totals);
  for (const auto& row : summary.rows) manifest.results["excess_j"][row.profile] = row.total_j;
  manifest.wall_clock_s = seconds_since(start);
  write_manifest(manifest, fs::path(args.out_dir) / "manifest.json");

  char line[256];
  for (const auto& row : summary.rows) {
    std::snprintf(line, sizeof line, "%-16s %14.6f kWh  %8.2f %% vs %s  avg %.3f W\n", row.profile.c_str(),
                  row.total_kwh, 100.0 * row.reduction_vs_baseline, baseline.c_str(),
                  row.avg_excess_power_w);
    out << line;
  }
  return kOk;
}

// --- synth -----------------------------------------------------------------

struct SynthArgs {
  SynthSpec spec;
  std::string duration = "lognormal:6,1";
  std::uint64_t seed = 1;
  std::string out_path;
};

DurationDistribution parse_duration(std::string_view text) {
  const auto colon = text.find(':');
  const auto kind = text.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (kind == "fixed") {
    const auto ms = detail::parse_int<std::uint32_t>(rest);
    if (!ms || *ms == 0) throw ValidationError("duration: fixed:<ms> needs a positive integer");
    return FixedDuration{*ms};
  }
  if (kind == "lognormal") {
    const auto parts = detail::split(rest);
    const auto mu = parts.size() == 2 ? detail::parse_double(parts[0]) : std::nullopt;
    const auto sigma = parts.size() == 2 ? detail::parse_double(parts[1]) : std::nullopt;
    if (!mu || !sigma) throw ValidationError("duration: expected lognormal:<mu>,<sigma>");
    return LognormalDuration{*mu, *sigma};
  }
  throw ValidationError("duration: expected fixed:<ms> or lognormal:<mu>,<sigma>");
}

int cmd_synth(SynthArgs args, std::ostream& out) {
  const auto start = Clock::now();
  args.spec.duration = parse_duration(args.duration);
  const auto trace = generate_synthetic(args.spec, args.seed);

  const fs::path path(args.out_path);
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  auto file = open_output(path);
  emit_trace_csv(trace, file);
  close_output(file, path);

  RunManifest manifest;
  manifest.command = "synth";
  auto& p = manifest.parameters;
  p["functions"] = args.spec.functions;
  p["horizon_s"] = args.spec.horizon_s;
  p["base_rps"] = args.spec.base_rps;
  p["amplitude"] = args.spec.diurnal_amplitude;
  p["spike_rate_per_hour"] = args.spec.spike_rate_per_hour;
  p["spike_magnitude"] = args.spec.spike_magnitude;
  p["spike_duration_s"] = args.spec.spike_duration_s;
  p["duration"] = args.duration;
  p["seed"] = args.seed;
  p["out"] = args.out_path;
  manifest.outputs = {path.filename().string()};
  const auto stats = trace_stats(trace);
  manifest.results = {{"records", trace.records.size()},
                      {"total_requests", stats.total_requests},
                      {"avg_rps", stats.avg_rps},
                      {"sha256", digest_file(path).sha256}};
  manifest.wall_clock_s = seconds_since(start);
  write_manifest(manifest, fs::path(args.out_path + ".manifest.json"));

  out << "wrote " << trace.records.size() << " records (" << stats.total_requests << " requests) to "
      << args.out_path << '\n';
  return kOk;
}

// --- integrate -------------------------------------------------------------

struct IntegrateArgs {
  std::string samples;
  double t0 = 0.0;
  double t1 = 0.0;
};

int cmd_integrate(const IntegrateArgs& args, std::ostream& out) {
  auto in = open_input(args.samples);
  const auto samples = parse_power_csv(in);
  const double joules = integrate_power(samples, args.t0, args.t1);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.6g J\n", joules);
  out << buf;
  return kOk;
}

// --- stats -----------------------------------------------------------------

int cmd_stats(const TraceInput& input, std::ostream& out) {
  RunManifest unused;
  const auto trace = input.load(unused);
  const auto s = trace_stats(trace);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", s.avg_rps);
  out << "horizon_s: " << trace.horizon_s << '\n'
      << "total_requests: " << s.total_requests << '\n'
      << "avg_rps: " << buf << '\n'
      << "function_count: " << s.function_count << '\n'
      << "max_per_second_arrivals: " << s.max_per_second_arrivals << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"faasim: serverless worker-pool simulation and excess-energy accounting", "faasim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "Replay a trace through per-function worker pools");
  sim.trace.add_options(*simulate_cmd);
  simulate_cmd->add_option("--keepalive", sim.keepalive, "fixed:<seconds> | halving:<seconds> | none")
      ->capture_default_str();
  simulate_cmd->add_option("--out", sim.out_dir, "Output directory (metrics.csv, manifest.json)")->required();
  simulate_cmd->add_option("--threads", sim.threads, "Worker threads (does not change results)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  EnergyArgs energy;
  auto* energy_cmd = app.add_subcommand("energy", "Excess energy per isolation profile from a metrics CSV");
  energy_cmd->add_option("--metrics", energy.metrics, "metrics.csv written by simulate")->required();
  energy_cmd->add_option("--profiles", energy.profiles_path, "JSON profile definitions (default: built-ins)");
  energy_cmd->add_option("--select", energy.select, "Profiles to evaluate, in column order")->delimiter(',');
  energy_cmd->add_option("--capacity", energy.capacity,
                         "Reserve fleet size in workers (default: observed peak)");
  energy_cmd->add_option("--baseline", energy.baseline, "Profile to compare against")->capture_default_str();
  energy_cmd->add_option("--target-rps", energy.target_rps, "Request rates for linear power extrapolation")
      ->delimiter(',')
      ->capture_default_str();
  energy_cmd->add_option("--out", energy.out_dir, "Output directory (energy.csv, summary.json, manifest.json)")
      ->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic diurnal trace");
  synth_cmd->add_option("--functions", synth.spec.functions, "Number of functions")->capture_default_str();
  synth_cmd->add_option("--horizon-s", synth.spec.horizon_s, "Trace length in seconds")->capture_default_str();
  synth_cmd->add_option("--base-rps", synth.spec.base_rps, "Mean request rate")->capture_default_str();
  synth_cmd->add_option("--amplitude", synth.spec.diurnal_amplitude, "Diurnal amplitude in [0, 1]")
      ->capture_default_str();
  synth_cmd->add_option("--spike-rate", synth.spec.spike_rate_per_hour, "Spikes per hour")->capture_default_str();
  synth_cmd->add_option("--spike-magnitude", synth.spec.spike_magnitude, "Rate multiplier during a spike")
      ->capture_default_str();
  synth_cmd->add_option("--spike-duration-s", synth.spec.spike_duration_s, "Spike length in seconds")
      ->capture_default_str();
  synth_cmd->add_option("--duration", synth.duration, "fixed:<ms> | lognormal:<mu>,<sigma> (ms scale)")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "PRNG seed (mt19937_64)")->capture_default_str();
  synth_cmd->add_option("--out", synth.out_path, "Output trace CSV")->required();

  IntegrateArgs integ;
  auto* integrate_cmd = app.add_subcommand("integrate", "Integrate power samples over a time window");
  integrate_cmd->add_option("--samples", integ.samples, "CSV with header t_s,power_w")->required();
  integrate_cmd->add_option("--t0", integ.t0, "Window start (s)")->required();
  integrate_cmd->add_option("--t1", integ.t1, "Window end (s)")->required();

  TraceInput stats;
  auto* stats_cmd = app.add_subcommand("stats", "Print trace statistics");
  stats.add_options(*stats_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate_cmd) return cmd_simulate(sim, out);
    if (*energy_cmd) return cmd_energy(energy, out);
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*integrate_cmd) return cmd_integrate(integ, out);
    if (*stats_cmd) return cmd_stats(stats, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace faasim::cli
