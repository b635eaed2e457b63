#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "faasim/energy.hpp"
#include "faasim/error.hpp"
#include "faasim/report.hpp"
#include "faasim/simcore.hpp"
#include "faasim/trace.hpp"

namespace py = pybind11;
using namespace faasim;

namespace {

Trace parse_trace_text(const std::string& text, const std::string& format) {
  const auto fmt = parse_trace_format(format);
  if (!fmt) throw ValidationError("unknown trace format '" + format + "'");
  std::istringstream in(text);
  return parse_trace(in, *fmt);
}

std::string trace_to_csv(const Trace& trace) {
  std::ostringstream out;
  emit_trace_csv(trace, out);
  return out.str();
}

std::string metrics_to_csv(const SimResult& r) {
  std::ostringstream out;
  emit_metrics_csv(r, out);
  return out.str();
}

SimResult metrics_from_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_metrics_csv(in);
}

std::vector<IsolationProfile> profiles_from_json(const std::string& text) {
  std::istringstream in(text);
  return load_profiles(in);
}

std::string energy_to_csv(const std::vector<EnergySeries>& series) {
  std::ostringstream out;
  emit_energy_csv(series, out);
  return out.str();
}

std::string summary_to_json(const ComparisonSummary& s, const std::vector<Extrapolation>& e) {
  std::ostringstream out;
  emit_summary_json(s, e, out);
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_faasim, m) {
  m.doc() = "Serverless worker-pool simulation and excess-energy accounting";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<ArrivalRecord>(m, "ArrivalRecord")
      .def_readonly("t", &ArrivalRecord::t)
      .def_readonly("count", &ArrivalRecord::count)
      .def_readonly("function", &ArrivalRecord::function)
      .def_readonly("duration_ms", &ArrivalRecord::duration_ms);

  py::class_<Trace>(m, "Trace")
      .def_property_readonly("functions",
                             [](const Trace& t) {
                               std::vector<std::string> ids;
                               for (const auto& f : t.functions) ids.push_back(f.str());
                               return ids;
                             })
      .def_readonly("records", &Trace::records)
      .def_readonly("horizon_s", &Trace::horizon_s)
      .def("to_csv", &trace_to_csv)
      .def("__len__", [](const Trace& t) { return t.records.size(); });

  py::class_<TraceStats>(m, "TraceStats")
      .def_readonly("total_requests", &TraceStats::total_requests)
      .def_readonly("avg_rps", &TraceStats::avg_rps)
      .def_readonly("function_count", &TraceStats::function_count)
      .def_readonly("max_per_second_arrivals", &TraceStats::max_per_second_arrivals);

  m.def("parse_trace", &parse_trace_text, py::arg("text"), py::arg("format") = "canonical");
  m.def(
      "build_trace",
      [](const std::vector<std::tuple<std::int64_t, std::string, std::uint64_t, std::uint32_t>>& rows,
         std::optional<std::int64_t> horizon_s) {
        TraceBuilder b;
        for (const auto& [t, f, count, dur] : rows) b.add(t, f, count, dur);
        return std::move(b).build(horizon_s);
      },
      py::arg("rows"), py::arg("horizon_s") = py::none(),
      "Build a trace from (t, function, count, duration_ms) tuples.");
  m.def("trace_stats", &trace_stats);
  m.def(
      "validate_trace",
      [](const Trace& t) {
        std::vector<std::tuple<std::string, std::optional<std::size_t>, std::string>> out;
        for (const auto& v : validate_trace(t)) out.emplace_back(v.invariant, v.record_index, v.message);
        return out;
      });
  m.def(
      "generate_synthetic",
      [](std::uint32_t functions, std::int64_t horizon_s, double base_rps, double amplitude, double spike_rate,
         double spike_magnitude, std::int64_t spike_duration_s, std::optional<std::uint32_t> fixed_ms, double mu,
         double sigma, std::uint64_t seed) {
        SynthSpec spec{functions, horizon_s, base_rps, amplitude, spike_rate, spike_magnitude, spike_duration_s};
        if (fixed_ms) {
          spec.duration = FixedDuration{*fixed_ms};
        } else {
          spec.duration = LognormalDuration{mu, sigma};
        }
        return generate_synthetic(spec, seed);
      },
      py::arg("functions") = 200, py::arg("horizon_s") = 86400, py::arg("base_rps") = 500.0,
      py::arg("amplitude") = 0.5, py::arg("spike_rate") = 2.0, py::arg("spike_magnitude") = 5.0,
      py::arg("spike_duration_s") = 10, py::arg("fixed_ms") = py::none(), py::arg("mu") = 6.0,
      py::arg("sigma") = 1.0, py::arg("seed") = 1);

  py::class_<TimestepMetrics>(m, "TimestepMetrics")
      .def_readonly("t", &TimestepMetrics::t)
      .def_readonly("busy", &TimestepMetrics::busy)
      .def_readonly("idle", &TimestepMetrics::idle)
      .def_readonly("cold_starts", &TimestepMetrics::cold_starts)
      .def_readonly("warm_starts", &TimestepMetrics::warm_starts)
      .def_readonly("evictions", &TimestepMetrics::evictions)
      .def_readonly("total", &TimestepMetrics::total);

  py::class_<SimTotals>(m, "SimTotals")
      .def_readonly("requests", &SimTotals::requests)
      .def_readonly("cold_starts", &SimTotals::cold_starts)
      .def_readonly("warm_starts", &SimTotals::warm_starts)
      .def_readonly("evictions", &SimTotals::evictions)
      .def_readonly("idle_worker_seconds", &SimTotals::idle_worker_seconds)
      .def_readonly("busy_worker_seconds", &SimTotals::busy_worker_seconds)
      .def_readonly("peak_total_workers", &SimTotals::peak_total_workers);

  py::class_<SimResult>(m, "SimResult")
      .def_readonly("series", &SimResult::series)
      .def_readonly("totals", &SimResult::totals)
      .def("to_csv", &metrics_to_csv)
      .def_static("from_csv", &metrics_from_csv);

  m.def(
      "simulate",
      [](const Trace& trace, const std::string& keepalive, unsigned threads) {
        SimConfig config;
        config.keepalive = parse_keepalive(keepalive);
        py::gil_scoped_release release;
        return simulate(trace, config, threads);
      },
      py::arg("trace"), py::arg("keepalive") = "fixed:900", py::arg("threads") = 1);
  m.def("min_capacity", &min_capacity);

  py::class_<IsolationProfile>(m, "IsolationProfile")
      .def(py::init<std::string, double, double, bool, bool>(), py::arg("name"), py::arg("start_energy_j"),
           py::arg("idle_power_w"), py::arg("warm_pool") = true, py::arg("reserve_accounting") = false)
      .def_readwrite("name", &IsolationProfile::name)
      .def_readwrite("start_energy_j", &IsolationProfile::start_energy_j)
      .def_readwrite("idle_power_w", &IsolationProfile::idle_power_w)
      .def_readwrite("warm_pool", &IsolationProfile::warm_pool)
      .def_readwrite("reserve_accounting", &IsolationProfile::reserve_accounting)
      .def("__repr__", [](const IsolationProfile& p) { return "<IsolationProfile " + p.name + ">"; });

  m.def("builtin_profiles", &builtin_profiles);
  m.def("builtin_profile", &builtin_profile, py::arg("name"));
  m.def("load_profiles", &profiles_from_json, py::arg("json_text"));
  m.def("break_even_idle", &break_even_idle);

  py::class_<EnergySeries>(m, "EnergySeries")
      .def_readonly("profile", &EnergySeries::profile)
      .def_readonly("cumulative_j", &EnergySeries::cumulative_j)
      .def_readonly("total_j", &EnergySeries::total_j)
      .def_readonly("avg_excess_power_w", &EnergySeries::avg_excess_power_w);

  m.def("excess_energy", &excess_energy, py::arg("result"), py::arg("profile"), py::arg("capacity") = py::none());

  m.def(
      "integrate_power",
      [](const std::vector<std::pair<double, double>>& samples, double t0, double t1) {
        std::vector<PowerSample> s;
        for (const auto& [t, p] : samples) s.push_back({t, p});
        return integrate_power(s, t0, t1);
      },
      py::arg("samples"), py::arg("t0"), py::arg("t1"), "samples: list of (t_s, power_w)");

  py::class_<ComparisonRow>(m, "ComparisonRow")
      .def_readonly("profile", &ComparisonRow::profile)
      .def_readonly("total_j", &ComparisonRow::total_j)
      .def_readonly("total_kwh", &ComparisonRow::total_kwh)
      .def_readonly("reduction_vs_baseline", &ComparisonRow::reduction_vs_baseline)
      .def_readonly("avg_excess_power_w", &ComparisonRow::avg_excess_power_w)
      .def_readonly("power_delta_w", &ComparisonRow::power_delta_w);

  py::class_<ComparisonSummary>(m, "ComparisonSummary")
      .def_readonly("baseline", &ComparisonSummary::baseline)
      .def_readonly("wall_time_s", &ComparisonSummary::wall_time_s)
      .def_readonly("rows", &ComparisonSummary::rows);

  py::class_<Extrapolation>(m, "Extrapolation")
      .def_readwrite("profile", &Extrapolation::profile)
      .def_readonly("base_rps", &Extrapolation::base_rps)
      .def_readonly("target_rps", &Extrapolation::target_rps)
      .def_readonly("base_power_delta_w", &Extrapolation::base_power_delta_w)
      .def_readonly("scaled_power_delta_w", &Extrapolation::scaled_power_delta_w);

  m.def(
      "compare",
      [](const std::vector<EnergySeries>& series, const std::string& baseline, double wall_time_s) {
        return compare(series, baseline, wall_time_s);
      },
      py::arg("series"), py::arg("baseline"), py::arg("wall_time_s"));
  m.def("extrapolate_power", &extrapolate_power, py::arg("base_power_delta_w"), py::arg("base_rps"),
        py::arg("target_rps"));
  m.def("energy_csv", &energy_to_csv, py::arg("series"));
  m.def("summary_json", &summary_to_json, py::arg("summary"), py::arg("extrapolations") = std::vector<Extrapolation>{});
}
