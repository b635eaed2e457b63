#include "faasim/report.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>

#include "json.hpp"

#include "csv_util.hpp"
#include "faasim/error.hpp"

namespace faasim {

namespace {

constexpr const char* kSummarySchema = "faasim.summary/1";

double round4(double x) { return std::round(x * 1e4) / 1e4; }

}  // namespace

ComparisonSummary compare(std::span<const EnergySeries> series, const std::string& baseline,
                          double wall_time_s) {
  if (series.empty()) throw ValidationError("compare: no energy series");
  if (!(wall_time_s > 0.0)) throw ValidationError("compare: wall_time_s must be > 0");
  const auto base = std::find_if(series.begin(), series.end(),
                                 [&](const auto& s) { return s.profile == baseline; });
  if (base == series.end()) throw ValidationError("compare: unknown baseline '" + baseline + "'");

  ComparisonSummary out{baseline, wall_time_s, {}};
  const double base_total = base->total_j;
  for (const auto& s : series) {
    ComparisonRow row;
    row.profile = s.profile;
    row.total_j = s.total_j;
    row.total_kwh = s.total_j / kJoulesPerKwh;
    if (base_total != 0.0) {
      row.reduction_vs_baseline = 1.0 - s.total_j / base_total;
    } else if (s.total_j != 0.0) {
      throw ValidationError("compare: baseline '" + baseline + "' has zero excess energy");
    }
    row.avg_excess_power_w = s.total_j / wall_time_s;
    row.power_delta_w = (base_total - s.total_j) / wall_time_s;
    out.rows.push_back(std::move(row));
  }
  return out;
}

Extrapolation extrapolate_power(double base_power_delta_w, double base_rps, double target_rps) {
  if (!(base_rps > 0.0)) throw ValidationError("extrapolate_power: base_rps must be > 0");
  if (!(target_rps >= 0.0)) throw ValidationError("extrapolate_power: target_rps must be >= 0");
  return {{}, base_rps, target_rps, base_power_delta_w, base_power_delta_w * (target_rps / base_rps)};
}

void emit_energy_csv(std::span<const EnergySeries> series, std::ostream& out) {
  if (series.empty()) throw ValidationError("emit_energy_csv: no energy series");
  const auto steps = series.front().cumulative_j.size();
  for (const auto& s : series) {
    if (s.cumulative_j.size() != steps) {
      throw ValidationError("emit_energy_csv: series '" + s.profile + "' has " +
                            std::to_string(s.cumulative_j.size()) + " steps, expected " +
                            std::to_string(steps));
    }
  }
  out << 't';
  for (const auto& s : series) out << ',' << s.profile << "_cum_j";
  out << '\n';
  for (std::size_t t = 0; t < steps; ++t) {
    out << t;
    for (const auto& s : series) out << ',' << detail::format_double(s.cumulative_j[t]);
    out << '\n';
  }
}

std::vector<EnergySeries> parse_energy_csv(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<EnergySeries> out;
  bool header_seen = false;
  while (detail::read_line(in, line)) {
    ++lineno;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto f = detail::split(text);
    if (!header_seen) {
      if (f.size() < 2 || f[0] != "t") throw ParseError(lineno, "expected header 't,<profile>_cum_j,...'");
      for (std::size_t i = 1; i < f.size(); ++i) {
        constexpr std::string_view suffix = "_cum_j";
        if (f[i].size() <= suffix.size() || f[i].substr(f[i].size() - suffix.size()) != suffix) {
          throw ParseError(lineno, "column '" + std::string(f[i]) + "' lacks the _cum_j suffix");
        }
        out.push_back({std::string(f[i].substr(0, f[i].size() - suffix.size())), {}, 0.0, 0.0});
      }
      header_seen = true;
      continue;
    }
    if (f.size() != out.size() + 1) throw ParseError(lineno, "wrong number of fields");
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto v = detail::parse_double(f[i + 1]);
      if (!v) throw ParseError(lineno, "field " + std::to_string(i + 2) + " is not a number");
      out[i].cumulative_j.push_back(*v);
    }
  }
  if (!header_seen) throw ParseError(0, "empty energy CSV");
  for (auto& s : out) {
    s.total_j = s.cumulative_j.empty() ? 0.0 : s.cumulative_j.back();
    s.avg_excess_power_w = s.cumulative_j.empty() ? 0.0 : s.total_j / static_cast<double>(s.cumulative_j.size());
  }
  return out;
}

void emit_summary_json(const ComparisonSummary& summary, std::span<const Extrapolation> extrapolations,
                       std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["schema"] = kSummarySchema;
  doc["baseline"] = summary.baseline;
  doc["wall_time_s"] = summary.wall_time_s;
  auto& rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : summary.rows) {
    nlohmann::ordered_json row;
    row["profile"] = r.profile;
    row["total_j"] = r.total_j;
    row["total_kwh"] = r.total_j / kJoulesPerKwh;
    row["reduction_vs_baseline"] = round4(r.reduction_vs_baseline);
    row["avg_excess_power_w"] = r.avg_excess_power_w;
    row["power_delta_w"] = r.power_delta_w;
    rows.push_back(std::move(row));
  }
  auto& ex = doc["extrapolations"] = nlohmann::ordered_json::array();
  for (const auto& e : extrapolations) {
    nlohmann::ordered_json item;
    item["profile"] = e.profile;
    item["base_rps"] = e.base_rps;
    item["target_rps"] = e.target_rps;
    item["base_power_delta_w"] = e.base_power_delta_w;
    item["scaled_power_delta_w"] = e.scaled_power_delta_w;
    ex.push_back(std::move(item));
  }
  out << doc.dump(2) << '\n';
}

SummaryDocument parse_summary_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(std::string(std::istreambuf_iterator<char>(in), {}));
    if (doc.at("schema") != kSummarySchema) throw ParseError(0, "unsupported summary schema");
    SummaryDocument out;
    out.summary.baseline = doc.at("baseline").get<std::string>();
    out.summary.wall_time_s = doc.at("wall_time_s").get<double>();
    for (const auto& r : doc.at("rows")) {
      ComparisonRow row;
      row.profile = r.at("profile").get<std::string>();
      row.total_j = r.at("total_j").get<double>();
      row.total_kwh = r.at("total_kwh").get<double>();
      row.reduction_vs_baseline = r.at("reduction_vs_baseline").get<double>();
      row.avg_excess_power_w = r.at("avg_excess_power_w").get<double>();
      row.power_delta_w = r.at("power_delta_w").get<double>();
      out.summary.rows.push_back(std::move(row));
    }
    for (const auto& e : doc.at("extrapolations")) {
      out.extrapolations.push_back({e.at("profile").get<std::string>(), e.at("base_rps").get<double>(), e.at("target_rps").get<double>(),
                                    e.at("base_power_delta_w").get<double>(),
                                    e.at("scaled_power_delta_w").get<double>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("summary JSON: ") + e.what());
  }
}

}  // namespace faasim
