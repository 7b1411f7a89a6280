#include "rangevar/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "rangevar/errors.hpp"
#include "text_util.hpp"

namespace rangevar::io {

using detail::format_double;
using nlohmann::json;

namespace {

void write_tick_row(std::ostream& out, const TickStats& s) {
  out << s.tick_id << ',' << format_double(s.vertical_angle_center) << ','
      << format_double(s.mean_intensity) << ',' << format_double(s.mean_range) << ','
      << format_double(s.std_range) << ',' << s.count;
}

constexpr std::string_view kTickHeader =
    "tick_id,vertical_angle_center,mean_intensity,mean_range_m,std_range_mm,count";

// Serializes non-finite values as null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void write_tick_stats_csv(std::ostream& out, std::span<const TickStats> ticks) {
  out << kTickHeader << '\n';
  for (const auto& s : ticks) {
    write_tick_row(out, s);
    out << '\n';
  }
}

void write_calibrated_ticks_csv(std::ostream& out, std::span<const CalibratedTickStats> ticks) {
  out << kTickHeader << ",calibrated_intensity\n";
  for (const auto& s : ticks) {
    write_tick_row(out, s.stats);
    out << ',' << format_double(s.calibrated_intensity) << '\n';
  }
}

std::vector<CalibratedTickStats> TickTable::as_calibrated() const {
  if (!calibrated()) throw Error(ErrorCode::KindMismatch, "tick table has no calibrated_intensity column");
  std::vector<CalibratedTickStats> out;
  out.reserve(ticks.size());
  for (std::size_t i = 0; i < ticks.size(); ++i) out.push_back({ticks[i], calibrated_intensity[i]});
  return out;
}

TickTable read_tick_csv(std::istream& in) {
  TickTable table;
  std::string raw;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    return std::nullopt;
  };
  std::size_t c_id = 0, c_angle = 0, c_int = 0, c_range = 0, c_std = 0, c_count = 0;
  std::optional<std::size_t> c_cal;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (detail::trim(line).empty()) continue;
    if (line.front() == '#') {
      const auto body = line.substr(1);
      const auto eq = body.find('=');
      if (eq != std::string_view::npos && detail::trim(body.substr(0, eq)) == "intensity_kind") {
        table.intensity_kind = intensity_kind_from_string(body.substr(eq + 1));
      }
      continue;
    }
    const auto fields = detail::split(line, ',');
    if (header.empty()) {
      for (const auto f : fields) header.push_back(detail::to_lower(f));
      auto need = [&](std::string_view name) {
        const auto idx = column(name);
        if (!idx) throw Error(ErrorCode::MissingColumn, "tick table lacks column '" + std::string(name) + "'");
        return *idx;
      };
      c_id = need("tick_id");
      c_angle = need("vertical_angle_center");
      c_int = need("mean_intensity");
      c_range = need("mean_range_m");
      c_std = need("std_range_mm");
      c_count = need("count");
      c_cal = column("calibrated_intensity");
      continue;
    }
    const auto where = "row " + std::to_string(line_no);
    if (fields.size() != header.size()) throw Error(ErrorCode::MalformedRow, where + ": wrong field count");
    auto real = [&](std::size_t c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) throw Error(ErrorCode::MalformedRow, where + ": cannot parse '" + std::string(fields[c]) + "'");
      if (!std::isfinite(*v)) throw Error(ErrorCode::NonFiniteValue, where + ": value not finite");
      return *v;
    };
    auto integer = [&](std::size_t c) {
      const auto v = detail::parse_int(fields[c]);
      if (!v) throw Error(ErrorCode::MalformedRow, where + ": cannot parse '" + std::string(fields[c]) + "'");
      return *v;
    };
    TickStats s;
    s.tick_id = integer(c_id);
    s.vertical_angle_center = real(c_angle);
    s.mean_intensity = real(c_int);
    s.mean_range = real(c_range);
    s.std_range = real(c_std);
    const auto count = integer(c_count);
    if (count < 0) throw Error(ErrorCode::MalformedRow, where + ": negative count");
    s.count = static_cast<std::size_t>(count);
    table.ticks.push_back(s);
    if (c_cal) table.calibrated_intensity.push_back(real(*c_cal));
  }
  if (header.empty()) throw Error(ErrorCode::MissingColumn, "tick table has no header");
  if (table.ticks.empty()) throw Error(ErrorCode::EmptyStats, "tick table has no rows");
  return table;
}

TickTable read_tick_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return read_tick_csv(in);
}

void write_evaluation_csv(std::ostream& out, const EvaluationReport& report) {
  out << "tick_id,intensity,observed_std_mm,predicted_std_mm,residual_mm,extrapolated\n";
  for (const auto& r : report.residuals) {
    out << r.tick_id << ',' << format_double(r.intensity) << ',' << format_double(r.observed_std) << ','
        << format_double(r.predicted_std) << ',' << format_double(r.residual) << ','
        << (r.extrapolated ? 1 : 0) << '\n';
  }
  out << "#rmse_mm=" << format_double(report.rmse) << '\n';
  out << "#max_abs_residual_mm=" << format_double(report.max_abs_residual) << '\n';
  out << "#extrapolated_count=" << report.extrapolated_count << '\n';
}

void write_vcm_csv(std::ostream& out, const VcmBlocks& vcm) {
  out << "index,var_range_mm2,var_vert_rad2,var_horiz_rad2\n";
  for (std::size_t i = 0; i < vcm.blocks.size(); ++i) {
    const auto& b = vcm.blocks[i];
    out << i << ',' << format_double(b(0, 0)) << ',' << format_double(b(1, 1)) << ','
        << format_double(b(2, 2)) << '\n';
  }
}

void write_ground_truth_csv(std::ostream& out, const GroundTruth& truth) {
  out << "tick_id,true_intensity,true_sigma_mm\n";
  for (const auto& t : truth.ticks) {
    out << t.tick_id << ',' << format_double(t.true_intensity) << ',' << format_double(t.true_sigma_mm) << '\n';
  }
}

void write_curve_csv(std::ostream& out, const RangeVarianceModel& model, std::size_t points) {
  out << "intensity,sigma_mm\n";
  for (const double i : log_spaced_grid(model.intensity_min, model.intensity_max, points)) {
    out << format_double(i) << ',' << format_double(evaluate_model(model, i)) << '\n';
  }
}

std::string fit_report_json(const FitReport& report) {
  const auto& m = report.model;
  json j;
  j["model"] = {
      {"a", m.a},
      {"a_unit", a_unit(m.intensity_kind)},
      {"b", m.b},
      {"c", m.c},
      {"c_unit", "mm"},
      {"intensity_kind", std::string(to_string(m.intensity_kind))},
      {"intensity_domain", {m.intensity_min, m.intensity_max}},
  };
  j["diagnostics"] = {
      {"converged", report.converged},
      {"iterations", report.iterations},
      {"reweights", report.reweights},
      {"point_count", report.point_count},
      {"initial_cost_mm2", number(report.initial_cost)},
      {"final_cost_mm2", number(report.final_cost)},
      {"variance_factor_mm2", number(report.variance_factor)},
  };
  j["parameter_stddevs"] = {
      {"a", number(report.parameter_stddevs(0))},
      {"b", number(report.parameter_stddevs(1))},
      {"c", number(report.parameter_stddevs(2))},
  };
  return j.dump(2) + "\n";
}

RangeVarianceModel parse_model_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("model JSON: ") + e.what());
  }
  const json& m = j.contains("model") ? j.at("model") : j;
  try {
    RangeVarianceModel model;
    model.a = m.at("a").get<double>();
    model.b = m.at("b").get<double>();
    model.c = m.at("c").get<double>();
    model.intensity_kind = intensity_kind_from_string(m.at("intensity_kind").get<std::string>());
    const auto& domain = m.at("intensity_domain");
    model.intensity_min = domain.at(0).get<double>();
    model.intensity_max = domain.at(1).get<double>();
    if (!std::isfinite(model.a) || !std::isfinite(model.b) || !std::isfinite(model.c)) {
      throw Error(ErrorCode::InvalidConfig, "model parameters must be finite");
    }
    if (!(model.intensity_min > 0.0) || !(model.intensity_max >= model.intensity_min)) {
      throw Error(ErrorCode::InvalidConfig, "model intensity domain must satisfy 0 < min <= max");
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("model JSON: ") + e.what());
  }
}

RangeVarianceModel read_model_json_file(const std::filesystem::path& path) {
  return parse_model_json(read_file(path));
}

std::string validation_report_json(const ValidationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations) violations.push_back({{"index", v.index}, {"reason", v.reason}});
  json j = {
      {"ok", report.ok()},
      {"observation_count", report.observation_count},
      {"profile_count", report.profile_count},
      {"vertical_angle_span", {report.vertical_angle_min, report.vertical_angle_max}},
      {"intensity_span", {report.intensity_min, report.intensity_max}},
      {"violations", violations},
  };
  return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot rename into '" + path.string() + "': " + ec.message());
}

}  // namespace rangevar::io
