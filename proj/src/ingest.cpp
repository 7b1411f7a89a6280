#include "rangevar/ingest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "rangevar/errors.hpp"
#include "text_util.hpp"

namespace rangevar {

std::string_view to_string(IntensityKind kind) {
  switch (kind) {
    case IntensityKind::Raw: return "raw";
    case IntensityKind::Scaled: return "scaled";
    case IntensityKind::Calibrated: return "calibrated";
  }
  return "raw";
}

IntensityKind intensity_kind_from_string(std::string_view text) {
  const auto lower = detail::to_lower(detail::trim(text));
  if (lower == "raw" || lower == "inc") return IntensityKind::Raw;
  if (lower == "scaled") return IntensityKind::Scaled;
  if (lower == "calibrated") return IntensityKind::Calibrated;
  throw Error(ErrorCode::InvalidConfig, "unknown intensity kind '" + std::string(text) + "'");
}

AngleUnit angle_unit_from_string(std::string_view text) {
  const auto lower = detail::to_lower(detail::trim(text));
  if (lower == "rad" || lower == "radians") return AngleUnit::Radians;
  if (lower == "deg" || lower == "degrees") return AngleUnit::Degrees;
  if (lower == "gon" || lower == "grad") return AngleUnit::Gon;
  throw Error(ErrorCode::InvalidConfig, "unknown angle unit '" + std::string(text) + "'");
}

namespace {

constexpr std::array<std::string_view, 5> kColumns = {
    "profile", "vertical_angle", "horizontal_angle", "range", "intensity"};

double angle_factor(AngleUnit unit) {
  switch (unit) {
    case AngleUnit::Radians: return 1.0;
    case AngleUnit::Degrees: return std::numbers::pi / 180.0;
    case AngleUnit::Gon: return std::numbers::pi / 200.0;
  }
  return 1.0;
}

std::string row_context(std::size_t line) { return "row " + std::to_string(line); }

void apply_directive(std::string_view body, ScanMeta& meta, bool& kind_seen, std::size_t line) {
  const auto eq = body.find('=');
  if (eq == std::string_view::npos) return;  // plain comment
  const auto key = detail::to_lower(detail::trim(body.substr(0, eq)));
  const auto value = detail::trim(body.substr(eq + 1));
  auto number = [&](std::string_view what) {
    const auto v = detail::parse_double(value);
    if (!v || !std::isfinite(*v)) {
      throw Error(ErrorCode::MalformedRow,
                  row_context(line) + ": directive " + std::string(what) + " is not a finite number");
    }
    return *v;
  };
  if (key == "scanner") {
    meta.scanner_id = std::string(value);
  } else if (key == "rate_khz") {
    const double rate = number("rate_khz");
    if (rate <= 0.0) throw Error(ErrorCode::MalformedRow, row_context(line) + ": rate_khz must be > 0");
    meta.scanning_rate_khz = rate;
  } else if (key == "intensity_kind") {
    const auto kind = detail::to_lower(value);
    if (kind == "raw") {
      meta.intensity_kind = IntensityKind::Raw;
    } else if (kind == "scaled") {
      meta.intensity_kind = IntensityKind::Scaled;
    } else {
      throw Error(ErrorCode::MalformedRow,
                  row_context(line) + ": intensity_kind must be raw or scaled");
    }
    kind_seen = true;
  } else if (key == "nominal_distance_m") {
    meta.nominal_distance = number("nominal_distance_m");
  } else if (key == "point_spacing") {
    meta.point_spacing_note = std::string(value);
  }
  // Unknown directives are ignored so vendor bridges can annotate files freely.
}

}  // namespace

ScanDataset parse_profile_csv(std::istream& source, const ParseOptions& options) {
  ScanDataset ds;
  ds.meta.intensity_kind = options.default_intensity_kind;
  bool kind_seen = false;
  std::array<std::size_t, kColumns.size()> column_index{};
  std::size_t column_count = 0;
  bool header_seen = false;
  const double to_radians = angle_factor(options.angle_unit);

  std::string raw_line;
  std::size_t line_no = 0;
  while (std::getline(source, raw_line)) {
    ++line_no;
    std::string_view line = raw_line;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (detail::trim(line).empty()) continue;
    if (line.front() == '#') {
      if (!header_seen) apply_directive(line.substr(1), ds.meta, kind_seen, line_no);
      continue;
    }

    if (!header_seen) {
      const auto names = detail::split(line, ',');
      column_count = names.size();
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find_if(names.begin(), names.end(), [&](std::string_view n) {
          return detail::to_lower(n) == kColumns[c];
        });
        if (it == names.end()) {
          throw Error(ErrorCode::MissingColumn, "header lacks column '" + std::string(kColumns[c]) + "'");
        }
        column_index[c] = static_cast<std::size_t>(it - names.begin());
      }
      header_seen = true;
      continue;
    }

    try {
      const auto fields = detail::split(line, ',');
      if (fields.size() != column_count) {
        throw Error(ErrorCode::MalformedRow, row_context(line_no) + ": expected " +
                                                 std::to_string(column_count) + " fields, got " +
                                                 std::to_string(fields.size()));
      }
      PolarObservation obs;
      const auto profile = detail::parse_int(fields[column_index[0]]);
      if (!profile || *profile < 0) {
        throw Error(ErrorCode::MalformedRow,
                    row_context(line_no) + ": profile must be a non-negative integer");
      }
      obs.profile_index = *profile;
      std::array<double, 4> values{};
      for (std::size_t c = 1; c < kColumns.size(); ++c) {
        const auto v = detail::parse_double(fields[column_index[c]]);
        if (!v) {
          throw Error(ErrorCode::MalformedRow, row_context(line_no) + ": cannot parse " +
                                                   std::string(kColumns[c]) + " '" +
                                                   std::string(fields[column_index[c]]) + "'");
        }
        if (!std::isfinite(*v)) {
          throw Error(ErrorCode::NonFiniteValue,
                      row_context(line_no) + ": " + std::string(kColumns[c]) + " is not finite");
        }
        values[c - 1] = *v;
      }
      obs.vertical_angle = values[0] * to_radians;
      obs.horizontal_angle = values[1] * to_radians;
      obs.range = values[2];
      obs.intensity = values[3];
      if (obs.range <= 0.0) {
        throw Error(ErrorCode::InvalidRange, row_context(line_no) + ": range must be > 0");
      }
      if (obs.intensity < 0.0) {
        throw Error(ErrorCode::NegativeIntensity, row_context(line_no) + ": intensity must be >= 0");
      }
      ds.observations.push_back(obs);
    } catch (const Error&) {
      if (!options.lenient) throw;
      ++ds.meta.skipped_rows;
    }
  }

  if (!header_seen) throw Error(ErrorCode::MissingColumn, "no header line found");
  if (ds.observations.empty()) throw Error(ErrorCode::EmptyDataset, "no data rows");
  return ds;
}

ScanDataset parse_profile_csv(std::string_view text, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_profile_csv(in, options);
}

ScanDataset read_profile_csv(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  return parse_profile_csv(in, options);
}

void serialize_dataset(const ScanDataset& ds, std::ostream& out) {
  const auto& meta = ds.meta;
  if (!meta.scanner_id.empty()) out << "#scanner=" << meta.scanner_id << '\n';
  if (meta.scanning_rate_khz) out << "#rate_khz=" << detail::format_double(*meta.scanning_rate_khz) << '\n';
  out << "#intensity_kind=" << (meta.intensity_kind == IntensityKind::Scaled ? "scaled" : "raw") << '\n';
  if (meta.nominal_distance) {
    out << "#nominal_distance_m=" << detail::format_double(*meta.nominal_distance) << '\n';
  }
  if (meta.point_spacing_note) out << "#point_spacing=" << *meta.point_spacing_note << '\n';
  out << "profile,vertical_angle,horizontal_angle,range,intensity\n";
  for (const auto& o : ds.observations) {
    out << o.profile_index << ',' << detail::format_double(o.vertical_angle) << ','
        << detail::format_double(o.horizontal_angle) << ',' << detail::format_double(o.range) << ','
        << detail::format_double(o.intensity) << '\n';
  }
}

std::string serialize_dataset(const ScanDataset& ds) {
  std::ostringstream out;
  serialize_dataset(ds, out);
  return out.str();
}

ValidationReport validate_dataset(const ScanDataset& ds) {
  ValidationReport report;
  report.observation_count = ds.observations.size();
  std::set<std::int64_t> profiles;
  double v_min = std::numeric_limits<double>::infinity();
  double v_max = -v_min;
  double i_min = v_min;
  double i_max = -v_min;
  for (std::size_t i = 0; i < ds.observations.size(); ++i) {
    const auto& o = ds.observations[i];
    profiles.insert(o.profile_index);
    if (o.profile_index < 0) report.violations.push_back({i, "negative profile index"});
    if (!std::isfinite(o.range) || o.range <= 0.0) {
      report.violations.push_back({i, "range not finite and positive"});
    }
    if (!std::isfinite(o.intensity) || o.intensity < 0.0) {
      report.violations.push_back({i, "intensity not finite and non-negative"});
    } else {
      i_min = std::min(i_min, o.intensity);
      i_max = std::max(i_max, o.intensity);
    }
    if (!std::isfinite(o.vertical_angle) || !std::isfinite(o.horizontal_angle)) {
      report.violations.push_back({i, "angle not finite"});
    }
    if (std::isfinite(o.vertical_angle)) {
      v_min = std::min(v_min, o.vertical_angle);
      v_max = std::max(v_max, o.vertical_angle);
    }
  }
  report.profile_count = profiles.size();
  if (v_min <= v_max) {
    report.vertical_angle_min = v_min;
    report.vertical_angle_max = v_max;
  }
  if (i_min <= i_max) {
    report.intensity_min = i_min;
    report.intensity_max = i_max;
  }
  return report;
}

}  // namespace rangevar
