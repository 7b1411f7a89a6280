#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rangevar {

/// Kind of intensity carried by a dataset or consumed by a model.
/// Calibrated only ever appears on fitted models.
enum class IntensityKind { Raw, Scaled, Calibrated };

std::string_view to_string(IntensityKind kind);
IntensityKind intensity_kind_from_string(std::string_view text);

enum class AngleUnit { Radians, Degrees, Gon };

AngleUnit angle_unit_from_string(std::string_view text);

/// One scan point in polar coordinates. Angles in radians, range in meters.
struct PolarObservation {
  std::int64_t profile_index = 0;
  double vertical_angle = 0.0;
  double horizontal_angle = 0.0;
  double range = 0.0;
  double intensity = 0.0;

  bool operator==(const PolarObservation&) const = default;
};

struct ScanMeta {
  std::string scanner_id;
  std::optional<double> scanning_rate_khz;
  std::optional<double> nominal_distance;
  IntensityKind intensity_kind = IntensityKind::Raw;
  std::optional<std::string> point_spacing_note;
  // Rows dropped by a lenient parse.
  std::size_t skipped_rows = 0;

  bool operator==(const ScanMeta&) const = default;
};

struct ScanDataset {
  std::vector<PolarObservation> observations;
  ScanMeta meta;

  bool operator==(const ScanDataset&) const = default;
};

struct ParseOptions {
  AngleUnit angle_unit = AngleUnit::Radians;
  // Skip (and count) invalid rows instead of aborting.
  bool lenient = false;
  // Used when the file carries no #intensity_kind directive.
  IntensityKind default_intensity_kind = IntensityKind::Raw;
};

/// Parses the profile CSV format:
///
///   #scanner=Z+F Imager 5016A          (optional directives)
///   #rate_khz=1093.37
///   #intensity_kind=raw|scaled
///   #nominal_distance_m=10
///   profile,vertical_angle,horizontal_angle,range,intensity
///   0,0.1,0,10.0012,35120
///
/// Observations keep file order. Row numbers in errors are 1-based line
/// numbers of the source.
ScanDataset parse_profile_csv(std::istream& source, const ParseOptions& options = {});
ScanDataset parse_profile_csv(std::string_view text, const ParseOptions& options = {});
ScanDataset read_profile_csv(const std::string& path, const ParseOptions& options = {});

/// Writes the same format parse_profile_csv reads; numbers use the shortest
/// representation that round-trips exactly. Angles are written in radians.
void serialize_dataset(const ScanDataset& ds, std::ostream& out);
std::string serialize_dataset(const ScanDataset& ds);

struct InvariantViolation {
  std::size_t index;
  std::string reason;
};

struct ValidationReport {
  std::size_t observation_count = 0;
  std::size_t profile_count = 0;
  double vertical_angle_min = 0.0;
  double vertical_angle_max = 0.0;
  double intensity_min = 0.0;
  double intensity_max = 0.0;
  std::vector<InvariantViolation> violations;

  bool ok() const { return violations.empty(); }
};

/// Report-only check of the observation invariants; never throws for bad data.
ValidationReport validate_dataset(const ScanDataset& ds);

}  // namespace rangevar
