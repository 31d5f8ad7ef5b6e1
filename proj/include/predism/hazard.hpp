#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include <json.hpp>

namespace predism {

/// Impact attributes that determine the intensity of a hazard.
enum class HazardAttribute {
  Fatality = 0,         // count
  Injury,               // count
  LandImpaired,         // km^2
  DirectDamage,         // billion USD
  IndirectDamage,       // billion USD
  WaterDisruption,      // days
  EnergyDisruption,     // days
};

inline constexpr std::size_t kHazardAttributeCount = 7;

inline constexpr std::array<HazardAttribute, kHazardAttributeCount> kAllHazardAttributes = {
    HazardAttribute::Fatality,       HazardAttribute::Injury,          HazardAttribute::LandImpaired,
    HazardAttribute::DirectDamage,   HazardAttribute::IndirectDamage,  HazardAttribute::WaterDisruption,
    HazardAttribute::EnergyDisruption,
};

/// snake_case key, e.g. "land_impaired".
std::string_view to_string(HazardAttribute attribute);
/// Case and separator insensitive. Throws UnknownAttribute.
HazardAttribute parse_hazard_attribute(std::string_view text);

inline std::size_t index_of(HazardAttribute a) { return static_cast<std::size_t>(a); }

/// Intensity of a hypothetical hazard, 1 (mildest) to 5 (worst case).
class HazardLevel {
 public:
  /// Throws InvalidArgument outside [1, 5].
  explicit HazardLevel(int value);
  int value() const noexcept { return value_; }
  auto operator<=>(const HazardLevel&) const = default;

 private:
  int value_;
};

struct HazardAttributes {
  std::array<std::optional<double>, kHazardAttributeCount> values{};

  std::optional<double>& operator[](HazardAttribute a) { return values[index_of(a)]; }
  const std::optional<double>& operator[](HazardAttribute a) const { return values[index_of(a)]; }
  bool any() const;
};

/// Per attribute, thresholds for levels 5, 4, 3, 2, 1 (strictly decreasing).
/// A value scores level L when it is strictly greater than the level-L threshold.
class ThresholdTable {
 public:
  using Row = std::array<double, 5>;

  /// The published impact-threshold table.
  static ThresholdTable defaults();

  const Row& row(HazardAttribute a) const { return rows_[index_of(a)]; }
  /// Throws NonMonotoneRow unless the row strictly decreases.
  void set_row(HazardAttribute a, const Row& row);

  /// Threshold for `level` (1..5).
  double threshold(HazardAttribute a, int level) const { return rows_[index_of(a)][static_cast<std::size_t>(5 - level)]; }

 private:
  std::array<Row, kHazardAttributeCount> rows_{};
};

/// Highest level whose threshold the value strictly exceeds; 1 when none.
/// Throws NegativeValue for value < 0 (or NaN).
HazardLevel score_attribute(HazardAttribute attribute, double value, const ThresholdTable& table);
HazardLevel score_attribute(std::string_view attribute, double value, const ThresholdTable& table);

/// Per-attribute levels of the present attributes; absent stay empty.
std::array<std::optional<int>, kHazardAttributeCount> attribute_levels(const HazardAttributes& attrs,
                                                                       const ThresholdTable& table);

/// Mean of the per-attribute levels of present attributes, rounded half-up
/// and clamped to [1, 5]. Throws NoAttributes.
HazardLevel overall_level(const HazardAttributes& attrs, const ThresholdTable& table);

/// Mean-and-round rule applied directly to levels. Throws NoAttributes when empty.
HazardLevel mean_level(std::span<const int> levels);

/// Defaults overlaid with whole-row overrides from a JSON object mapping
/// attribute name to five descending thresholds. Throws IncompleteRow,
/// NonMonotoneRow or UnknownAttribute.
ThresholdTable load_thresholds(const std::optional<nlohmann::json>& overrides);

HazardAttributes parse_hazard_attributes(const nlohmann::json& doc);
nlohmann::json to_json(const HazardAttributes& attrs);
nlohmann::json to_json(const ThresholdTable& table);

}  // namespace predism
