#include "predism/hazard.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "predism/disaster.hpp"
#include "predism/error.hpp"

namespace predism {

std::string_view to_string(HazardAttribute a) {
  switch (a) {
    case HazardAttribute::Fatality: return "fatality";
    case HazardAttribute::Injury: return "injury";
    case HazardAttribute::LandImpaired: return "land_impaired";
    case HazardAttribute::DirectDamage: return "direct_damage";
    case HazardAttribute::IndirectDamage: return "indirect_damage";
    case HazardAttribute::WaterDisruption: return "water_disruption";
    case HazardAttribute::EnergyDisruption: return "energy_disruption";
  }
  return "unknown";
}

HazardAttribute parse_hazard_attribute(std::string_view text) {
  const std::string key = normalize_token(text);
  for (HazardAttribute a : kAllHazardAttributes) {
    if (normalize_token(to_string(a)) == key) return a;
  }
  throw Error(ErrorCode::UnknownAttribute, "'" + std::string(text) + "'");
}

HazardLevel::HazardLevel(int value) : value_(value) {
  if (value < 1 || value > 5) {
    throw Error(ErrorCode::InvalidArgument, "hazard level must be in [1, 5], got " + std::to_string(value));
  }
}

bool HazardAttributes::any() const {
  return std::any_of(values.begin(), values.end(), [](const auto& v) { return v.has_value(); });
}

ThresholdTable ThresholdTable::defaults() {
  ThresholdTable t;
  t.rows_[index_of(HazardAttribute::Fatality)] = {10000, 1000, 100, 10, 1};
  t.rows_[index_of(HazardAttribute::Injury)] = {100000, 10000, 1000, 100, 10};
  t.rows_[index_of(HazardAttribute::LandImpaired)] = {500, 100, 50, 10, 1};
  t.rows_[index_of(HazardAttribute::DirectDamage)] = {100, 10, 1, 0.1, 0.01};
  t.rows_[index_of(HazardAttribute::IndirectDamage)] = {100, 10, 1, 0.1, 0.01};
  t.rows_[index_of(HazardAttribute::WaterDisruption)] = {30, 14, 7, 3, 1};
  t.rows_[index_of(HazardAttribute::EnergyDisruption)] = {30, 14, 7, 3, 1};
  return t;
}

void ThresholdTable::set_row(HazardAttribute a, const Row& row) {
  for (std::size_t k = 1; k < row.size(); ++k) {
    if (!(row[k - 1] > row[k])) {
      throw Error(ErrorCode::NonMonotoneRow, std::string(to_string(a)) + " thresholds must strictly decrease");
    }
  }
  rows_[index_of(a)] = row;
}

HazardLevel score_attribute(HazardAttribute attribute, double value, const ThresholdTable& table) {
  if (!(value >= 0.0)) {
    throw Error(ErrorCode::NegativeValue, std::string(to_string(attribute)) + " must be non-negative");
  }
  for (int level = 5; level >= 2; --level) {
    if (value > table.threshold(attribute, level)) return HazardLevel(level);
  }
  return HazardLevel(1);
}

HazardLevel score_attribute(std::string_view attribute, double value, const ThresholdTable& table) {
  return score_attribute(parse_hazard_attribute(attribute), value, table);
}

std::array<std::optional<int>, kHazardAttributeCount> attribute_levels(const HazardAttributes& attrs,
                                                                       const ThresholdTable& table) {
  std::array<std::optional<int>, kHazardAttributeCount> out{};
  for (HazardAttribute a : kAllHazardAttributes) {
    if (attrs[a]) out[index_of(a)] = score_attribute(a, *attrs[a], table).value();
  }
  return out;
}

HazardLevel mean_level(std::span<const int> levels) {
  if (levels.empty()) throw Error(ErrorCode::NoAttributes, "at least one hazard attribute is required");
  long sum = 0;
  for (int l : levels) sum += l;
  const long n = static_cast<long>(levels.size());
  // floor(sum / n + 1/2) in integers
  const long rounded = (2 * sum + n) / (2 * n);
  return HazardLevel(static_cast<int>(std::clamp(rounded, 1L, 5L)));
}

HazardLevel overall_level(const HazardAttributes& attrs, const ThresholdTable& table) {
  std::vector<int> levels;
  for (const auto& level : attribute_levels(attrs, table)) {
    if (level) levels.push_back(*level);
  }
  return mean_level(levels);
}

ThresholdTable load_thresholds(const std::optional<nlohmann::json>& overrides) {
  ThresholdTable table = ThresholdTable::defaults();
  if (!overrides || overrides->is_null()) return table;
  if (!overrides->is_object()) throw Error(ErrorCode::IncompleteRow, "threshold overrides must be a JSON object");
  for (const auto& [name, value] : overrides->items()) {
    const HazardAttribute a = parse_hazard_attribute(name);
    if (!value.is_array() || value.size() != 5) {
      throw Error(ErrorCode::IncompleteRow, name + " needs exactly 5 thresholds (levels 5 to 1)");
    }
    ThresholdTable::Row row{};
    for (std::size_t k = 0; k < 5; ++k) {
      if (!value[k].is_number()) throw Error(ErrorCode::IncompleteRow, name + " thresholds must be numbers");
      row[k] = value[k].get<double>();
    }
    table.set_row(a, row);
  }
  return table;
}

HazardAttributes parse_hazard_attributes(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::MalformedRequest, "hazard attributes must be a JSON object");
  HazardAttributes attrs;
  for (const auto& [name, value] : doc.items()) {
    const HazardAttribute a = parse_hazard_attribute(name);
    if (value.is_null()) continue;
    if (!value.is_number()) throw Error(ErrorCode::MalformedRequest, name + " must be a number");
    const double v = value.get<double>();
    if (v < 0.0) throw Error(ErrorCode::NegativeValue, name + " must be non-negative");
    attrs[a] = v;
  }
  return attrs;
}

nlohmann::json to_json(const HazardAttributes& attrs) {
  nlohmann::json doc = nlohmann::json::object();
  for (HazardAttribute a : kAllHazardAttributes) {
    if (attrs[a]) doc[std::string(to_string(a))] = *attrs[a];
  }
  return doc;
}

nlohmann::json to_json(const ThresholdTable& table) {
  nlohmann::json doc = nlohmann::json::object();
  for (HazardAttribute a : kAllHazardAttributes) doc[std::string(to_string(a))] = table.row(a);
  return doc;
}

}  // namespace predism
