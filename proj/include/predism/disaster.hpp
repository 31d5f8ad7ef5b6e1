#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace predism {

enum class DisasterType {
  Earthquake = 0,
  Fire,
  Flood,
  Hurricane,
  Tornado,
  Tsunami,
  VolcanicEruption,
};

inline constexpr std::size_t kDisasterTypeCount = 7;

inline constexpr std::array<DisasterType, kDisasterTypeCount> kAllDisasterTypes = {
    DisasterType::Earthquake, DisasterType::Fire,    DisasterType::Flood,
    DisasterType::Hurricane,  DisasterType::Tornado, DisasterType::Tsunami,
    DisasterType::VolcanicEruption,
};

/// Canonical lowercase hyphenated name, e.g. "volcanic-eruption".
std::string_view to_string(DisasterType type);

/// Case, space, underscore and hyphen insensitive. Throws UnknownDisasterType.
DisasterType parse_disaster_type(std::string_view text);

inline std::size_t index_of(DisasterType type) { return static_cast<std::size_t>(type); }

/// Lowercases and strips separators so "No Damage", "no_damage" and
/// "no-damage" compare equal.
std::string normalize_token(std::string_view text);

}  // namespace predism
