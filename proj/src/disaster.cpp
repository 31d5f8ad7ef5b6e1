#include "predism/disaster.hpp"

#include <cctype>

#include "predism/error.hpp"

namespace predism {

std::string_view to_string(DisasterType type) {
  switch (type) {
    case DisasterType::Earthquake: return "earthquake";
    case DisasterType::Fire: return "fire";
    case DisasterType::Flood: return "flood";
    case DisasterType::Hurricane: return "hurricane";
    case DisasterType::Tornado: return "tornado";
    case DisasterType::Tsunami: return "tsunami";
    case DisasterType::VolcanicEruption: return "volcanic-eruption";
  }
  return "unknown";
}

std::string normalize_token(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (c == '-' || c == '_' || c == ' ' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

DisasterType parse_disaster_type(std::string_view text) {
  const std::string key = normalize_token(text);
  for (DisasterType t : kAllDisasterTypes) {
    if (normalize_token(to_string(t)) == key) return t;
  }
  throw Error(ErrorCode::UnknownDisasterType, "'" + std::string(text) + "'");
}

}  // namespace predism
