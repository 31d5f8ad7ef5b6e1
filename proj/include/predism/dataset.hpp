#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "predism/disaster.hpp"
#include "predism/geometry.hpp"
#include "predism/hazard.hpp"

namespace predism {

enum class DamageClass {
  Unclassified,
  NoDamage,
  MinorDamage,
  MajorDamage,
  Destroyed,
};

std::string_view to_string(DamageClass c);
/// Case and separator insensitive ("No Damage" == "no-damage"). Throws UnknownDamageClass.
DamageClass parse_damage_class(std::string_view text);

/// no-damage 1, minor 2, major 3, destroyed 5. Level 4 has no source class.
/// Throws UnclassifiedNotMappable.
int class_to_level(DamageClass c);

struct LabeledBuilding {
  Footprint footprint;
  DamageClass damage = DamageClass::Unclassified;
  std::string event_id;
  DisasterType disaster_type = DisasterType::Flood;
  std::string scene_id;

  const std::string& building_id() const { return footprint.building_id; }
};

/// Contents of one label file: scene metadata plus its buildings.
struct LabelDocument {
  std::string event_id;
  DisasterType disaster_type = DisasterType::Flood;
  std::string scene_id;
  /// Analyst-supplied hazard context of the event, when recorded.
  std::optional<HazardAttributes> hazard_attributes;
  std::optional<int> hazard_level;
  std::vector<LabeledBuilding> buildings;
};

/// Accepts `features` either as an array or as an object holding an `xy`
/// array (the layout used by public building-damage releases). A feature
/// without a subtype is unclassified. Throws MalformedLabelFile,
/// UnknownDamageClass, UnknownDisasterType or MalformedWkt.
LabelDocument parse_label_document(std::string_view text);
std::vector<LabeledBuilding> parse_label_file(std::string_view text);

/// Canonical form; parse_label_document(serialize_label_document(d)) == d.
std::string serialize_label_document(const LabelDocument& doc);

/// Inputs whose damage is not unclassified, order preserved.
std::vector<LabeledBuilding> filter_training(const std::vector<LabeledBuilding>& buildings);

struct SceneRecord {
  std::string scene_id;
  std::filesystem::path image_path;
  std::filesystem::path label_path;
  std::optional<HazardAttributes> hazard_attributes;
  std::optional<int> hazard_level;
  std::vector<LabeledBuilding> buildings;
};

struct Event {
  std::string event_id;
  DisasterType disaster_type = DisasterType::Flood;
  std::vector<SceneRecord> scenes;

  std::size_t building_count() const;
};

/// disaster type -> event id -> event, all in lexicographic order.
struct EventCatalog {
  std::map<DisasterType, std::map<std::string, Event>> groups;

  std::size_t building_count() const;
  std::size_t event_count() const;
  std::vector<LabeledBuilding> all_buildings() const;
  const SceneRecord* find_scene(const std::string& event_id, const std::string& scene_id) const;
};

/// Reads `<root>/events/<event_id>/labels/*.json` (or `<root>/<event_id>/...`
/// when root is itself the events directory). Throws EmptyCatalog or
/// MixedDisasterTypesInEvent.
EventCatalog build_catalog(const std::filesystem::path& root);

struct DatasetSplit {
  std::vector<LabeledBuilding> train;
  std::vector<LabeledBuilding> validation;
};

/// Building-level split stratified by disaster type over the non-unclassified
/// buildings. Each stratum sends round(ratio * n) buildings to train, kept in
/// [1, n - 1]. Deterministic in `seed`. Throws InsufficientData when a stratum
/// has fewer than 2 buildings.
DatasetSplit split(const EventCatalog& catalog, double ratio, std::uint64_t seed);

}  // namespace predism
