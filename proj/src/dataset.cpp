#include "predism/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "predism/error.hpp"

namespace predism {

using nlohmann::json;

std::string_view to_string(DamageClass c) {
  switch (c) {
    case DamageClass::Unclassified: return "un-classified";
    case DamageClass::NoDamage: return "no-damage";
    case DamageClass::MinorDamage: return "minor-damage";
    case DamageClass::MajorDamage: return "major-damage";
    case DamageClass::Destroyed: return "destroyed";
  }
  return "unknown";
}

DamageClass parse_damage_class(std::string_view text) {
  const std::string key = normalize_token(text);
  if (key == "unclassified") return DamageClass::Unclassified;
  if (key == "nodamage") return DamageClass::NoDamage;
  if (key == "minordamage") return DamageClass::MinorDamage;
  if (key == "majordamage") return DamageClass::MajorDamage;
  if (key == "destroyed") return DamageClass::Destroyed;
  throw Error(ErrorCode::UnknownDamageClass, "'" + std::string(text) + "'");
}

int class_to_level(DamageClass c) {
  switch (c) {
    case DamageClass::NoDamage: return 1;
    case DamageClass::MinorDamage: return 2;
    case DamageClass::MajorDamage: return 3;
    case DamageClass::Destroyed: return 5;
    case DamageClass::Unclassified: break;
  }
  throw Error(ErrorCode::UnclassifiedNotMappable, "unclassified buildings have no damage level");
}

namespace {

const json& require(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorCode::MalformedLabelFile, std::string("missing '") + key + "'");
  }
  return obj.at(key);
}

std::string require_string(const json& obj, const char* key) {
  const json& v = require(obj, key);
  if (!v.is_string()) throw Error(ErrorCode::MalformedLabelFile, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

LabelDocument parse_label_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedLabelFile, e.what());
  }
  const json& meta = require(doc, "metadata");
  LabelDocument out;
  out.event_id = require_string(meta, "event");
  out.disaster_type = parse_disaster_type(require_string(meta, "disaster_type"));
  out.scene_id = require_string(meta, "scene_id");
  try {
    if (meta.contains("hazard_attributes") && !meta["hazard_attributes"].is_null()) {
      out.hazard_attributes = parse_hazard_attributes(meta["hazard_attributes"]);
    }
    if (meta.contains("hazard_level") && !meta["hazard_level"].is_null()) {
      out.hazard_level = HazardLevel(meta["hazard_level"].get<int>()).value();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedLabelFile, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownAttribute) throw;
    throw Error(ErrorCode::MalformedLabelFile, e.what());
  }

  const json* features = &require(doc, "features");
  if (features->is_object()) features = &require(*features, "xy");
  if (!features->is_array()) throw Error(ErrorCode::MalformedLabelFile, "'features' must be an array");

  for (const json& feature : *features) {
    LabeledBuilding b;
    const json& props = feature.contains("properties") ? feature["properties"] : json::object();
    std::string uid;
    if (props.contains("uid") && props["uid"].is_string()) uid = props["uid"].get<std::string>();
    if (uid.empty()) uid = out.scene_id + "#" + std::to_string(out.buildings.size());
    b.footprint = parse_wkt(require_string(feature, "wkt"), uid);
    if (props.contains("subtype") && props["subtype"].is_string()) {
      b.damage = parse_damage_class(props["subtype"].get<std::string>());
    }
    b.event_id = out.event_id;
    b.disaster_type = out.disaster_type;
    b.scene_id = out.scene_id;
    out.buildings.push_back(std::move(b));
  }
  return out;
}

std::vector<LabeledBuilding> parse_label_file(std::string_view text) {
  return parse_label_document(text).buildings;
}

std::string serialize_label_document(const LabelDocument& d) {
  json meta = {{"event", d.event_id}, {"disaster_type", std::string(to_string(d.disaster_type))}, {"scene_id", d.scene_id}};
  if (d.hazard_attributes) meta["hazard_attributes"] = to_json(*d.hazard_attributes);
  if (d.hazard_level) meta["hazard_level"] = *d.hazard_level;
  json features = json::array();
  for (const auto& b : d.buildings) {
    features.push_back({{"wkt", to_wkt(b.footprint)},
                        {"properties", {{"subtype", std::string(to_string(b.damage))}, {"uid", b.building_id()}}}});
  }
  json doc = {{"metadata", meta}, {"features", features}};
  return doc.dump(2);
}

std::vector<LabeledBuilding> filter_training(const std::vector<LabeledBuilding>& buildings) {
  std::vector<LabeledBuilding> out;
  std::copy_if(buildings.begin(), buildings.end(), std::back_inserter(out),
               [](const LabeledBuilding& b) { return b.damage != DamageClass::Unclassified; });
  return out;
}

std::size_t Event::building_count() const {
  std::size_t n = 0;
  for (const auto& s : scenes) n += s.buildings.size();
  return n;
}

std::size_t EventCatalog::building_count() const {
  std::size_t n = 0;
  for (const auto& [type, events] : groups) {
    for (const auto& [id, event] : events) n += event.building_count();
  }
  return n;
}

std::size_t EventCatalog::event_count() const {
  std::size_t n = 0;
  for (const auto& [type, events] : groups) n += events.size();
  return n;
}

std::vector<LabeledBuilding> EventCatalog::all_buildings() const {
  std::vector<LabeledBuilding> out;
  for (const auto& [type, events] : groups) {
    for (const auto& [id, event] : events) {
      for (const auto& scene : event.scenes) out.insert(out.end(), scene.buildings.begin(), scene.buildings.end());
    }
  }
  return out;
}

const SceneRecord* EventCatalog::find_scene(const std::string& event_id, const std::string& scene_id) const {
  for (const auto& [type, events] : groups) {
    auto it = events.find(event_id);
    if (it == events.end()) continue;
    for (const auto& scene : it->second.scenes) {
      if (scene.scene_id == scene_id) return &scene;
    }
  }
  return nullptr;
}

EventCatalog build_catalog(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::path events_dir = root / "events";
  if (!fs::is_directory(events_dir)) events_dir = root;
  if (!fs::is_directory(events_dir)) throw Error(ErrorCode::EmptyCatalog, root.string() + " is not a directory");

  std::vector<fs::path> event_dirs;
  for (const auto& entry : fs::directory_iterator(events_dir)) {
    if (entry.is_directory() && fs::is_directory(entry.path() / "labels")) event_dirs.push_back(entry.path());
  }
  std::sort(event_dirs.begin(), event_dirs.end());

  EventCatalog catalog;
  for (const auto& dir : event_dirs) {
    std::vector<fs::path> label_files;
    for (const auto& entry : fs::directory_iterator(dir / "labels")) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") label_files.push_back(entry.path());
    }
    std::sort(label_files.begin(), label_files.end());
    if (label_files.empty()) continue;

    Event event;
    event.event_id = dir.filename().string();
    std::optional<DisasterType> type;
    for (const auto& label_path : label_files) {
      LabelDocument doc = parse_label_document(read_text_file(label_path));
      if (type && *type != doc.disaster_type) {
        throw Error(ErrorCode::MixedDisasterTypesInEvent,
                    "event '" + event.event_id + "' mixes " + std::string(to_string(*type)) + " and " +
                        std::string(to_string(doc.disaster_type)));
      }
      type = doc.disaster_type;
      SceneRecord scene;
      scene.scene_id = label_path.stem().string();
      scene.label_path = label_path;
      scene.image_path = dir / "images" / (scene.scene_id + ".png");
      scene.hazard_attributes = doc.hazard_attributes;
      scene.hazard_level = doc.hazard_level;
      for (auto& b : doc.buildings) {
        b.event_id = event.event_id;
        b.scene_id = scene.scene_id;
      }
      scene.buildings = std::move(doc.buildings);
      event.scenes.push_back(std::move(scene));
    }
    event.disaster_type = *type;
    catalog.groups[*type][event.event_id] = std::move(event);
  }
  if (catalog.building_count() == 0) throw Error(ErrorCode::EmptyCatalog, "no labeled buildings under " + root.string());
  return catalog;
}

DatasetSplit split(const EventCatalog& catalog, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "split ratio must be in (0, 1)");
  std::map<DisasterType, std::vector<LabeledBuilding>> strata;
  for (auto& b : filter_training(catalog.all_buildings())) strata[b.disaster_type].push_back(std::move(b));

  DatasetSplit out;
  for (auto& [type, items] : strata) {
    if (items.size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  std::string(to_string(type)) + " has fewer than 2 classified buildings");
    }
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (index_of(type) + 1)));
    // Fisher-Yates with a raw engine draw keeps the permutation identical across standard libraries.
    for (std::size_t i = items.size() - 1; i > 0; --i) {
      std::swap(items[i], items[rng() % (i + 1)]);
    }
    const std::size_t n = items.size();
    auto n_train = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    out.train.insert(out.train.end(), items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.validation.insert(out.validation.end(), items.begin() + static_cast<std::ptrdiff_t>(n_train), items.end());
  }
  return out;
}

}  // namespace predism
