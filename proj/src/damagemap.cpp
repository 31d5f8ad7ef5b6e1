#include "predism/damagemap.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <set>

#include "predism/error.hpp"
#include "predism/features.hpp"

namespace predism {

using nlohmann::json;

Rgb parse_hex_color(std::string_view text) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error(ErrorCode::InvalidConfig, "bad colour '" + std::string(text) + "'");
  };
  if (text.size() != 7 || text[0] != '#') throw Error(ErrorCode::InvalidConfig, "colours are #RRGGBB, got '" + std::string(text) + "'");
  auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(nibble(text[i]) * 16 + nibble(text[i + 1])); };
  return {byte(1), byte(3), byte(5)};
}

std::string to_hex(Rgb c) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (std::uint8_t v : {c.r, c.g, c.b}) {
    out += kDigits[v >> 4];
    out += kDigits[v & 15];
  }
  return out;
}

Palette palette_with_overrides(const json& overrides) {
  Palette palette;
  if (overrides.is_null() || (overrides.is_object() && overrides.empty())) return palette;
  if (!overrides.is_object()) throw Error(ErrorCode::InvalidConfig, "palette must be an object");
  for (const auto& [key, value] : overrides.items()) {
    if (!value.is_string()) throw Error(ErrorCode::InvalidConfig, "palette colours must be strings");
    const Rgb color = parse_hex_color(value.get<std::string>());
    if (key == "unclassified") {
      palette.unclassified = color;
    } else if (key.size() == 1 && key[0] >= '1' && key[0] <= '5') {
      palette.levels[static_cast<std::size_t>(key[0] - '1')] = color;
    } else {
      throw Error(ErrorCode::InvalidConfig, "unknown palette key '" + key + "'");
    }
  }
  palette.id = "custom";
  return palette;
}

json to_json(const Palette& palette) {
  json doc = {{"id", palette.id}, {"unclassified", to_hex(palette.unclassified)}};
  for (int k = 0; k < 5; ++k) doc[std::to_string(k + 1)] = to_hex(palette.levels[k]);
  return doc;
}

// ---------------------------------------------------------------- damage map json

namespace {

json level_json(const std::optional<int>& level) { return level ? json(*level) : json("unclassified"); }

std::optional<int> level_from_json(const json& v) {
  if (v.is_string() && normalize_token(v.get<std::string>()) == "unclassified") return std::nullopt;
  if (v.is_number_integer()) return HazardLevel(v.get<int>()).value();
  throw Error(ErrorCode::MalformedRequest, "damage_level must be 1..5 or \"unclassified\"");
}

Probs probs_from_json(const json& v) {
  if (!v.is_array() || v.size() != kLevelCount) throw Error(ErrorCode::MalformedRequest, "probs must hold 5 numbers");
  Probs p{};
  for (int k = 0; k < kLevelCount; ++k) p[k] = v[k].get<double>();
  return p;
}

}  // namespace

json to_json(const DamageMap& map) {
  json entries = json::array();
  for (const auto& e : map.entries) {
    entries.push_back({{"building_id", e.building_id}, {"damage_level", level_json(e.level)}, {"probs", e.probs}});
  }
  return {{"scene_id", map.scene_id},
          {"disaster_type", std::string(to_string(map.disaster_type))},
          {"hazard_level", map.hazard_level.value()},
          {"palette_id", map.palette_id},
          {"entries", entries},
          {"skipped", map.skipped}};
}

DamageMap damage_map_from_json(const json& doc) {
  try {
    DamageMap map;
    map.scene_id = doc.at("scene_id").get<std::string>();
    map.disaster_type = parse_disaster_type(doc.at("disaster_type").get<std::string>());
    map.hazard_level = HazardLevel(doc.at("hazard_level").get<int>());
    map.palette_id = doc.value("palette_id", "default");
    for (const auto& e : doc.at("entries")) {
      map.entries.push_back({e.at("building_id").get<std::string>(), level_from_json(e.at("damage_level")),
                             probs_from_json(e.at("probs"))});
    }
    if (doc.contains("skipped")) map.skipped = doc["skipped"].get<std::vector<std::string>>();
    return map;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRequest, std::string("damage map: ") + e.what());
  }
}

// ---------------------------------------------------------------- prediction

namespace {

struct PreparedBuilding {
  std::optional<Chip> chip;
  FeatureVector features;
};

std::vector<PreparedBuilding> prepare(const Scene& scene, const std::vector<Footprint>& footprints, int chip_size) {
  validate_scene(scene);
  const int n = static_cast<int>(footprints.size());
  std::vector<PreparedBuilding> out(footprints.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      const BitMask mask = rasterize(footprints[k], scene.pixels.width(), scene.pixels.height());
      if (mask.none()) continue;
      Chip chip = extract_chip(scene, mask, chip_size);
      chip.building_id = footprints[k].building_id;
      out[k].features = extract_features(chip);
      out[k].chip = std::move(chip);
    } catch (...) {
#pragma omp critical(predism_prepare_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (std::none_of(out.begin(), out.end(), [](const auto& p) { return p.chip.has_value(); })) {
    throw Error(ErrorCode::NoValidFootprints, "every footprint rasterized to an empty mask");
  }
  return out;
}

DamageMap predict_prepared(const Scene& scene, const std::vector<Footprint>& footprints,
                           const std::vector<PreparedBuilding>& prepared, DisasterType type, HazardLevel overall,
                           const AttributeLevels& attribute_levels, const Model& model) {
  if (!model.registry) throw Error(ErrorCode::NoBackboneAvailable, "model has no backbone registry");
  const RoutingWeights weights = route(type, *model.registry);
  const MetaVector meta = meta_vector(type, overall, attribute_levels);

  DamageMap map;
  map.scene_id = scene.scene_id;
  map.disaster_type = type;
  map.hazard_level = overall;
  map.palette_id = model.palette.id;
  map.entries.resize(footprints.size());

  const int n = static_cast<int>(footprints.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    DamageEntry& entry = map.entries[k];
    entry.building_id = footprints[k].building_id;
    if (!prepared[k].chip) {
      entry.probs.fill(1.0 / kLevelCount);
      continue;
    }
    try {
      entry.probs = ensemble_predict(*prepared[k].chip, prepared[k].features, meta, *model.registry, weights);
      entry.level = classify(entry.probs, model.confidence_threshold);
    } catch (...) {
#pragma omp critical(predism_predict_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  for (std::size_t k = 0; k < prepared.size(); ++k) {
    if (!prepared[k].chip) map.skipped.push_back(footprints[k].building_id);
  }
  return map;
}

AttributeLevels levels_of(const std::optional<HazardAttributes>& attrs, const ThresholdTable& table) {
  if (!attrs) return {};
  return attribute_levels(*attrs, table);
}

}  // namespace

DamageMap predict_scene(const Scene& scene, const std::vector<Footprint>& footprints, DisasterType type,
                        const HazardInput& hazard, const Model& model) {
  if (footprints.empty()) throw Error(ErrorCode::NoValidFootprints, "no footprints given");
  if (!hazard.level && !hazard.attributes) throw Error(ErrorCode::NoAttributes, "a hazard level or attributes are required");
  const HazardLevel overall = hazard.level ? *hazard.level : overall_level(*hazard.attributes, model.thresholds);
  const auto prepared = prepare(scene, footprints, model.chip_size);
  return predict_prepared(scene, footprints, prepared, type, overall, levels_of(hazard.attributes, model.thresholds), model);
}

std::vector<DamageMap> sweep(const Scene& scene, const std::vector<Footprint>& footprints, DisasterType type,
                             const std::vector<HazardLevel>& levels, const Model& model,
                             const std::optional<HazardAttributes>& attributes) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "sweep needs at least one hazard level");
  if (footprints.empty()) throw Error(ErrorCode::NoValidFootprints, "no footprints given");
  const auto prepared = prepare(scene, footprints, model.chip_size);
  const AttributeLevels attr_levels = levels_of(attributes, model.thresholds);
  std::vector<DamageMap> maps;
  maps.reserve(levels.size());
  for (HazardLevel level : levels) {
    maps.push_back(predict_prepared(scene, footprints, prepared, type, level, attr_levels, model));
  }
  return maps;
}

// ---------------------------------------------------------------- geojson

Point pixel_to_lnglat(double x, double y, int width, int height, const GeoBounds& b) {
  const double tx = x / width;
  const double ty = y / height;
  return {b.lng_min * (1.0 - tx) + b.lng_max * tx, b.lat_max * (1.0 - ty) + b.lat_min * ty};
}

namespace {

double round6(double v) { return std::round(v * 1e6) / 1e6; }

}  // namespace

std::string to_geojson(const DamageMap& map, const std::vector<Footprint>& footprints,
                       const std::optional<GeoBounds>& bounds, int width, int height) {
  if (!bounds) throw Error(ErrorCode::MissingGeoBounds, "scene '" + map.scene_id + "' has no geo bounds");
  std::map<std::string, const Footprint*> by_id;
  for (const auto& fp : footprints) by_id[fp.building_id] = &fp;

  json features = json::array();
  for (const auto& entry : map.entries) {
    auto it = by_id.find(entry.building_id);
    if (it == by_id.end()) throw Error(ErrorCode::IdMismatch, "no footprint for '" + entry.building_id + "'");
    json rings = json::array();
    for (const auto& ring : it->second->rings) {
      json coords = json::array();
      for (const auto& p : ring) {
        const Point ll = pixel_to_lnglat(p.x, p.y, width, height, *bounds);
        coords.push_back({round6(ll.x), round6(ll.y)});
      }
      rings.push_back(std::move(coords));
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", rings}}},
                        {"properties",
                         {{"building_id", entry.building_id},
                          {"damage_level", level_json(entry.level)},
                          {"probs", entry.probs},
                          {"hazard_level", map.hazard_level.value()}}}});
  }
  json doc = {{"type", "FeatureCollection"},
              {"scene_id", map.scene_id},
              {"disaster_type", std::string(to_string(map.disaster_type))},
              {"hazard_level", map.hazard_level.value()},
              {"palette_id", map.palette_id},
              {"features", features}};
  return doc.dump(2);
}

DamageMap parse_geojson(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("type", "") != "FeatureCollection") throw Error(ErrorCode::MalformedRequest, "not a FeatureCollection");
    DamageMap map;
    map.scene_id = doc.value("scene_id", "");
    map.disaster_type = parse_disaster_type(doc.value("disaster_type", "flood"));
    map.hazard_level = HazardLevel(doc.at("hazard_level").get<int>());
    map.palette_id = doc.value("palette_id", "default");
    for (const auto& f : doc.at("features")) {
      const json& props = f.at("properties");
      map.entries.push_back({props.at("building_id").get<std::string>(), level_from_json(props.at("damage_level")),
                             probs_from_json(props.at("probs"))});
    }
    return map;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRequest, std::string("geojson: ") + e.what());
  }
}

// ---------------------------------------------------------------- rendering

RgbImage render_map(const DamageMap& map, const Scene& scene, const std::vector<Footprint>& footprints,
                    const Palette& palette) {
  const RgbImage& src = scene.pixels;
  RgbImage out(src.width(), src.height());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      const auto gray = static_cast<std::uint8_t>(std::clamp(std::floor(luminance(src.pixel(x, y)) * 255.0 + 0.5), 0.0, 255.0));
      std::uint8_t* p = out.pixel(x, y);
      p[0] = p[1] = p[2] = gray;
    }
  }
  std::map<std::string, const DamageEntry*> by_id;
  for (const auto& e : map.entries) by_id[e.building_id] = &e;
  for (const auto& fp : footprints) {
    auto it = by_id.find(fp.building_id);
    if (it == by_id.end()) continue;
    const Rgb color = palette.color_for(it->second->level);
    const BitMask mask = rasterize(fp, src.width(), src.height());
    for (int y = 0; y < src.height(); ++y) {
      for (int x = 0; x < src.width(); ++x) {
        if (!mask.get(x, y)) continue;
        std::uint8_t* p = out.pixel(x, y);
        p[0] = color.r;
        p[1] = color.g;
        p[2] = color.b;
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> render_png(const DamageMap& map, const Scene& scene, const std::vector<Footprint>& footprints,
                                     const Palette& palette) {
  return encode_png(render_map(map, scene, footprints, palette));
}

// ---------------------------------------------------------------- evaluation

EvalReport evaluate(const DamageMap& prediction, const std::vector<LabeledBuilding>& gold) {
  std::map<std::string, const DamageEntry*> predicted;
  for (const auto& e : prediction.entries) predicted[e.building_id] = &e;
  std::set<std::string> gold_ids;
  for (const auto& b : gold) gold_ids.insert(b.building_id());
  if (gold_ids.size() != predicted.size() ||
      !std::all_of(gold_ids.begin(), gold_ids.end(), [&](const auto& id) { return predicted.count(id) > 0; })) {
    throw Error(ErrorCode::IdMismatch, "prediction and gold cover different buildings");
  }

  EvalReport report;
  std::size_t hits = 0;
  for (const auto& b : gold) {
    if (b.damage == DamageClass::Unclassified) {
      ++report.excluded;
      continue;
    }
    const int truth = class_to_level(b.damage);
    const auto& level = predicted[b.building_id()]->level;
    report.confusion[truth - 1][level ? *level - 1 : 5] += 1;
    hits += level && *level == truth;
    ++report.n;
  }
  report.accuracy = report.n ? static_cast<double>(hits) / static_cast<double>(report.n) : 0.0;
  return report;
}

json to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy}, {"n", r.n}, {"excluded_unclassified", r.excluded}, {"confusion", r.confusion}};
}

// ---------------------------------------------------------------- artifacts

json write_sweep_artifacts(const std::filesystem::path& out_dir, const std::vector<DamageMap>& maps, const Scene& scene,
                           const std::vector<Footprint>& footprints, const Palette& palette) {
  if (!scene.geo_bounds) throw Error(ErrorCode::MissingGeoBounds, "scene '" + scene.scene_id + "' has no geo bounds");
  std::filesystem::create_directories(out_dir);
  json manifest = {{"scene_id", scene.scene_id}, {"levels", json::array()}, {"maps", json::array()}};
  if (!maps.empty()) manifest["disaster_type"] = std::string(to_string(maps.front().disaster_type));
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const DamageMap& map = maps[i];
    const std::string stem = scene.scene_id + "_" + std::to_string(i) + "_level" + std::to_string(map.hazard_level.value());
    write_text_file(out_dir / (stem + ".geojson"),
                    to_geojson(map, footprints, scene.geo_bounds, scene.pixels.width(), scene.pixels.height()));
    write_png(out_dir / (stem + ".png"), render_map(map, scene, footprints, palette));
    write_text_file(out_dir / (stem + ".json"), to_json(map).dump(2));
    manifest["levels"].push_back(map.hazard_level.value());
    manifest["maps"].push_back({{"hazard_level", map.hazard_level.value()},
                                {"geojson", stem + ".geojson"},
                                {"render", stem + ".png"},
                                {"damage_map", stem + ".json"}});
  }
  write_text_file(out_dir / "manifest.json", manifest.dump(2));
  return manifest;
}

}  // namespace predism
