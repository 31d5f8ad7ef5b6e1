#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "predism/dataset.hpp"
#include "predism/ensemble.hpp"
#include "predism/hazard.hpp"
#include "predism/image.hpp"

namespace predism {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

/// "#RRGGBB" (case-insensitive). Throws InvalidConfig.
Rgb parse_hex_color(std::string_view text);
std::string to_hex(Rgb color);

struct Palette {
  std::array<Rgb, 5> levels{Rgb{0x2E, 0xCC, 0x71}, Rgb{0xF1, 0xC4, 0x0F}, Rgb{0xE6, 0x7E, 0x22},
                            Rgb{0xE7, 0x4C, 0x3C}, Rgb{0x8E, 0x44, 0xAD}};
  Rgb unclassified{0x95, 0xA5, 0xA6};
  std::string id = "default";

  Rgb color_for(std::optional<int> level) const { return level ? levels[*level - 1] : unclassified; }
};

/// Keys "1".."5" and "unclassified" mapped to hex colours. Throws InvalidConfig.
Palette palette_with_overrides(const nlohmann::json& overrides);
nlohmann::json to_json(const Palette& palette);

/// Everything inference needs besides the scene.
struct Model {
  std::shared_ptr<const BackboneRegistry> registry;
  ThresholdTable thresholds = ThresholdTable::defaults();
  int chip_size = kDefaultChipSize;
  double confidence_threshold = kDefaultConfidenceThreshold;
  Palette palette;
};

/// An explicit level wins over the level derived from attributes; attribute
/// levels still fill their meta slots.
struct HazardInput {
  std::optional<HazardLevel> level;
  std::optional<HazardAttributes> attributes;
};

struct DamageEntry {
  std::string building_id;
  std::optional<int> level;  // empty: unclassified
  Probs probs{};
  bool operator==(const DamageEntry&) const = default;
};

struct DamageMap {
  std::string scene_id;
  DisasterType disaster_type = DisasterType::Flood;
  HazardLevel hazard_level{1};
  std::string palette_id = "default";
  /// One per input footprint, in input order.
  std::vector<DamageEntry> entries;
  /// Footprints that rasterized to nothing; they appear as unclassified
  /// entries with a uniform distribution.
  std::vector<std::string> skipped;
};

nlohmann::json to_json(const DamageMap& map);
DamageMap damage_map_from_json(const nlohmann::json& doc);

/// chips -> features -> meta -> route -> ensemble -> classify, per building.
/// Uses only pre-event imagery and footprints. Throws NoValidFootprints,
/// UnknownDisasterType, NoBackboneAvailable or BackboneFailure.
DamageMap predict_scene(const Scene& scene, const std::vector<Footprint>& footprints, DisasterType type,
                        const HazardInput& hazard, const Model& model);

/// One map per requested level, sharing chips and features; only the hazard
/// entry of the meta vector changes between runs.
std::vector<DamageMap> sweep(const Scene& scene, const std::vector<Footprint>& footprints, DisasterType type,
                             const std::vector<HazardLevel>& levels, const Model& model,
                             const std::optional<HazardAttributes>& attributes = std::nullopt);

/// Pixel to (lng, lat): linear interpolation with the top-left corner at
/// (lng_min, lat_max). Corners map to the bounds exactly.
Point pixel_to_lnglat(double x, double y, int width, int height, const GeoBounds& bounds);

/// RFC 7946 FeatureCollection; coordinates rounded to 6 decimals. Throws
/// MissingGeoBounds.
std::string to_geojson(const DamageMap& map, const std::vector<Footprint>& footprints,
                       const std::optional<GeoBounds>& bounds, int width, int height);
DamageMap parse_geojson(const std::string& text);

/// Grayscale backdrop with building pixels filled by palette colour.
RgbImage render_map(const DamageMap& map, const Scene& scene, const std::vector<Footprint>& footprints,
                    const Palette& palette = {});
std::vector<std::uint8_t> render_png(const DamageMap& map, const Scene& scene, const std::vector<Footprint>& footprints,
                                     const Palette& palette = {});

struct EvalReport {
  double accuracy = 0.0;
  /// rows: gold level 1..5; columns: predicted level 1..5, then unclassified.
  std::array<std::array<std::size_t, 6>, 5> confusion{};
  /// Buildings scored (gold classified).
  std::size_t n = 0;
  /// Gold-unclassified buildings left out of the score.
  std::size_t excluded = 0;
};

/// Scores predictions against gold labels. Throws IdMismatch unless both
/// cover the same building ids.
EvalReport evaluate(const DamageMap& prediction, const std::vector<LabeledBuilding>& gold);
nlohmann::json to_json(const EvalReport& report);

struct SweepArtifact {
  int hazard_level = 0;
  std::filesystem::path geojson;
  std::filesystem::path render;
  std::filesystem::path damage_map;
};

/// Writes GeoJSON, PNG render and damage-map JSON per level plus
/// `manifest.json` under `out_dir`. Returns the manifest.
nlohmann::json write_sweep_artifacts(const std::filesystem::path& out_dir, const std::vector<DamageMap>& maps,
                                     const Scene& scene, const std::vector<Footprint>& footprints,
                                     const Palette& palette);

}  // namespace predism
