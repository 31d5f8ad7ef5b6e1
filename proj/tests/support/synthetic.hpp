#pragma once

// Synthetic scenes and corpora with known labels.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "predism/dataset.hpp"
#include "predism/image.hpp"
#include "predism/trainer.hpp"

namespace predism::synth {

/// Ground-truth rule of the separable dataset: quantized luminance plus a
/// hazard shift, level = clamp(1 + floor(3 L + (h - 1) / 2), 1, 5).
int separable_level(double luminance, int hazard);

inline constexpr double kDefaultMargin = 0.05;

/// Distance of 3 L + (h - 1) / 2 to the nearest class boundary.
double boundary_margin(double luminance, int hazard);

struct GridSpec {
  int columns = 10;
  int rows = 10;
  int building = 8;  // square side in pixels
  int cell = 12;     // grid pitch in pixels
};

/// Gray value per building, drawn so every building sits at least `margin`
/// away from a class boundary at hazard level `hazard`.
std::vector<std::uint8_t> draw_grays(std::size_t n, int hazard, double margin, std::uint64_t seed);

/// Scene with one flat gray square per building on a dark background, plus
/// geo bounds. Footprints are returned through `footprints`.
Scene grid_scene(const std::string& scene_id, const GridSpec& grid, const std::vector<std::uint8_t>& grays,
                 std::vector<Footprint>& footprints);

/// Training samples built through the real chip and feature pipeline:
/// `n` buildings spread evenly over hazard levels 1..5.
/// Every building keeps at least `margin` from a class boundary.
std::vector<TrainingSample> separable_samples(std::size_t n, std::uint64_t seed, int chip_size = 32,
                                              double margin = kDefaultMargin);

struct CorpusSpec {
  std::string event_id = "synthetic-flood";
  DisasterType disaster_type = DisasterType::Flood;
  std::size_t buildings = 500;
  /// Fraction of buildings written with subtype "un-classified".
  double unclassified_fraction = 0.0;
  std::uint64_t seed = 1;
};

struct CorpusSummary {
  std::size_t buildings = 0;
  std::size_t unclassified = 0;
  std::vector<std::string> unclassified_ids;
  std::vector<std::filesystem::path> scenes;
  std::vector<std::filesystem::path> labels;
};

/// Writes `<root>/events/<event>/{images,labels}` with one scene per hazard
/// level 1..5. Damage classes follow separable_level (level 4 is written as
/// major-damage).
CorpusSummary write_corpus(const std::filesystem::path& root, const CorpusSpec& spec);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace predism::synth
