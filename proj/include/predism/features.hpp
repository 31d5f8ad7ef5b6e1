#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "predism/chip.hpp"
#include "predism/disaster.hpp"
#include "predism/hazard.hpp"

namespace predism {

/// Hand-built image descriptor standing in for CNN features.
///   [0..2]  per-channel mean on [0, 1]
///   [3..5]  per-channel standard deviation
///   [6]     edge density
///   [7]     area fraction of the source mask
///   [8]     compactness of the source mask
///   [9..16] 8-bin luminance histogram (sums to 1)
struct FeatureVector {
  static constexpr std::size_t kSize = 17;
  static constexpr std::size_t kEdgeDensity = 6;
  static constexpr std::size_t kAreaFraction = 7;
  static constexpr std::size_t kCompactness = 8;
  static constexpr std::size_t kHistogram = 9;
  static constexpr std::size_t kHistogramBins = 8;

  std::array<double, kSize> values{};
};

/// Rec. 601 luma of an 8-bit RGB triple, on [0, 1].
inline double luminance(const std::uint8_t* rgb) {
  return (0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]) / 255.0;
}

/// Gradient magnitude threshold above which a pixel counts as an edge.
inline constexpr double kEdgeThreshold = 0.1;

/// Edge density uses central differences of luminance with replicated
/// borders; compactness is perimeter^2 / (4 pi area) of the source mask.
FeatureVector extract_features(const Chip& chip);

/// Non-pixel context: one-hot disaster type, overall hazard level / 5, and
/// per-attribute levels / 5 (0 when the attribute is absent).
struct MetaVector {
  static constexpr std::size_t kSize = 15;
  static constexpr std::size_t kHazardLevel = 7;
  static constexpr std::size_t kAttributeLevels = 8;

  std::array<double, kSize> values{};
};

using AttributeLevels = std::array<std::optional<int>, kHazardAttributeCount>;

MetaVector meta_vector(DisasterType type, HazardLevel overall, const AttributeLevels& attribute_levels = {});
/// Throws UnknownDisasterType.
MetaVector meta_vector(std::string_view type, HazardLevel overall, const AttributeLevels& attribute_levels = {});

}  // namespace predism
