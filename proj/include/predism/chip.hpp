#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "predism/geometry.hpp"
#include "predism/image.hpp"

namespace predism {

inline constexpr int kDefaultChipSize = 64;

/// Fixed-size square image holding exactly one building; everything outside
/// the building mask is zero.
struct Chip {
  RgbImage pixels;
  std::string building_id;
  std::string scene_id;
  /// Set mask pixels over scene pixels, in (0, 1].
  double area_fraction = 0.0;
  std::size_t mask_pixels = 0;
  /// Count of set-pixel edges that border an unset or out-of-raster pixel.
  std::size_t mask_perimeter = 0;
};

struct ChipSet {
  std::vector<Chip> chips;
  /// Footprints whose mask came out empty, in input order.
  std::vector<std::string> skipped;
};

/// Zeroes off-mask pixels, crops to the mask bounding box, centers the crop
/// in a zero-padded square and bilinearly resamples it to out_size x out_size.
/// Throws EmptyFootprint when the mask has no set pixel.
Chip extract_chip(const Scene& scene, const BitMask& mask, int out_size);

/// One chip per footprint with a non-empty mask, in input order. Footprints
/// are processed in parallel; the result does not depend on thread count.
/// Throws NoValidFootprints when every mask is empty.
ChipSet chip_set(const Scene& scene, const std::vector<Footprint>& footprints, int out_size);

std::size_t mask_perimeter(const BitMask& mask);

namespace detail {

/// Source coordinate sampled for destination index `d` when resampling a
/// `src`-wide square to `dst` pixels (pixel-center alignment, clamped).
inline double resample_coordinate(int d, int src, int dst) {
  double s = ((d + 0.5) * src) / dst - 0.5;
  if (s < 0.0) s = 0.0;
  if (s > src - 1) s = src - 1;
  return s;
}

}  // namespace detail

}  // namespace predism
