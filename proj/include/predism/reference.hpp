#pragma once

// Serial, straightforward versions of the parallel kernels. They follow the
// definitions pixel by pixel and exist to check and benchmark the fast paths.

#include <vector>

#include "predism/chip.hpp"
#include "predism/geometry.hpp"

namespace predism::reference {

/// Even-odd crossing test written with cross products instead of a division,
/// so it is exact for coordinates on a dyadic grid. On-edge centers follow
/// the same top-left convention as rasterize().
bool contains_point_exact(const Footprint& footprint, double px, double py);

/// Tests every pixel center independently.
BitMask rasterize_bruteforce(const Footprint& footprint, int width, int height);

/// Builds each intermediate image explicitly: zeroed scene, bbox crop,
/// padded square, then the bilinear resample.
Chip extract_chip_pixelwise(const Scene& scene, const BitMask& mask, int out_size);

/// chip_set() on one thread using the two functions above.
ChipSet chip_set_serial(const Scene& scene, const std::vector<Footprint>& footprints, int out_size);

}  // namespace predism::reference
