#include "predism/chip.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "predism/error.hpp"

namespace predism {

namespace {

struct BoundingBox {
  int x0, y0, x1, y1;  // inclusive
  int width() const { return x1 - x0 + 1; }
  int height() const { return y1 - y0 + 1; }
};

BoundingBox mask_bounds(const BitMask& mask) {
  BoundingBox box{mask.width(), mask.height(), -1, -1};
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      box.x0 = std::min(box.x0, x);
      box.y0 = std::min(box.y0, y);
      box.x1 = std::max(box.x1, x);
      box.y1 = std::max(box.y1, y);
    }
  }
  return box;
}

}  // namespace

std::size_t mask_perimeter(const BitMask& mask) {
  std::size_t edges = 0;
  auto unset = [&](int x, int y) {
    return x < 0 || y < 0 || x >= mask.width() || y >= mask.height() || !mask.get(x, y);
  };
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask.get(x, y)) continue;
      edges += unset(x - 1, y) + unset(x + 1, y) + unset(x, y - 1) + unset(x, y + 1);
    }
  }
  return edges;
}

Chip extract_chip(const Scene& scene, const BitMask& mask, int out_size) {
  const RgbImage& src = scene.pixels;
  if (mask.width() != src.width() || mask.height() != src.height()) {
    throw Error(ErrorCode::MalformedImage, "mask dimensions differ from scene dimensions");
  }
  if (out_size < 8) throw Error(ErrorCode::InvalidConfig, "chip size must be at least 8");

  const BoundingBox box = mask_bounds(mask);
  if (box.x1 < 0) throw Error(ErrorCode::EmptyFootprint, "mask has no set pixels");

  const int side = std::max(box.width(), box.height());
  const int pad_x = (side - box.width()) / 2;
  const int pad_y = (side - box.height()) / 2;

  // Value of the padded, masked square at (u, v).
  auto padded = [&](int u, int v, int c) -> double {
    const int x = box.x0 + u - pad_x;
    const int y = box.y0 + v - pad_y;
    if (x < box.x0 || x > box.x1 || y < box.y0 || y > box.y1) return 0.0;
    if (!mask.get(x, y)) return 0.0;
    return src.pixel(x, y)[c];
  };

  Chip chip;
  chip.scene_id = scene.scene_id;
  chip.mask_pixels = mask.count();
  chip.mask_perimeter = mask_perimeter(mask);
  chip.area_fraction = static_cast<double>(chip.mask_pixels) /
                       (static_cast<double>(src.width()) * static_cast<double>(src.height()));
  chip.pixels = RgbImage(out_size, out_size);

  for (int dy = 0; dy < out_size; ++dy) {
    const double sy = detail::resample_coordinate(dy, side, out_size);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, side - 1);
    const double ty = sy - y0;
    for (int dx = 0; dx < out_size; ++dx) {
      const double sx = detail::resample_coordinate(dx, side, out_size);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, side - 1);
      const double tx = sx - x0;
      std::uint8_t* out = chip.pixels.pixel(dx, dy);
      for (int c = 0; c < 3; ++c) {
        const double v = (1.0 - tx) * (1.0 - ty) * padded(x0, y0, c) + tx * (1.0 - ty) * padded(x1, y0, c) +
                         (1.0 - tx) * ty * padded(x0, y1, c) + tx * ty * padded(x1, y1, c);
        out[c] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return chip;
}

ChipSet chip_set(const Scene& scene, const std::vector<Footprint>& footprints, int out_size) {
  validate_scene(scene);
  const int n = static_cast<int>(footprints.size());
  std::vector<std::optional<Chip>> slots(footprints.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < n; ++k) {
    try {
      const BitMask mask = rasterize(footprints[k], scene.pixels.width(), scene.pixels.height());
      if (mask.none()) continue;
      Chip chip = extract_chip(scene, mask, out_size);
      chip.building_id = footprints[k].building_id;
      slots[k] = std::move(chip);
    } catch (...) {
#pragma omp critical(predism_chip_set_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ChipSet out;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k]) {
      out.chips.push_back(std::move(*slots[k]));
    } else {
      out.skipped.push_back(footprints[k].building_id);
    }
  }
  if (out.chips.empty()) throw Error(ErrorCode::NoValidFootprints, "every footprint rasterized to an empty mask");
  return out;
}

}  // namespace predism
