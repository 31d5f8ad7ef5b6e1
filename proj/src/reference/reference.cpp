#include "predism/reference.hpp"

#include <algorithm>
#include <cmath>

#include "predism/error.hpp"

namespace predism::reference {

bool contains_point_exact(const Footprint& fp, double px, double py) {
  bool inside = false;
  for (const auto& ring : fp.rings) {
    for (std::size_t k = 1; k < ring.size(); ++k) {
      Point lo = ring[k - 1], hi = ring[k];
      if ((lo.y > py) == (hi.y > py)) continue;
      if (lo.y > hi.y) std::swap(lo, hi);
      // px < crossing x  <=>  (px - lo.x)(hi.y - lo.y) < (py - lo.y)(hi.x - lo.x), hi.y > lo.y
      if ((px - lo.x) * (hi.y - lo.y) < (py - lo.y) * (hi.x - lo.x)) inside = !inside;
    }
  }
  return inside;
}

BitMask rasterize_bruteforce(const Footprint& fp, int width, int height) {
  BitMask mask(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      if (contains_point_exact(fp, i + 0.5, j + 0.5)) mask.set(i, j);
    }
  }
  return mask;
}

Chip extract_chip_pixelwise(const Scene& scene, const BitMask& mask, int out_size) {
  const RgbImage& src = scene.pixels;
  if (mask.width() != src.width() || mask.height() != src.height()) {
    throw Error(ErrorCode::MalformedImage, "mask dimensions differ from scene dimensions");
  }
  if (out_size < 8) throw Error(ErrorCode::InvalidConfig, "chip size must be at least 8");

  // 1. zero everything off the mask
  RgbImage zeroed(src.width(), src.height());
  int x0 = src.width(), y0 = src.height(), x1 = -1, y1 = -1;
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      if (!mask.get(x, y)) continue;
      std::copy(src.pixel(x, y), src.pixel(x, y) + 3, zeroed.pixel(x, y));
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x);
      y1 = std::max(y1, y);
    }
  }
  if (x1 < 0) throw Error(ErrorCode::EmptyFootprint, "mask has no set pixels");

  // 2. crop to the bounding box
  const int w = x1 - x0 + 1, h = y1 - y0 + 1;
  RgbImage crop(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) std::copy(zeroed.pixel(x0 + x, y0 + y), zeroed.pixel(x0 + x, y0 + y) + 3, crop.pixel(x, y));
  }

  // 3. center in a zero-padded square
  const int side = std::max(w, h);
  RgbImage square(side, side);
  const int ox = (side - w) / 2, oy = (side - h) / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) std::copy(crop.pixel(x, y), crop.pixel(x, y) + 3, square.pixel(ox + x, oy + y));
  }

  // 4. bilinear resample
  Chip chip;
  chip.scene_id = scene.scene_id;
  chip.mask_pixels = mask.count();
  chip.mask_perimeter = mask_perimeter(mask);
  chip.area_fraction = static_cast<double>(chip.mask_pixels) /
                       (static_cast<double>(src.width()) * static_cast<double>(src.height()));
  chip.pixels = RgbImage(out_size, out_size);
  for (int dy = 0; dy < out_size; ++dy) {
    for (int dx = 0; dx < out_size; ++dx) {
      const double sx = detail::resample_coordinate(dx, side, out_size);
      const double sy = detail::resample_coordinate(dy, side, out_size);
      const int ax = static_cast<int>(std::floor(sx)), ay = static_cast<int>(std::floor(sy));
      const int bx = std::min(ax + 1, side - 1), by = std::min(ay + 1, side - 1);
      const double tx = sx - ax, ty = sy - ay;
      for (int c = 0; c < 3; ++c) {
        const double v = (1.0 - tx) * (1.0 - ty) * square.pixel(ax, ay)[c] + tx * (1.0 - ty) * square.pixel(bx, ay)[c] +
                         (1.0 - tx) * ty * square.pixel(ax, by)[c] + tx * ty * square.pixel(bx, by)[c];
        chip.pixels.pixel(dx, dy)[c] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
    }
  }
  return chip;
}

ChipSet chip_set_serial(const Scene& scene, const std::vector<Footprint>& footprints, int out_size) {
  ChipSet out;
  for (const auto& fp : footprints) {
    const BitMask mask = rasterize_bruteforce(fp, scene.pixels.width(), scene.pixels.height());
    if (mask.none()) {
      out.skipped.push_back(fp.building_id);
      continue;
    }
    Chip chip = extract_chip_pixelwise(scene, mask, out_size);
    chip.building_id = fp.building_id;
    out.chips.push_back(std::move(chip));
  }
  if (out.chips.empty()) throw Error(ErrorCode::NoValidFootprints, "every footprint rasterized to an empty mask");
  return out;
}

}  // namespace predism::reference
