#include "predism/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace predism {

FeatureVector extract_features(const Chip& chip) {
  const RgbImage& img = chip.pixels;
  const int w = img.width();
  const int h = img.height();
  const double n = static_cast<double>(w) * h;

  FeatureVector f;
  std::array<double, 3> sum{}, sum_sq{};
  std::vector<double> luma(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::uint8_t* p = img.pixel(x, y);
      for (int c = 0; c < 3; ++c) {
        const double v = p[c] / 255.0;
        sum[c] += v;
        sum_sq[c] += v * v;
      }
      const double l = luminance(p);
      luma[static_cast<std::size_t>(y) * w + x] = l;
      const auto bin = std::min<std::size_t>(FeatureVector::kHistogramBins - 1,
                                             static_cast<std::size_t>(l * FeatureVector::kHistogramBins));
      f.values[FeatureVector::kHistogram + bin] += 1.0;
    }
  }
  for (int c = 0; c < 3; ++c) {
    const double mean = sum[c] / n;
    f.values[c] = mean;
    f.values[3 + c] = std::sqrt(std::max(0.0, sum_sq[c] / n - mean * mean));
  }
  for (std::size_t b = 0; b < FeatureVector::kHistogramBins; ++b) f.values[FeatureVector::kHistogram + b] /= n;

  auto at = [&](int x, int y) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return luma[static_cast<std::size_t>(y) * w + x];
  };
  std::size_t edges = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
      const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
      if (std::sqrt(gx * gx + gy * gy) > kEdgeThreshold) ++edges;
    }
  }
  f.values[FeatureVector::kEdgeDensity] = static_cast<double>(edges) / n;
  f.values[FeatureVector::kAreaFraction] = chip.area_fraction;
  if (chip.mask_pixels > 0) {
    const double perimeter = static_cast<double>(chip.mask_perimeter);
    f.values[FeatureVector::kCompactness] =
        perimeter * perimeter / (4.0 * std::numbers::pi * static_cast<double>(chip.mask_pixels));
  }
  return f;
}

MetaVector meta_vector(DisasterType type, HazardLevel overall, const AttributeLevels& attribute_levels) {
  MetaVector m;
  m.values[index_of(type)] = 1.0;
  m.values[MetaVector::kHazardLevel] = overall.value() / 5.0;
  for (std::size_t a = 0; a < kHazardAttributeCount; ++a) {
    if (attribute_levels[a]) m.values[MetaVector::kAttributeLevels + a] = HazardLevel(*attribute_levels[a]).value() / 5.0;
  }
  return m;
}

MetaVector meta_vector(std::string_view type, HazardLevel overall, const AttributeLevels& attribute_levels) {
  return meta_vector(parse_disaster_type(type), overall, attribute_levels);
}

}  // namespace predism
