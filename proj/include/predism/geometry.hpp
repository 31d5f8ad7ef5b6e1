#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "predism/image.hpp"

namespace predism {

struct Point {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point&) const = default;
};

/// Closed ring: first vertex equals last vertex.
using Ring = std::vector<Point>;

/// Building outline in scene pixel coordinates. rings[0] is the outer
/// boundary; any further rings are holes.
struct Footprint {
  std::string building_id;
  std::vector<Ring> rings;

  bool operator==(const Footprint&) const = default;
};

/// Parses a WKT `POLYGON ((x y, ...), (...))`. Rings that are not closed get
/// their first vertex appended. Throws MalformedWkt.
Footprint parse_wkt(std::string_view text, std::string building_id = {});

/// Shortest round-trip formatting of every coordinate.
std::string to_wkt(const Footprint& footprint);

/// Even-odd test with the half-open (top-left) convention used by rasterize().
bool contains_point(const Footprint& footprint, double px, double py);

/// Pixel (i, j) is set iff its center (i + 0.5, j + 0.5) is inside the
/// polygon under the even-odd rule. A center lying exactly on an edge is
/// inside only for top and left edges, so abutting polygons never share a
/// pixel. Rows are filled in parallel.
BitMask rasterize(const Footprint& footprint, int width, int height);

}  // namespace predism
