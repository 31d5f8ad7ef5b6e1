#include "predism/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <cmath>
#include <set>

#include "predism/error.hpp"

namespace predism {

namespace {

class WktReader {
 public:
  explicit WktReader(std::string_view text) : text_(text) {}

  Footprint parse() {
    skip_ws();
    expect_keyword("POLYGON");
    skip_ws();
    expect('(');
    Footprint fp;
    fp.rings.push_back(parse_ring());
    skip_ws();
    while (peek() == ',') {
      ++pos_;
      fp.rings.push_back(parse_ring());
      skip_ws();
    }
    expect(')');
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after polygon");
    return fp;
  }

 private:
  Ring parse_ring() {
    skip_ws();
    expect('(');
    Ring ring;
    ring.push_back(parse_point());
    skip_ws();
    while (peek() == ',') {
      ++pos_;
      ring.push_back(parse_point());
      skip_ws();
    }
    expect(')');
    if (ring.front() != ring.back()) ring.push_back(ring.front());
    std::set<std::pair<double, double>> distinct;
    for (const auto& p : ring) distinct.emplace(p.x, p.y);
    if (distinct.size() < 3) fail("ring has fewer than 3 distinct vertices");
    return ring;
  }

  Point parse_point() {
    Point p;
    p.x = parse_number();
    p.y = parse_number();
    return p;
  }

  double parse_number() {
    skip_ws();
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    if (begin != end && *begin == '+') ++begin;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr == begin || !std::isfinite(value)) fail("non-numeric coordinate");
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  void expect_keyword(std::string_view word) {
    if (text_.size() - pos_ < word.size()) fail("expected POLYGON");
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(text_[pos_ + i])) != word[i]) fail("expected POLYGON");
    }
    pos_ += word.size();
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorCode::MalformedWkt, why + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Edge {
  double x0, y0, x1, y1;
};

std::vector<Edge> collect_edges(const Footprint& fp) {
  std::vector<Edge> edges;
  for (const auto& ring : fp.rings) {
    for (std::size_t k = 1; k < ring.size(); ++k) {
      edges.push_back({ring[k - 1].x, ring[k - 1].y, ring[k].x, ring[k].y});
    }
  }
  return edges;
}

// x of the crossing between the edge and the horizontal line y = py.
// Multiply before dividing so the result is exact whenever it is representable.
inline double crossing_x(const Edge& e, double py) {
  return e.x0 + ((py - e.y0) * (e.x1 - e.x0)) / (e.y1 - e.y0);
}

inline bool straddles(const Edge& e, double py) { return (e.y0 > py) != (e.y1 > py); }

// First column whose center is >= x.
int first_column_at_or_after(double x) {
  double c = std::ceil(x - 0.5);
  if (c < -1.0) return -1;
  if (c > 1e9) return 1000000000;
  int i = static_cast<int>(c);
  while (i + 0.5 < x) ++i;
  while (i - 0.5 >= x) --i;
  return i;
}

}  // namespace

Footprint parse_wkt(std::string_view text, std::string building_id) {
  Footprint fp = WktReader(text).parse();
  fp.building_id = std::move(building_id);
  return fp;
}

std::string to_wkt(const Footprint& fp) {
  std::string out = "POLYGON (";
  for (std::size_t r = 0; r < fp.rings.size(); ++r) {
    if (r) out += ", ";
    out += '(';
    for (std::size_t k = 0; k < fp.rings[r].size(); ++k) {
      if (k) out += ", ";
      out += format_number(fp.rings[r][k].x) + ' ' + format_number(fp.rings[r][k].y);
    }
    out += ')';
  }
  out += ')';
  return out;
}

bool contains_point(const Footprint& fp, double px, double py) {
  bool inside = false;
  for (const auto& ring : fp.rings) {
    for (std::size_t k = 1; k < ring.size(); ++k) {
      const Edge e{ring[k - 1].x, ring[k - 1].y, ring[k].x, ring[k].y};
      if (straddles(e, py) && px < crossing_x(e, py)) inside = !inside;
    }
  }
  return inside;
}

BitMask rasterize(const Footprint& fp, int width, int height) {
  if (width < 1 || height < 1) throw Error(ErrorCode::MalformedImage, "raster dimensions must be positive");
  BitMask mask(width, height);
  const auto edges = collect_edges(fp);
  if (edges.empty()) return mask;

  double ymin = edges.front().y0, ymax = ymin;
  for (const auto& e : edges) {
    ymin = std::min({ymin, e.y0, e.y1});
    ymax = std::max({ymax, e.y0, e.y1});
  }
  const int row_begin = static_cast<int>(std::clamp(std::floor(ymin - 0.5), 0.0, static_cast<double>(height)));
  const int row_end = static_cast<int>(std::clamp(std::ceil(ymax + 0.5), 0.0, static_cast<double>(height)));

#pragma omp parallel for schedule(static)
  for (int j = row_begin; j < row_end; ++j) {
    const double py = j + 0.5;
    std::vector<double> xs;
    for (const auto& e : edges) {
      if (straddles(e, py)) xs.push_back(crossing_x(e, py));
    }
    std::sort(xs.begin(), xs.end());
    // Crossings always pair up on a closed ring; a center lies inside iff it
    // falls in some [xs[2k], xs[2k+1]).
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int lo = std::max(first_column_at_or_after(xs[k]), 0);
      const int hi = std::min(first_column_at_or_after(xs[k + 1]), width);
      for (int i = lo; i < hi; ++i) mask.set(i, j);
    }
  }
  return mask;
}

}  // namespace predism
