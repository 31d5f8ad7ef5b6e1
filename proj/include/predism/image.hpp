#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace predism {

/// Interleaved 8-bit RGB raster, row-major.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return width_ == 0 || height_ == 0; }

  std::uint8_t* pixel(int x, int y) { return data_.data() + index(x, y); }
  const std::uint8_t* pixel(int x, int y) const { return data_.data() + index(x, y); }

  std::span<std::uint8_t> bytes() noexcept { return data_; }
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// One bit of coverage per scene pixel.
class BitMask {
 public:
  BitMask() = default;
  BitMask(int width, int height) : width_(width), height_(height), bits_(static_cast<std::size_t>(width) * height, 0) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0; }

  /// Number of set pixels.
  std::size_t count() const;
  bool none() const { return count() == 0; }

  bool operator==(const BitMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  // byte-per-pixel keeps concurrent row writes race-free
  std::vector<std::uint8_t> bits_;
};

struct GeoBounds {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lng_min = 0.0;
  double lng_max = 0.0;
};

struct Scene {
  std::string scene_id;
  RgbImage pixels;
  std::optional<GeoBounds> geo_bounds;
};

/// Throws MalformedImage on zero-sized images or inverted bounds.
void validate_scene(const Scene& scene);

RgbImage decode_png(std::span<const std::uint8_t> bytes);
RgbImage read_png(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

GeoBounds parse_geo_bounds(const std::string& json_text);
std::string geo_bounds_to_json(const GeoBounds& bounds);

/// Loads `<dir>/<stem>.png` and the optional `<dir>/<stem>.geo.json` sidecar.
Scene load_scene(const std::filesystem::path& png_path);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace predism
