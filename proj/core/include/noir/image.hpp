#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace noir {

/// 8-bit RGB raster, row-major. `source` remembers the file an image was read
/// from (used by file-backed feature backends).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;
  std::string source;

  Image() = default;
  Image(int w, int h);

  std::uint8_t* px(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const std::uint8_t* px(int x, int y) const { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
  void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  bool same_pixels(const Image& o) const { return width == o.width && height == o.height && rgb == o.rgb; }
};

/// Binary P6 with maxval 255.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

/// Adds N(0, sigma^2) per channel on the [0, 1] scale, then rounds and clamps.
Image add_noise(const Image& img, double sigma, std::uint64_t seed);
/// Content moved by (dx, dy) pixels; uncovered pixels repeat the nearest edge.
Image translate(const Image& img, int dx, int dy);

}  // namespace noir
