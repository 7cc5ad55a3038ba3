#include "noir/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "noir/error.hpp"
#include "noir/rng.hpp"

namespace noir {

Image::Image(int w, int h) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, 0) {
  if (w < 1 || h < 1) fail(ErrorCode::UnsupportedDims, "image dimensions must be positive");
}

void Image::set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  std::uint8_t* p = px(x, y);
  p[0] = r;
  p[1] = g;
  p[2] = b;
}

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::ParseError, "cannot write " + path);
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
}

namespace {

// Next header token, skipping whitespace and comments.
std::string ppm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path);
  if (ppm_token(in) != "P6") fail(ErrorCode::ParseError, path + " is not a binary PPM");
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(ppm_token(in));
    h = std::stoi(ppm_token(in));
    maxval = std::stoi(ppm_token(in));
  } catch (const std::exception&) {
    fail(ErrorCode::ParseError, path + ": bad PPM header");
  }
  if (maxval != 255) fail(ErrorCode::ParseError, path + ": only maxval 255 is supported");
  Image img(w, h);
  in.read(reinterpret_cast<char*>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.rgb.size())) fail(ErrorCode::ParseError, path + ": truncated");
  img.source = path;
  return img;
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
  Image out = img;
  Rng rng = make_rng(seed, "image-noise");
  for (auto& v : out.rgb) {
    const double x = v + 255.0 * sigma * gaussian(rng);
    v = static_cast<std::uint8_t>(std::clamp(std::lround(x), 0L, 255L));
  }
  out.source.clear();
  return out;
}

Image translate(const Image& img, int dx, int dy) {
  Image out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const int sx = std::clamp(x - dx, 0, img.width - 1);
      const int sy = std::clamp(y - dy, 0, img.height - 1);
      const std::uint8_t* s = img.px(sx, sy);
      out.set(x, y, s[0], s[1], s[2]);
    }
  }
  return out;
}

}  // namespace noir
