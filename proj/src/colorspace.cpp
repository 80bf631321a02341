#include "endoreloc/colorspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace endoreloc {

namespace {

void require_rgb(const RgbImage& rgb) {
  if (rgb.empty()) throw Error("color conversion of an empty image");
  if (rgb.pixels.size() != static_cast<std::size_t>(rgb.width) * rgb.height * 3)
    throw Error("malformed RGB raster");
}

template <class PixelFn>
PlanarImage map_pixels(const RgbImage& rgb, int channels, ColorSpace tag, PixelFn fn) {
  require_rgb(rgb);
  PlanarImage out(rgb.width, rgb.height, channels, tag);
  const std::size_t n = static_cast<std::size_t>(rgb.width) * rgb.height;
  std::array<float, 3> px{};
  for (std::size_t i = 0; i < n; ++i) {
    fn(rgb.pixels[3 * i], rgb.pixels[3 * i + 1], rgb.pixels[3 * i + 2], px);
    for (int c = 0; c < channels; ++c) out.planes[c][i] = px[c];
  }
  return out;
}

}  // namespace

int channel_count(ColorSpace space) { return space == ColorSpace::GS ? 1 : 3; }

PlanarImage to_rgb(const RgbImage& rgb) {
  return map_pixels(rgb, 3, ColorSpace::RGB, [](int r, int g, int b, std::array<float, 3>& o) {
    o = {r / 255.0f, g / 255.0f, b / 255.0f};
  });
}

PlanarImage to_grayscale(const RgbImage& rgb) {
  return map_pixels(rgb, 1, ColorSpace::GS, [](int r, int g, int b, std::array<float, 3>& o) {
    o[0] = static_cast<float>((0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
  });
}

PlanarImage to_hsv(const RgbImage& rgb) {
  return map_pixels(rgb, 3, ColorSpace::HSV, [](int r8, int g8, int b8, std::array<float, 3>& o) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    const double mx = std::max({r, g, b});
    const double mn = std::min({r, g, b});
    const double delta = mx - mn;
    double h = 0.0;
    if (delta > 0.0) {
      if (mx == r) {
        h = 60.0 * std::fmod((g - b) / delta, 6.0);
      } else if (mx == g) {
        h = 60.0 * ((b - r) / delta + 2.0);
      } else {
        h = 60.0 * ((r - g) / delta + 4.0);
      }
      if (h < 0.0) h += 360.0;
    }
    const double s = mx > 0.0 ? delta / mx : 0.0;
    o = {static_cast<float>(h / 360.0), static_cast<float>(s), static_cast<float>(mx)};
  });
}

PlanarImage to_normalized_rgb(const RgbImage& rgb) {
  return map_pixels(rgb, 3, ColorSpace::NORM, [](int r, int g, int b, std::array<float, 3>& o) {
    const int sum = r + g + b;
    if (sum == 0) {
      o = {1.0f / 3.0f, 1.0f / 3.0f, 1.0f / 3.0f};
      return;
    }
    const double inv = 1.0 / sum;
    o = {static_cast<float>(r * inv), static_cast<float>(g * inv), static_cast<float>(b * inv)};
  });
}

PlanarImage to_log(const RgbImage& rgb) {
  static const std::array<float, 256> table = [] {
    std::array<float, 256> t{};
    const double denom = std::log(256.0);
    for (int i = 0; i < 256; ++i) t[i] = static_cast<float>(std::log1p(static_cast<double>(i)) / denom);
    return t;
  }();
  return map_pixels(rgb, 3, ColorSpace::LOG, [](int r, int g, int b, std::array<float, 3>& o) {
    o = {table[r], table[g], table[b]};
  });
}

PlanarImage to_opponent(const RgbImage& rgb) {
  return map_pixels(rgb, 3, ColorSpace::OPP, [](int r8, int g8, int b8, std::array<float, 3>& o) {
    const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    o = {static_cast<float>((r - g) / std::sqrt(2.0)),
         static_cast<float>((r + g - 2.0 * b) / std::sqrt(6.0)),
         static_cast<float>((r + g + b) / std::sqrt(3.0))};
  });
}

PlanarImage convert(const RgbImage& rgb, ColorSpace space) {
  switch (space) {
    case ColorSpace::RGB: return to_rgb(rgb);
    case ColorSpace::HSV: return to_hsv(rgb);
    case ColorSpace::GS: return to_grayscale(rgb);
    case ColorSpace::NORM: return to_normalized_rgb(rgb);
    case ColorSpace::LOG: return to_log(rgb);
    case ColorSpace::OPP: return to_opponent(rgb);
  }
  throw Error("unknown color space");
}

}  // namespace endoreloc
