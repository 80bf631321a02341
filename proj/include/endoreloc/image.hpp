#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace endoreloc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// 8-bit interleaved RGB raster, row-major.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RgbImage() = default;
  RgbImage(int w, int h, std::uint8_t fill = 0);

  bool empty() const { return width == 0 || height == 0; }

  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }

  bool operator==(const RgbImage&) const = default;
};

enum class ColorSpace { RGB, HSV, GS, NORM, LOG, OPP };

inline constexpr ColorSpace kAllColorSpaces[] = {
    ColorSpace::RGB, ColorSpace::HSV, ColorSpace::GS,
    ColorSpace::NORM, ColorSpace::LOG, ColorSpace::OPP};

std::string to_string(ColorSpace space);
ColorSpace color_space_from_string(const std::string& name);

/// Float raster with 1-3 planes sharing one size.
struct PlanarImage {
  int width = 0;
  int height = 0;
  ColorSpace space = ColorSpace::GS;
  std::vector<std::vector<float>> planes;

  PlanarImage() = default;
  PlanarImage(int w, int h, int channels, ColorSpace tag);

  int channels() const { return static_cast<int>(planes.size()); }

  float at(int c, int x, int y) const {
    return planes[c][static_cast<std::size_t>(y) * width + x];
  }
  float& at(int c, int x, int y) {
    return planes[c][static_cast<std::size_t>(y) * width + x];
  }
};

/// FNV-1a over dimensions and pixel bytes.
std::uint64_t checksum(const RgbImage& image);

}  // namespace endoreloc
