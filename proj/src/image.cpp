#include "endoreloc/image.hpp"

#include <array>

namespace endoreloc {

RgbImage::RgbImage(int w, int h, std::uint8_t fill)
    : width(w), height(h),
      pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill) {
  if (w < 0 || h < 0) throw Error("negative image dimensions");
}

PlanarImage::PlanarImage(int w, int h, int channels, ColorSpace tag)
    : width(w), height(h), space(tag),
      planes(static_cast<std::size_t>(channels),
             std::vector<float>(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0f)) {}

namespace {
constexpr std::array<const char*, 6> kSpaceNames = {"rgb", "hsv", "gs", "norm", "log", "opp"};
}

std::string to_string(ColorSpace space) {
  return kSpaceNames[static_cast<std::size_t>(space)];
}

ColorSpace color_space_from_string(const std::string& name) {
  std::string lower;
  for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  for (std::size_t i = 0; i < kSpaceNames.size(); ++i) {
    if (lower == kSpaceNames[i]) return static_cast<ColorSpace>(i);
  }
  throw Error("unknown color space '" + name + "'");
}

std::uint64_t checksum(const RgbImage& image) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 1099511628211ULL;
  };
  for (int shift = 0; shift < 32; shift += 8) mix(static_cast<std::uint8_t>(image.width >> shift));
  for (int shift = 0; shift < 32; shift += 8) mix(static_cast<std::uint8_t>(image.height >> shift));
  for (std::uint8_t b : image.pixels) mix(b);
  return h;
}

}  // namespace endoreloc
