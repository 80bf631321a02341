#pragma once

#include "endoreloc/image.hpp"

namespace endoreloc {

// Pixel-local conversions of an 8-bit RGB raster. Sample ranges:
//   RGB, HSV, GS, NORM, LOG : [0, 1]
//   OPP : O1 in [-1/sqrt2, 1/sqrt2], O2 in [-2/sqrt6, 2/sqrt6], O3 in [0, sqrt3]

PlanarImage to_rgb(const RgbImage& rgb);

/// Luma (0.299R + 0.587G + 0.114B) / 255.
PlanarImage to_grayscale(const RgbImage& rgb);

/// Hexcone HSV with hue as degrees/360. Hue is a linear value here, not circular.
PlanarImage to_hsv(const RgbImage& rgb);

/// Chromaticity (R,G,B)/(R+G+B); black maps to (1/3, 1/3, 1/3).
PlanarImage to_normalized_rgb(const RgbImage& rgb);

/// ln(1 + I) / ln(256) per channel.
PlanarImage to_log(const RgbImage& rgb);

PlanarImage to_opponent(const RgbImage& rgb);

PlanarImage convert(const RgbImage& rgb, ColorSpace space);

int channel_count(ColorSpace space);

}  // namespace endoreloc
