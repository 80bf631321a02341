#pragma once

#include <filesystem>

#include "endoreloc/image.hpp"

namespace endoreloc {

/// Reads an 8-bit PNG; gray and alpha variants are expanded/stripped to RGB.
RgbImage read_png(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace endoreloc
