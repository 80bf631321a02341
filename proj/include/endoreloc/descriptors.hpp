#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "endoreloc/image.hpp"

namespace endoreloc {

enum class DescriptorFamily { MLBP, MHOG, SWMLBP, MLTP, MLBPHOG, DSIFT, MLIOP };

inline constexpr DescriptorFamily kAllFamilies[] = {
    DescriptorFamily::MLBP,    DescriptorFamily::MHOG,  DescriptorFamily::SWMLBP,
    DescriptorFamily::MLTP,    DescriptorFamily::MLBPHOG, DescriptorFamily::DSIFT,
    DescriptorFamily::MLIOP};

std::string to_string(DescriptorFamily family);
DescriptorFamily family_from_string(const std::string& name);

struct DescriptorConfig {
  DescriptorFamily family = DescriptorFamily::MLBP;
  ColorSpace space = ColorSpace::GS;
  int pyramid_levels = 3;
  int grid = 4;                 // cells per side per level
  int sw_window = 64;           // SWMLBP window at level 0, halves per level
  int sw_stride = 32;
  double ltp_threshold = 5.0 / 255.0;
  int liop_neighbors = 4;
  int hog_bins = 9;

  /// FNV-1a hash over the canonical text form; stable across runs and platforms.
  std::uint64_t fingerprint() const;
  std::string canonical() const;
  std::string label() const;  // e.g. "MLBP/hsv"

  bool operator==(const DescriptorConfig&) const = default;
};

struct DescriptorVector {
  std::vector<float> values;
  std::uint64_t config_fingerprint = 0;

  std::size_t length() const { return values.size(); }
};

/// 3x3 neighborhood in row-major scan order; index 4 is the center.
using Patch3x3 = std::array<float, 9>;

/// Raw 8-neighbor LBP code. Neighbors are visited clockwise from the top-left
/// one; bit i is set iff neighbor i >= center.
int lbp_code(const Patch3x3& patch);

/// Throws Error("image too small ...") when the configuration does not fit a
/// width x height image (every grid cell and sliding window must be >= 8x8 px).
void validate(const DescriptorConfig& cfg, int width, int height);

/// Length of extract() output. SWMLBP window counts depend on the image size,
/// so width/height are required for that family and ignored otherwise.
std::size_t vector_length(const DescriptorConfig& cfg, int channels, int width = 0, int height = 0);

/// Sizes of every normalized block of an extract() output, in output order.
std::vector<std::size_t> block_sizes(const DescriptorConfig& cfg, int channels, int width, int height);

/// Runs the configured descriptor on every plane of an already converted image.
/// Output order: channel-major, then pyramid level, then cell (row-major),
/// each block L1-normalized.
DescriptorVector extract(const PlanarImage& image, const DescriptorConfig& cfg);

/// Converts to cfg.space, then extract().
DescriptorVector describe(const RgbImage& image, const DescriptorConfig& cfg);

// Scale-space pieces, exposed for tests.
PlanarImage downsample2(const PlanarImage& image);
std::vector<PlanarImage> build_pyramid(const PlanarImage& image, int levels);

/// Cell boundaries along one axis: [edges[i], edges[i+1]).
std::vector<int> cell_edges(int extent, int cells);

/// Sliding window origins along one axis for the given level.
std::vector<int> window_origins(int extent, int window, int stride);
int sw_window_at(const DescriptorConfig& cfg, int level);
int sw_stride_at(const DescriptorConfig& cfg, int level);

std::size_t factorial(int n);

/// Binary per-frame cache: little-endian, header "ERDC", version, fingerprint,
/// vector length, record count; records are (int64 frame_id, float32[length]).
struct DescriptorCacheFile {
  std::uint64_t fingerprint = 0;
  std::uint32_t length = 0;
  std::map<std::int64_t, std::vector<float>> vectors;
};

void write_descriptor_cache(const std::filesystem::path& path, const DescriptorCacheFile& cache);
DescriptorCacheFile read_descriptor_cache(const std::filesystem::path& path);

}  // namespace endoreloc
