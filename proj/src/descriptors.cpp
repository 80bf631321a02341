#include "endoreloc/descriptors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "endoreloc/colorspace.hpp"

namespace endoreloc {

namespace {

constexpr std::array<const char*, 7> kFamilyNames = {"MLBP", "MHOG", "SWMLBP", "MLTP",
                                                     "MLBPHOG", "DSIFT", "MLIOP"};

// Clockwise from top-left.
constexpr int kNeighborDx[8] = {-1, 0, 1, 1, 1, 0, -1, -1};
constexpr int kNeighborDy[8] = {-1, -1, -1, 0, 1, 1, 1, 0};

constexpr int kLbpBins = 256;
constexpr int kSiftBins = 128;
constexpr double kLiopRadius = 3.0;

DescriptorConfig with_family(DescriptorConfig cfg, DescriptorFamily f) {
  cfg.family = f;
  return cfg;
}

// Block sizes for a single cell of a non-combined family.
std::vector<std::size_t> cell_blocks(const DescriptorConfig& cfg) {
  switch (cfg.family) {
    case DescriptorFamily::MLBP:
    case DescriptorFamily::SWMLBP: return {kLbpBins};
    case DescriptorFamily::MLTP: return {kLbpBins, kLbpBins};
    case DescriptorFamily::MHOG: return {static_cast<std::size_t>(cfg.hog_bins)};
    case DescriptorFamily::DSIFT: return {kSiftBins};
    case DescriptorFamily::MLIOP: return {factorial(cfg.liop_neighbors)};
    case DescriptorFamily::MLBPHOG: break;
  }
  throw Error("combined family has no single cell layout");
}

struct Rect {
  int x0, y0, x1, y1;
};

std::vector<Rect> level_cells(const DescriptorConfig& cfg, int level, int w, int h) {
  std::vector<Rect> cells;
  if (cfg.family == DescriptorFamily::SWMLBP) {
    const int win = sw_window_at(cfg, level);
    const int stride = sw_stride_at(cfg, level);
    for (int oy : window_origins(h, win, stride))
      for (int ox : window_origins(w, win, stride)) cells.push_back({ox, oy, ox + win, oy + win});
    return cells;
  }
  const auto ex = cell_edges(w, cfg.grid);
  const auto ey = cell_edges(h, cfg.grid);
  for (int cy = 0; cy < cfg.grid; ++cy)
    for (int cx = 0; cx < cfg.grid; ++cx) cells.push_back({ex[cx], ey[cy], ex[cx + 1], ey[cy + 1]});
  return cells;
}

int level_extent(int extent, int level) {
  for (int l = 0; l < level; ++l) extent /= 2;
  return extent;
}

// --- per-pixel maps --------------------------------------------------------

struct Plane {
  int w, h;
  const float* data;
  float at(int x, int y) const {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return data[static_cast<std::size_t>(y) * w + x];
  }
};

std::vector<std::uint16_t> lbp_map(const Plane& p, double threshold, bool lower) {
  std::vector<std::uint16_t> codes(static_cast<std::size_t>(p.w) * p.h);
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) {
      const double c = p.at(x, y);
      int code = 0;
      for (int i = 0; i < 8; ++i) {
        const double n = p.at(x + kNeighborDx[i], y + kNeighborDy[i]);
        const bool bit = lower ? (n <= c - threshold) : (n >= c + threshold);
        if (bit) code |= 1 << i;
      }
      codes[static_cast<std::size_t>(y) * p.w + x] = static_cast<std::uint16_t>(code);
    }
  }
  return codes;
}

double bilinear(const Plane& p, double x, double y) {
  const double fx0 = std::floor(x), fy0 = std::floor(y);
  const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
  const double ax = x - fx0, ay = y - fy0;
  const double top = (1.0 - ax) * p.at(x0, y0) + ax * p.at(x0 + 1, y0);
  const double bottom = (1.0 - ax) * p.at(x0, y0 + 1) + ax * p.at(x0 + 1, y0 + 1);
  return (1.0 - ay) * top + ay * bottom;
}

std::vector<std::uint16_t> liop_map(const Plane& p, int neighbors) {
  std::vector<double> cosv(neighbors), sinv(neighbors);
  for (int k = 0; k < neighbors; ++k) {
    const double a = 2.0 * std::numbers::pi * k / neighbors;
    cosv[k] = kLiopRadius * std::cos(a);
    sinv[k] = kLiopRadius * std::sin(a);
  }
  std::vector<std::size_t> fact(neighbors + 1);
  for (int k = 0; k <= neighbors; ++k) fact[k] = factorial(k);

  std::vector<std::uint16_t> codes(static_cast<std::size_t>(p.w) * p.h);
  std::vector<double> samples(neighbors);
  std::vector<int> order(neighbors);
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) {
      for (int k = 0; k < neighbors; ++k) samples[k] = bilinear(p, x + cosv[k], y + sinv[k]);
      for (int k = 0; k < neighbors; ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return samples[a] < samples[b]; });
      std::size_t index = 0;
      for (int i = 0; i < neighbors; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < neighbors; ++j) smaller += order[j] < order[i];
        index += smaller * fact[neighbors - 1 - i];
      }
      codes[static_cast<std::size_t>(y) * p.w + x] = static_cast<std::uint16_t>(index);
    }
  }
  return codes;
}

struct Gradients {
  std::vector<double> mag, angle;  // angle in [-pi, pi]
};

Gradients gradient_map(const Plane& p) {
  Gradients g;
  const std::size_t n = static_cast<std::size_t>(p.w) * p.h;
  g.mag.resize(n);
  g.angle.resize(n);
  for (int y = 0; y < p.h; ++y) {
    for (int x = 0; x < p.w; ++x) {
      const double gx = static_cast<double>(p.at(x + 1, y)) - p.at(x - 1, y);
      const double gy = static_cast<double>(p.at(x, y + 1)) - p.at(x, y - 1);
      const std::size_t i = static_cast<std::size_t>(y) * p.w + x;
      g.mag[i] = std::sqrt(gx * gx + gy * gy);
      g.angle[i] = std::atan2(gy, gx);
    }
  }
  return g;
}

// --- block writers ----------------------------------------------------------

void normalize_into(std::span<const double> hist, std::vector<float>& out) {
  double sum = 0.0;
  for (double v : hist) sum += v;
  if (sum <= 0.0) {
    out.insert(out.end(), hist.size(), 0.0f);
    return;
  }
  for (double v : hist) out.push_back(static_cast<float>(v / sum));
}

void code_histograms(std::span<const std::uint16_t> codes, int w, const std::vector<Rect>& cells,
                     std::size_t bins, std::vector<float>& out) {
  std::vector<double> hist(bins);
  for (const Rect& r : cells) {
    std::fill(hist.begin(), hist.end(), 0.0);
    for (int y = r.y0; y < r.y1; ++y)
      for (int x = r.x0; x < r.x1; ++x) hist[codes[static_cast<std::size_t>(y) * w + x]] += 1.0;
    normalize_into(hist, out);
  }
}

void hog_histograms(const Gradients& g, int w, const std::vector<Rect>& cells, int bins,
                    std::vector<float>& out) {
  const double bin_width = std::numbers::pi / bins;
  std::vector<double> hist(bins);
  for (const Rect& r : cells) {
    std::fill(hist.begin(), hist.end(), 0.0);
    for (int y = r.y0; y < r.y1; ++y) {
      for (int x = r.x0; x < r.x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double m = g.mag[i];
        if (m == 0.0) continue;
        double theta = g.angle[i];
        if (theta < 0.0) theta += std::numbers::pi;
        if (theta >= std::numbers::pi) theta -= std::numbers::pi;
        const double pos = theta / bin_width - 0.5;
        const double base = std::floor(pos);
        const double frac = pos - base;
        const int b0 = ((static_cast<int>(base) % bins) + bins) % bins;
        const int b1 = (b0 + 1) % bins;
        hist[b0] += (1.0 - frac) * m;
        hist[b1] += frac * m;
      }
    }
    normalize_into(hist, out);
  }
}

void sift_histograms(const Gradients& g, int w, const std::vector<Rect>& cells,
                     std::vector<float>& out) {
  const double bin_width = 2.0 * std::numbers::pi / 8.0;
  std::vector<double> hist(kSiftBins);
  for (const Rect& r : cells) {
    std::fill(hist.begin(), hist.end(), 0.0);
    const int cw = r.x1 - r.x0, ch = r.y1 - r.y0;
    for (int y = r.y0; y < r.y1; ++y) {
      const int sy = (y - r.y0) * 4 / ch;
      for (int x = r.x0; x < r.x1; ++x) {
        const int sx = (x - r.x0) * 4 / cw;
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        const double m = g.mag[i];
        if (m == 0.0) continue;
        double theta = g.angle[i];
        if (theta < 0.0) theta += 2.0 * std::numbers::pi;
        const int b = std::min(7, static_cast<int>(theta / bin_width));
        hist[static_cast<std::size_t>((sy * 4 + sx) * 8 + b)] += m;
      }
    }
    normalize_into(hist, out);
  }
}

void extract_level(const Plane& p, const DescriptorConfig& cfg, int level, std::vector<float>& out) {
  const auto cells = level_cells(cfg, level, p.w, p.h);
  switch (cfg.family) {
    case DescriptorFamily::MLBP:
    case DescriptorFamily::SWMLBP:
      code_histograms(lbp_map(p, 0.0, false), p.w, cells, kLbpBins, out);
      return;
    case DescriptorFamily::MLTP: {
      const auto upper = lbp_map(p, cfg.ltp_threshold, false);
      const auto lower = lbp_map(p, cfg.ltp_threshold, true);
      // Per cell: upper block then lower block.
      for (const Rect& r : cells) {
        const std::vector<Rect> one{r};
        code_histograms(upper, p.w, one, kLbpBins, out);
        code_histograms(lower, p.w, one, kLbpBins, out);
      }
      return;
    }
    case DescriptorFamily::MHOG:
      hog_histograms(gradient_map(p), p.w, cells, cfg.hog_bins, out);
      return;
    case DescriptorFamily::DSIFT:
      sift_histograms(gradient_map(p), p.w, cells, out);
      return;
    case DescriptorFamily::MLIOP:
      code_histograms(liop_map(p, cfg.liop_neighbors), p.w, cells, factorial(cfg.liop_neighbors), out);
      return;
    case DescriptorFamily::MLBPHOG: break;
  }
  throw Error("combined family reached single-family extraction");
}

}  // namespace

std::string to_string(DescriptorFamily family) { return kFamilyNames[static_cast<std::size_t>(family)]; }

DescriptorFamily family_from_string(const std::string& name) {
  std::string upper;
  for (char c : name) {
    if (c == '-' || c == '+' || c == '_') continue;
    upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (upper == "LIOP") upper = "MLIOP";
  if (upper == "MLBPMHOG") upper = "MLBPHOG";
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i)
    if (upper == kFamilyNames[i]) return static_cast<DescriptorFamily>(i);
  throw Error("unknown descriptor family '" + name + "'");
}

std::string DescriptorConfig::canonical() const {
  char ltp[40];
  std::snprintf(ltp, sizeof ltp, "%.17g", ltp_threshold);
  return "family=" + to_string(family) + ";space=" + to_string(space) +
         ";levels=" + std::to_string(pyramid_levels) + ";grid=" + std::to_string(grid) +
         ";sw_window=" + std::to_string(sw_window) + ";sw_stride=" + std::to_string(sw_stride) +
         ";ltp=" + ltp + ";liop=" + std::to_string(liop_neighbors) +
         ";hog=" + std::to_string(hog_bins);
}

std::uint64_t DescriptorConfig::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : canonical()) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

std::string DescriptorConfig::label() const { return to_string(family) + "/" + to_string(space); }

int lbp_code(const Patch3x3& patch) {
  // Scan-order indices of the clockwise neighbors.
  constexpr int kOrder[8] = {0, 1, 2, 5, 8, 7, 6, 3};
  const float center = patch[4];
  int code = 0;
  for (int i = 0; i < 8; ++i)
    if (patch[kOrder[i]] >= center) code |= 1 << i;
  return code;
}

std::size_t factorial(int n) {
  std::size_t f = 1;
  for (int k = 2; k <= n; ++k) f *= static_cast<std::size_t>(k);
  return f;
}

std::vector<int> cell_edges(int extent, int cells) {
  std::vector<int> edges(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i) edges[i] = static_cast<int>(static_cast<long long>(i) * extent / cells);
  return edges;
}

int sw_window_at(const DescriptorConfig& cfg, int level) { return cfg.sw_window >> level; }
int sw_stride_at(const DescriptorConfig& cfg, int level) { return std::max(1, cfg.sw_stride >> level); }

std::vector<int> window_origins(int extent, int window, int stride) {
  std::vector<int> origins;
  for (int o = 0; o + window <= extent; o += stride) origins.push_back(o);
  return origins;
}

void validate(const DescriptorConfig& cfg, int width, int height) {
  if (cfg.pyramid_levels < 1) throw Error("pyramid_levels must be >= 1");
  if (cfg.grid < 1) throw Error("grid must be >= 1");
  if (cfg.hog_bins < 1) throw Error("hog_bins must be >= 1");
  if (cfg.liop_neighbors < 2 || cfg.liop_neighbors > 8) throw Error("liop_neighbors must be in [2, 8]");
  if (!(cfg.ltp_threshold >= 0.0)) throw Error("ltp_threshold must be >= 0");
  if (cfg.sw_stride < 1 || cfg.sw_window < 1) throw Error("sliding window sizes must be positive");
  if (width <= 0 || height <= 0) throw Error("image too small: empty image");

  const auto uses = [&](DescriptorFamily f) {
    return cfg.family == f;
  };
  for (int level = 0; level < cfg.pyramid_levels; ++level) {
    const int w = level_extent(width, level), h = level_extent(height, level);
    if (uses(DescriptorFamily::SWMLBP)) {
      const int win = sw_window_at(cfg, level);
      if (win < 8 || win > w || win > h)
        throw Error("image too small: sliding window of " + std::to_string(win) + " px at level " +
                    std::to_string(level) + " does not fit " + std::to_string(w) + "x" +
                    std::to_string(h));
    } else if (w / cfg.grid < 8 || h / cfg.grid < 8) {
      throw Error("image too small: " + std::to_string(cfg.grid) + "x" + std::to_string(cfg.grid) +
                  " cells at level " + std::to_string(level) + " of " + std::to_string(w) + "x" +
                  std::to_string(h) + " are smaller than 8x8 px");
    }
  }
}

std::vector<std::size_t> block_sizes(const DescriptorConfig& cfg, int channels, int width, int height) {
  if (cfg.family == DescriptorFamily::MLBPHOG) {
    auto a = block_sizes(with_family(cfg, DescriptorFamily::MLBP), channels, width, height);
    const auto b = block_sizes(with_family(cfg, DescriptorFamily::MHOG), channels, width, height);
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }
  const auto per_cell = cell_blocks(cfg);
  std::vector<std::size_t> sizes;
  for (int c = 0; c < channels; ++c) {
    for (int level = 0; level < cfg.pyramid_levels; ++level) {
      std::size_t cells = static_cast<std::size_t>(cfg.grid) * cfg.grid;
      if (cfg.family == DescriptorFamily::SWMLBP) {
        if (width <= 0 || height <= 0) throw Error("SWMLBP length needs the image size");
        const int w = level_extent(width, level), h = level_extent(height, level);
        const int win = sw_window_at(cfg, level), stride = sw_stride_at(cfg, level);
        cells = window_origins(w, win, stride).size() * window_origins(h, win, stride).size();
      }
      for (std::size_t i = 0; i < cells; ++i) sizes.insert(sizes.end(), per_cell.begin(), per_cell.end());
    }
  }
  return sizes;
}

std::size_t vector_length(const DescriptorConfig& cfg, int channels, int width, int height) {
  std::size_t n = 0;
  for (std::size_t b : block_sizes(cfg, channels, width, height)) n += b;
  return n;
}

PlanarImage downsample2(const PlanarImage& image) {
  PlanarImage out(image.width / 2, image.height / 2, image.channels(), image.space);
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const float sum = image.at(c, 2 * x, 2 * y) + image.at(c, 2 * x + 1, 2 * y) +
                          image.at(c, 2 * x, 2 * y + 1) + image.at(c, 2 * x + 1, 2 * y + 1);
        out.at(c, x, y) = sum * 0.25f;
      }
    }
  }
  return out;
}

std::vector<PlanarImage> build_pyramid(const PlanarImage& image, int levels) {
  std::vector<PlanarImage> pyramid;
  pyramid.reserve(static_cast<std::size_t>(levels));
  pyramid.push_back(image);
  for (int l = 1; l < levels; ++l) pyramid.push_back(downsample2(pyramid.back()));
  return pyramid;
}

DescriptorVector extract(const PlanarImage& image, const DescriptorConfig& cfg) {
  if (image.channels() < 1 || image.channels() > 3) throw Error("descriptor input needs 1-3 planes");
  for (const auto& plane : image.planes) {
    if (plane.size() != static_cast<std::size_t>(image.width) * image.height)
      throw Error("descriptor input planes have inconsistent sizes");
  }
  DescriptorVector result;
  result.config_fingerprint = cfg.fingerprint();

  if (cfg.family == DescriptorFamily::MLBPHOG) {
    auto lbp = extract(image, with_family(cfg, DescriptorFamily::MLBP));
    const auto hog = extract(image, with_family(cfg, DescriptorFamily::MHOG));
    result.values = std::move(lbp.values);
    result.values.insert(result.values.end(), hog.values.begin(), hog.values.end());
    return result;
  }

  validate(cfg, image.width, image.height);
  result.values.reserve(vector_length(cfg, image.channels(), image.width, image.height));
  const auto pyramid = build_pyramid(image, cfg.pyramid_levels);
  for (int c = 0; c < image.channels(); ++c) {
    for (int level = 0; level < cfg.pyramid_levels; ++level) {
      const PlanarImage& img = pyramid[level];
      const Plane plane{img.width, img.height, img.planes[c].data()};
      extract_level(plane, cfg, level, result.values);
    }
  }
  return result;
}

DescriptorVector describe(const RgbImage& image, const DescriptorConfig& cfg) {
  return extract(convert(image, cfg.space), cfg);
}

// --- cache file -------------------------------------------------------------

namespace {

template <class T>
void put(std::ostream& os, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated descriptor cache");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

constexpr char kCacheMagic[4] = {'E', 'R', 'D', 'C'};
constexpr std::uint32_t kCacheVersion = 1;

}  // namespace

void write_descriptor_cache(const std::filesystem::path& path, const DescriptorCacheFile& cache) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write descriptor cache '" + path.string() + "'");
  os.write(kCacheMagic, 4);
  put<std::uint32_t>(os, kCacheVersion);
  put<std::uint64_t>(os, cache.fingerprint);
  put<std::uint32_t>(os, cache.length);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(cache.vectors.size()));
  for (const auto& [id, values] : cache.vectors) {
    if (values.size() != cache.length) throw Error("descriptor cache record has the wrong length");
    put<std::int64_t>(os, id);
    for (float v : values) put<float>(os, v);
  }
  if (!os) throw Error("I/O error writing descriptor cache");
}

DescriptorCacheFile read_descriptor_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open descriptor cache '" + path.string() + "'");
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kCacheMagic))
    throw Error("not a descriptor cache file");
  if (get<std::uint32_t>(is) != kCacheVersion) throw Error("unsupported descriptor cache version");
  DescriptorCacheFile cache;
  cache.fingerprint = get<std::uint64_t>(is);
  cache.length = get<std::uint32_t>(is);
  const auto count = get<std::uint32_t>(is);
  for (std::uint32_t r = 0; r < count; ++r) {
    const auto id = get<std::int64_t>(is);
    std::vector<float> values(cache.length);
    for (auto& v : values) v = get<float>(is);
    cache.vectors.emplace(id, std::move(values));
  }
  return cache;
}

}  // namespace endoreloc
