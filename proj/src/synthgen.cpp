#include "endoreloc/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

namespace endoreloc {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double lattice(std::uint64_t seed, int octave, std::int64_t i, std::int64_t j) {
  std::uint64_t h = splitmix(seed ^ (static_cast<std::uint64_t>(octave) * 0x632be59bd9b4e019ULL));
  h = splitmix(h ^ static_cast<std::uint64_t>(i));
  h = splitmix(h ^ (static_cast<std::uint64_t>(j) * 0x8cb92ba72f3d8dd7ULL));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

struct NoiseLayer {
  double cell_mm;
  int angular_cells;
  int octaves;
  double persistence;
};

// Fractal value noise, periodic in angle; returns [0, 1].
double value_noise(std::uint64_t seed, const NoiseLayer& layer, double axial, double angle) {
  double theta = std::fmod(angle, kTwoPi);
  if (theta < 0.0) theta += kTwoPi;
  double sum = 0.0, norm = 0.0, amp = 1.0;
  for (int o = 0; o < layer.octaves; ++o) {
    const int cells = layer.angular_cells << o;
    const double v = axial / (layer.cell_mm / static_cast<double>(1 << o));
    const double u = theta / kTwoPi * cells;
    const double fv = std::floor(v), fu = std::floor(u);
    const auto i0 = static_cast<std::int64_t>(fv);
    const auto j0 = static_cast<std::int64_t>(fu) % cells;
    const auto j1 = (j0 + 1) % cells;
    const double tv = fade(v - fv), tu = fade(u - fu);
    const double a = lattice(seed, o, i0, j0), b = lattice(seed, o, i0, j1);
    const double c = lattice(seed, o, i0 + 1, j0), d = lattice(seed, o, i0 + 1, j1);
    const double top = a + (b - a) * tu;
    const double bottom = c + (d - c) * tu;
    sum += amp * (top + (bottom - top) * tv);
    norm += amp;
    amp *= layer.persistence;
  }
  return sum / norm;
}

constexpr NoiseLayer kNbiBase{2.0, 32, 3, 0.5};
constexpr NoiseLayer kNbiVessels{3.0, 20, 2, 0.45};
constexpr NoiseLayer kWlBase{4.0, 16, 3, 0.55};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v * 255.0), 0L, 255L));
}

}  // namespace

TubeWorld::TubeWorld(std::uint64_t s, Modality m) : modality(m), seed(s) {}

double TubeWorld::texture(double axial_mm, double angle) const {
  if (modality == Modality::NBI) {
    const double base = value_noise(seed, kNbiBase, axial_mm, angle);
    const double n = value_noise(seed ^ 0x5bd1e995ULL, kNbiVessels, axial_mm, angle);
    const double ridge = std::pow(1.0 - std::abs(2.0 * n - 1.0), 6.0);
    return std::clamp(0.6 * base + 0.55 * ridge - 0.05, 0.0, 1.0);
  }
  return value_noise(seed, kWlBase, axial_mm, angle);
}

std::array<double, 3> TubeWorld::palette(double t) const {
  // NBI: teal mucosa to brown vessels; WL: pale pink to deep red.
  const std::array<double, 3> lo = modality == Modality::NBI ? std::array<double, 3>{0.30, 0.55, 0.50}
                                                               : std::array<double, 3>{0.95, 0.62, 0.55};
  const std::array<double, 3> hi = modality == Modality::NBI ? std::array<double, 3>{0.55, 0.30, 0.18}
                                                               : std::array<double, 3>{0.55, 0.16, 0.14};
  return {lo[0] + (hi[0] - lo[0]) * t, lo[1] + (hi[1] - lo[1]) * t, lo[2] + (hi[2] - lo[2]) * t};
}

double TubeWorld::dominant_period_mm() const {
  return modality == Modality::NBI ? kNbiBase.cell_mm * 2.0 : kWlBase.cell_mm * 2.0;
}

std::string to_string(Degradation d) {
  switch (d) {
    case Degradation::None: return "none";
    case Degradation::Blur: return "blur";
    case Degradation::Contact: return "contact";
    case Degradation::Motion: return "motion";
    case Degradation::Fluid: return "fluid";
  }
  return "none";
}

Degradation degradation_from_string(const std::string& s) {
  for (Degradation d : {Degradation::None, Degradation::Blur, Degradation::Contact, Degradation::Motion,
                        Degradation::Fluid})
    if (to_string(d) == s) return d;
  throw Error("unknown degradation '" + s + "'");
}

namespace {

// Separable Gaussian over an interleaved 3-channel buffer, edge clamped.
void blur_buffer(std::vector<double>& buf, int w, int h, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) sum += kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  for (double& k : kernel) k /= sum;

  std::vector<double> tmp(buf.size());
  auto idx = [w](int x, int y, int ch) { return (static_cast<std::size_t>(y) * w + x) * 3 + ch; };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * buf[idx(std::clamp(x + k, 0, w - 1), y, ch)];
        tmp[idx(x, y, ch)] = acc;
      }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) acc += kernel[k + radius] * tmp[idx(x, std::clamp(y + k, 0, h - 1), ch)];
        buf[idx(x, y, ch)] = acc;
      }
}

}  // namespace

RgbImage render(const TubeWorld& world, const CameraSample& cam, const RenderOptions& options) {
  const int size = options.size;
  if (size < 32) throw Error("render size must be >= 32");
  const double c = 0.5 * (size - 1);
  const double f = options.focal_fraction * size;
  const double rf = world.radius_mm * f;
  const double rho_max = std::sqrt(2.0) * 0.5 * size;
  const double near_mm = rf / rho_max;
  const int ss = std::max(1, options.supersample);
  const double inv = 1.0 / (ss * ss);
  const double fov_radius = 0.5 * size - 1.0;

  std::vector<double> buf(static_cast<std::size_t>(size) * size * 3, 0.0);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double* acc = &buf[(static_cast<std::size_t>(y) * size + x) * 3];
      for (int sy = 0; sy < ss; ++sy) {
        for (int sx = 0; sx < ss; ++sx) {
          const double u = x + (sx + 0.5) / ss - 0.5 - c;
          const double v = y + (sy + 0.5) / ss - 0.5 - c;
          const double rho = std::hypot(u, v);
          if (rho < 1e-9) continue;
          const double ahead = rf / rho;
          const double light = std::exp(-(ahead - near_mm) / options.falloff_mm);
          if (light < 1e-4) continue;
          const double t = world.texture(cam.depth_mm + ahead, std::atan2(v, u) + cam.roll);
          const auto rgb = world.palette(t);
          for (int ch = 0; ch < 3; ++ch) acc[ch] += std::min(1.0, light) * rgb[ch] * inv;
        }
      }
    }
  }
  if (options.optics_blur_px > 0.0) blur_buffer(buf, size, size, options.optics_blur_px);

  RgbImage img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double edge = std::clamp((fov_radius - std::hypot(x - c, y - c)) / options.fov_ramp_px, 0.0, 1.0);
      const double mask = edge * edge * (3.0 - 2.0 * edge);
      const double* px = &buf[(static_cast<std::size_t>(y) * size + x) * 3];
      std::uint8_t* p = img.at(x, y);
      for (int ch = 0; ch < 3; ++ch) p[ch] = to_byte(px[ch] * mask);
    }
  }
  apply_degradation(img, cam.degradation, cam.noise_seed);
  return img;
}

RgbImage gaussian_blur(const RgbImage& image, double sigma) {
  std::vector<double> buf(image.pixels.begin(), image.pixels.end());
  blur_buffer(buf, image.width, image.height, sigma);
  RgbImage out(image.width, image.height);
  for (std::size_t i = 0; i < buf.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(buf[i]), 0L, 255L));
  return out;
}

RgbImage motion_blur(const RgbImage& image, int length, double direction) {
  const int w = image.width, h = image.height;
  const double dx = std::cos(direction), dy = std::sin(direction);
  RgbImage out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc[3] = {0.0, 0.0, 0.0};
      for (int k = 0; k < length; ++k) {
        const double t = k - 0.5 * (length - 1);
        const double sx = std::clamp(x + t * dx, 0.0, w - 1.0), sy = std::clamp(y + t * dy, 0.0, h - 1.0);
        const int x0 = std::min(static_cast<int>(sx), w - 1), y0 = std::min(static_cast<int>(sy), h - 1);
        const int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        const double ax = sx - x0, ay = sy - y0;
        for (int ch = 0; ch < 3; ++ch) {
          const double top = (1 - ax) * image.at(x0, y0)[ch] + ax * image.at(x1, y0)[ch];
          const double bot = (1 - ax) * image.at(x0, y1)[ch] + ax * image.at(x1, y1)[ch];
          acc[ch] += (1 - ay) * top + ay * bot;
        }
      }
      for (int ch = 0; ch < 3; ++ch)
        out.at(x, y)[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(acc[ch] / length), 0L, 255L));
    }
  return out;
}

namespace {

// Pixels whose field value is within the lowest `fraction` of all values.
std::vector<bool> lowest_fraction(const std::vector<double>& field, double fraction) {
  std::vector<double> sorted = field;
  const auto k = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(field.size())));
  std::vector<bool> mask(field.size(), false);
  if (k == 0) return mask;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  const double threshold = sorted[k - 1];
  for (std::size_t i = 0; i < field.size(); ++i) mask[i] = field[i] <= threshold;
  return mask;
}

}  // namespace

void apply_degradation(RgbImage& image, Degradation d, std::uint64_t seed) {
  if (d == Degradation::None) return;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int w = image.width, h = image.height;
  const NoiseLayer speckle{6.0, 8, 2, 0.5};  // in pixels, used for gentle shading

  switch (d) {
    case Degradation::Blur:
      image = gaussian_blur(image, 6.0);
      return;
    case Degradation::Motion:
      image = motion_blur(image, 15, unit(rng) * std::numbers::pi);
      return;
    case Degradation::Contact: {
      const double cx = w * (0.3 + 0.4 * unit(rng)), cy = h * (0.3 + 0.4 * unit(rng));
      const double stretch = 0.7 + 0.6 * unit(rng);
      std::vector<double> field(static_cast<std::size_t>(w) * h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) field[static_cast<std::size_t>(y) * w + x] = std::hypot((x - cx) * stretch, y - cy);
      const auto mask = lowest_fraction(field, 0.70);
      const std::uint64_t shade_seed = rng();
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
          const double s = value_noise(shade_seed, speckle, y, x * kTwoPi / w) - 0.5;
          std::uint8_t* p = image.at(x, y);
          p[0] = to_byte(0.78 + 0.03 * s);
          p[1] = to_byte(0.22 + 0.02 * s);
          p[2] = to_byte(0.20 + 0.02 * s);
        }
      return;
    }
    case Degradation::Fluid: {
      const int blobs = 5 + static_cast<int>(unit(rng) * 4);
      std::vector<std::array<double, 3>> centers;
      for (int k = 0; k < blobs; ++k) centers.push_back({unit(rng) * w, unit(rng) * h, 0.08 * w + 0.12 * w * unit(rng)});
      std::vector<double> field(static_cast<std::size_t>(w) * h);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          double v = 0.0;
          for (const auto& b : centers) v += std::exp(-0.5 * (std::pow(x - b[0], 2) + std::pow(y - b[1], 2)) / (b[2] * b[2]));
          field[static_cast<std::size_t>(y) * w + x] = -v;
        }
      const auto mask = lowest_fraction(field, 0.40);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          if (!mask[static_cast<std::size_t>(y) * w + x]) continue;
          std::uint8_t* p = image.at(x, y);
          const double sheen[3] = {0.88, 0.90, 0.92};
          for (int ch = 0; ch < 3; ++ch) p[ch] = to_byte(0.15 * p[ch] / 255.0 + 0.85 * sheen[ch]);
        }
      return;
    }
    case Degradation::None: return;
  }
}

// --- ground truth ------------------------------------------------------------

double GroundTruth::cost(const FrameTruth& q, const FrameTruth& d) const {
  return std::abs(q.depth_mm - d.depth_mm) + lambda_mm_per_rad * std::abs(wrap_angle(d.roll - q.roll));
}

const FrameTruth& GroundTruth::query_truth(std::int64_t frame_id) const {
  for (const auto& f : query)
    if (f.frame_id == frame_id) return f;
  throw Error("no ground truth for query frame " + std::to_string(frame_id));
}

const FrameTruth& GroundTruth::database_truth(std::int64_t frame_id) const {
  for (const auto& f : database)
    if (f.frame_id == frame_id) return f;
  throw Error("no ground truth for database frame " + std::to_string(frame_id));
}

std::int64_t GroundTruth::best_match(std::int64_t query_frame) const {
  const FrameTruth& q = query_truth(query_frame);
  double best = std::numeric_limits<double>::infinity();
  std::int64_t id = -1;
  for (const auto& d : database) {
    if (!d.informative()) continue;
    const double c = cost(q, d);
    if (c < best || (c == best && d.frame_id < id)) {
      best = c;
      id = d.frame_id;
    }
  }
  if (id < 0) throw Error("ground truth has no informative database frame");
  return id;
}

int GroundTruth::score(std::int64_t query_frame, std::int64_t database_frame) const {
  const FrameTruth& d = database_truth(database_frame);
  if (!d.informative()) return 0;
  if (best_match(query_frame) == database_frame) return 2;
  return cost(query_truth(query_frame), d) <= partial_band_mm ? 1 : 0;
}

GroundTruth GroundTruth::swapped() const {
  GroundTruth s = *this;
  std::swap(s.query_id, s.database_id);
  std::swap(s.query, s.database);
  return s;
}

GenerateOptions GenerateOptions::noiseless() {
  GenerateOptions o;
  o.ui_fraction = 0.0;
  o.roll_drift = 0.0;
  o.roll_jitter = 0.0;
  o.landmark_noise_mm = 0.0;
  return o;
}

std::vector<Landmark> default_landmarks() {
  return {{"sternal_notch", {0.0, 60.0, -30.0}},  {"xiphoid", {0.0, 70.0, 260.0}},
          {"left_clavicle", {-90.0, 50.0, -20.0}}, {"right_clavicle", {90.0, 50.0, -20.0}},
          {"left_costal", {-110.0, 40.0, 220.0}},  {"right_costal", {110.0, 40.0, 220.0}}};
}

namespace {

struct Trajectory {
  std::vector<FrameTruth> truth;
  std::vector<double> tracked_depth;
};

Trajectory sample_trajectory(std::mt19937_64& rng, int n_frames, double em_sigma, const GenerateOptions& o) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double spacing = o.length_mm / n_frames;
  const double offset = (unit(rng) - 0.5) * spacing;
  const double roll0 = (unit(rng) * 2.0 - 1.0) * std::numbers::pi;
  const double period = 150.0 + 150.0 * unit(rng);
  const double phase = unit(rng) * kTwoPi;

  Trajectory t;
  for (int i = 0; i < n_frames; ++i) {
    FrameTruth f;
    f.frame_id = i;
    const double jitter = (unit(rng) * 2.0 - 1.0) * o.depth_jitter * spacing;
    f.depth_mm = std::clamp((i + 0.5) * spacing + offset + jitter, 0.0, o.length_mm);
    f.roll = wrap_angle(roll0 + o.roll_drift * std::sin(kTwoPi * f.depth_mm / period + phase) +
                        o.roll_jitter * gauss(rng));
    t.truth.push_back(f);
    t.tracked_depth.push_back(f.depth_mm + em_sigma * gauss(rng));
  }

  if (o.ui_fraction > 0.0) {
    const auto n_ui = static_cast<std::size_t>(std::lround(o.ui_fraction * n_frames));
    std::vector<std::size_t> order(static_cast<std::size_t>(n_frames));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    constexpr Degradation kinds[] = {Degradation::Blur, Degradation::Contact, Degradation::Motion,
                                     Degradation::Fluid};
    for (std::size_t k = 0; k < n_ui; ++k) t.truth[order[k]].degradation = kinds[k % 4];
  }
  return t;
}

Intervention build_intervention(const TubeWorld& world, const Trajectory& traj, const std::string& id,
                                const std::string& subject, const RigidTransform& tracker_from_tube,
                                std::mt19937_64& rng, const GenerateOptions& o) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Intervention iv;
  iv.intervention_id = id;
  iv.subject_id = subject;
  iv.modality = o.modality;
  for (const auto& lm : default_landmarks()) {
    const Eigen::Vector3d noise(gauss(rng), gauss(rng), gauss(rng));
    iv.landmarks.push_back({lm.name, tracker_from_tube.apply(lm.position) + o.landmark_noise_mm * noise});
  }
  const std::uint64_t frame_seed_base = rng();
  for (std::size_t i = 0; i < traj.truth.size(); ++i) {
    const FrameTruth& ft = traj.truth[i];
    Frame f;
    f.frame_id = ft.frame_id;
    f.modality = o.modality;
    CameraSample cam{ft.depth_mm, ft.roll, ft.degradation, splitmix(frame_seed_base + i)};
    f.image = render(world, cam, o.render);
    Pose tube_pose;
    tube_pose.position = Eigen::Vector3d(0.0, 0.0, traj.tracked_depth[i]);
    tube_pose.orientation = Eigen::Quaterniond(Eigen::AngleAxisd(ft.roll, Eigen::Vector3d::UnitZ()));
    tube_pose.timestamp = static_cast<double>(i) * o.frame_interval_s;
    f.pose = tracker_from_tube.apply(tube_pose);
    f.label = ft.informative() ? FrameLabel::Informative : FrameLabel::Uninformative;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%05lld.png", static_cast<long long>(ft.frame_id));
    f.image_file = name;
    iv.frames.push_back(std::move(f));
  }
  return iv;
}

RigidTransform random_rigid(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-200.0, 200.0);
  RigidTransform t;
  t.rotation = Eigen::Quaterniond(gauss(rng), gauss(rng), gauss(rng), gauss(rng)).normalized();
  t.translation = Eigen::Vector3d(shift(rng), shift(rng), shift(rng));
  return t;
}

}  // namespace

SyntheticPair generate_pair(std::uint64_t seed, int n_frames, double em_noise_sigma_mm, const GenerateOptions& options) {
  if (n_frames < 20) throw Error("generate_pair needs at least 20 frames");
  std::mt19937_64 rng(splitmix(seed));
  TubeWorld world(splitmix(seed ^ 0xa5a5a5a5ULL), options.modality);
  world.radius_mm = options.radius_mm;
  world.length_mm = options.length_mm;

  const Trajectory ta = sample_trajectory(rng, n_frames, em_noise_sigma_mm, options);
  const Trajectory tb = sample_trajectory(rng, n_frames, em_noise_sigma_mm, options);

  SyntheticPair pair;
  pair.b_from_tube = random_rigid(rng);
  const std::string subject = "synth-" + std::to_string(seed);
  pair.a = build_intervention(world, ta, subject + "-A", subject, RigidTransform::identity(), rng, options);
  pair.b = build_intervention(world, tb, subject + "-B", subject, pair.b_from_tube, rng, options);

  pair.truth.query_id = pair.a.intervention_id;
  pair.truth.database_id = pair.b.intervention_id;
  pair.truth.query = ta.truth;
  pair.truth.database = tb.truth;
  pair.truth.lambda_mm_per_rad = options.lambda_mm_per_rad;
  pair.truth.partial_band_mm = options.partial_band_mm;
  return pair;
}

Intervention generate_intervention(std::uint64_t seed, int n_frames, const GenerateOptions& options) {
  if (n_frames < 1) throw Error("generate_intervention needs frames");
  std::mt19937_64 rng(splitmix(seed ^ 0x1234567ULL));
  TubeWorld world(splitmix(seed ^ 0x7777ULL), options.modality);
  world.radius_mm = options.radius_mm;
  world.length_mm = options.length_mm;
  const Trajectory t = sample_trajectory(rng, n_frames, 0.0, options);
  return build_intervention(world, t, "synth-" + std::to_string(seed) + "-T", "synth-" + std::to_string(seed),
                            RigidTransform::identity(), rng, options);
}

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write ground truth '" + path.string() + "'");
  out << "query_intervention," << truth.query_id << "\n";
  out << "database_intervention," << truth.database_id << "\n";
  out << "lambda_mm_per_rad," << format_double(truth.lambda_mm_per_rad) << "\n";
  out << "partial_band_mm," << format_double(truth.partial_band_mm) << "\n";
  out << "intervention,frame_id,depth_mm,roll_rad,degradation\n";
  auto rows = [&](const std::string& id, const std::vector<FrameTruth>& frames) {
    for (const auto& f : frames)
      out << id << "," << f.frame_id << "," << format_double(f.depth_mm) << "," << format_double(f.roll) << ","
          << to_string(f.degradation) << "\n";
  };
  rows(truth.query_id, truth.query);
  rows(truth.database_id, truth.database);
  if (!out) throw Error("I/O failure writing ground truth");
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file: ground truth '" + path.string() + "'");
  GroundTruth t;
  std::string line;
  bool table = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (!table) {
      if (f[0] == "intervention") table = true;
      else if (f[0] == "query_intervention") t.query_id = f.at(1);
      else if (f[0] == "database_intervention") t.database_id = f.at(1);
      else if (f[0] == "lambda_mm_per_rad") t.lambda_mm_per_rad = std::stod(f.at(1));
      else if (f[0] == "partial_band_mm") t.partial_band_mm = std::stod(f.at(1));
      else throw Error("malformed ground truth header: " + line);
      continue;
    }
    if (f.size() != 5) throw Error("malformed ground truth row: " + line);
    FrameTruth ft{std::stoll(f[1]), std::stod(f[2]), std::stod(f[3]), degradation_from_string(f[4])};
    if (f[0] == t.query_id) t.query.push_back(ft);
    else if (f[0] == t.database_id) t.database.push_back(ft);
    else throw Error("ground truth row for unknown intervention '" + f[0] + "'");
  }
  return t;
}

void write_pair(const SyntheticPair& pair, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_intervention(pair.a, dir / pair.a.intervention_id);
  save_intervention(pair.b, dir / pair.b.intervention_id);
  write_ground_truth(pair.truth, dir / "ground_truth.csv");
}

LoadedPair load_pair(const std::filesystem::path& dir) {
  LoadedPair p;
  p.truth = read_ground_truth(dir / "ground_truth.csv");
  p.a = load_intervention(dir / p.truth.query_id / "manifest.csv");
  p.b = load_intervention(dir / p.truth.database_id / "manifest.csv");
  return p;
}

}  // namespace endoreloc
