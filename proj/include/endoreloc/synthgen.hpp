#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "endoreloc/dataset.hpp"
#include "endoreloc/localization.hpp"

namespace endoreloc {

/// Value-noise texture over (axial mm, angle) wrapped around a cylinder.
struct TubeWorld {
  Modality modality = Modality::NBI;
  double radius_mm = 10.0;
  double length_mm = 250.0;
  std::uint64_t seed = 0;

  TubeWorld() = default;
  TubeWorld(std::uint64_t seed, Modality modality);

  /// Scalar field in [0, 1], periodic in angle with period 2*pi.
  double texture(double axial_mm, double angle) const;
  /// Palette color (linear 0..1 RGB) for a texture value.
  std::array<double, 3> palette(double t) const;

  /// Axial period (mm) of the coarsest noise octave.
  double dominant_period_mm() const;
};

enum class Degradation { None, Blur, Contact, Motion, Fluid };

std::string to_string(Degradation d);
Degradation degradation_from_string(const std::string& s);

struct CameraSample {
  double depth_mm = 0.0;
  double roll = 0.0;  // radians about the optical axis
  Degradation degradation = Degradation::None;
  std::uint64_t noise_seed = 0;  // drives degradation placement
};

struct RenderOptions {
  int size = 128;
  double focal_fraction = 0.3125;  // focal length / image size
  double falloff_mm = 6.0;         // illumination decay length along the tube
  int supersample = 2;
  double optics_blur_px = 0.7;     // isotropic lens blur (Gaussian sigma), 0 disables
  double fov_ramp_px = 6.0;        // soft edge of the circular field of view
};

/// Forward-looking pinhole camera on the tube axis with a circular field of
/// view inscribed in the frame. Texture angle of a pixel is
/// its polar angle about the image center plus the camera roll, so
/// render(roll + d) matches rotate_image(render(roll), d).
RgbImage render(const TubeWorld& world, const CameraSample& cam, const RenderOptions& options = {});

/// Post-render degradations used to simulate uninformative frames.
RgbImage gaussian_blur(const RgbImage& image, double sigma);
RgbImage motion_blur(const RgbImage& image, int length, double direction);
void apply_degradation(RgbImage& image, Degradation d, std::uint64_t seed);

struct FrameTruth {
  std::int64_t frame_id = 0;
  double depth_mm = 0.0;
  double roll = 0.0;
  Degradation degradation = Degradation::None;
  bool informative() const { return degradation == Degradation::None; }
};

/// Synthetic stand-in for expert scores: for each query frame the best
/// database frame minimizes |d depth| + lambda |d roll| over informative
/// frames (score 2); other informative frames within partial_band_mm score 1.
struct GroundTruth {
  std::string query_id;
  std::string database_id;
  std::vector<FrameTruth> query;
  std::vector<FrameTruth> database;
  double lambda_mm_per_rad = 2.0;
  double partial_band_mm = 5.0;

  double cost(const FrameTruth& q, const FrameTruth& d) const;
  const FrameTruth& query_truth(std::int64_t frame_id) const;
  const FrameTruth& database_truth(std::int64_t frame_id) const;
  /// Best informative database frame for a query frame.
  std::int64_t best_match(std::int64_t query_frame) const;
  int score(std::int64_t query_frame, std::int64_t database_frame) const;
  GroundTruth swapped() const;
};

struct GenerateOptions {
  Modality modality = Modality::NBI;
  RenderOptions render{};
  double length_mm = 250.0;
  double radius_mm = 10.0;
  double ui_fraction = 0.15;
  double depth_jitter = 0.3;      // fraction of frame spacing
  double roll_drift = 0.3;        // radians, amplitude of slow roll wander
  double roll_jitter = 0.01;      // radians, per frame
  double landmark_noise_mm = 0.5;
  double lambda_mm_per_rad = 2.0;
  double partial_band_mm = 5.0;
  double frame_interval_s = 0.1;

  /// No degradations, no roll wander, exact landmarks.
  static GenerateOptions noiseless();
};

struct SyntheticPair {
  Intervention a;  // query side, expressed in the tube frame
  Intervention b;  // database side, in its own tracker frame
  GroundTruth truth;
  RigidTransform b_from_tube;
};

/// Two interventions over the same virtual anatomy. Tracker positions carry
/// Gaussian depth noise of em_noise_sigma_mm.
SyntheticPair generate_pair(std::uint64_t seed, int n_frames, double em_noise_sigma_mm,
                            const GenerateOptions& options = {});

/// Single labeled intervention, e.g. for filter training.
Intervention generate_intervention(std::uint64_t seed, int n_frames, const GenerateOptions& options = {});

/// Writes <dir>/<a_id>/manifest.csv, <dir>/<b_id>/manifest.csv and
/// <dir>/ground_truth.csv.
void write_pair(const SyntheticPair& pair, const std::filesystem::path& dir);

void write_ground_truth(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth read_ground_truth(const std::filesystem::path& path);

struct LoadedPair {
  Intervention a;
  Intervention b;
  GroundTruth truth;
};
LoadedPair load_pair(const std::filesystem::path& dir);

/// Anatomical landmark layout in the tube frame.
std::vector<Landmark> default_landmarks();

}  // namespace endoreloc
