#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endoreloc/image.hpp"

namespace endoreloc {

enum class Modality { NBI, WL };
enum class FrameLabel { Informative, Uninformative };

std::string to_string(Modality m);
Modality modality_from_string(const std::string& s);

/// 6-dof tracker sample: position in mm, unit quaternion, time in seconds.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
  double timestamp = 0.0;
};

inline constexpr double kQuaternionTolerance = 1e-6;

struct Frame {
  std::int64_t frame_id = 0;
  RgbImage image;
  Pose pose;
  Modality modality = Modality::NBI;
  std::optional<FrameLabel> label;  // nullopt = unlabeled
  std::string image_file;           // relative to the manifest directory
};

struct Landmark {
  std::string name;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
};

struct Intervention {
  std::string intervention_id;
  std::string subject_id;
  Modality modality = Modality::NBI;
  std::vector<Landmark> landmarks;
  std::vector<Frame> frames;

  /// Index of the frame with this id, or nullopt.
  std::optional<std::size_t> find(std::int64_t frame_id) const;
  const Frame& frame(std::int64_t frame_id) const;
};

/// Checks every type invariant; throws Error naming the first violation.
void validate(const Intervention& intervention);

struct FrameRef {
  std::string intervention_id;
  std::int64_t frame_id = 0;
  bool operator==(const FrameRef&) const = default;
  auto operator<=>(const FrameRef&) const = default;
};

struct ScoreRecord {
  FrameRef query;
  FrameRef matched;
  int score = 0;  // 0 incorrect, 1 partial, 2 best
  double radius_mm = 0.0;
};

/// One row of the results CSV.
struct ResultRow {
  FrameRef query;
  FrameRef match;
  double radius_mm = 0.0;
  int rank = 1;
  double distance = 0.0;
  std::optional<int> score;

  bool operator==(const ResultRow&) const = default;
};

inline constexpr const char* kResultsHeader =
    "query_intervention,query_frame,match_intervention,match_frame,radius_mm,rank,distance,score";

/// Reads a manifest and its PNG frames. Frames are returned sorted by timestamp.
Intervention load_intervention(const std::filesystem::path& manifest_path);

/// Writes `manifest.csv` and one PNG per frame into `directory`. Frames without
/// an image_file get `frame_<id>.png`.
void save_intervention(const Intervention& intervention, const std::filesystem::path& directory);

void save_results(std::span<const ResultRow> rows, const std::filesystem::path& out_path);
std::vector<ResultRow> load_results(const std::filesystem::path& path);

std::vector<ScoreRecord> to_score_records(std::span<const ResultRow> rows);

/// Splits one CSV line on commas. Fields never contain quotes or commas here.
std::vector<std::string> split_csv(const std::string& line);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace endoreloc
