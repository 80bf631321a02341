#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endoreloc/dataset.hpp"
#include "endoreloc/descriptors.hpp"
#include "endoreloc/matching.hpp"
#include "endoreloc/synthgen.hpp"
#include "endoreloc/uifilter.hpp"

namespace endoreloc {

struct ComboStats {
  std::string descriptor;  // family label, or "EM-Based"/"EM-kNN" for baselines
  std::string space;       // color space tag, "-" for baselines
  double avg_score = 0.0;
  double std_dev = 0.0;  // sample standard deviation (n - 1)
  double pct_zeros = 0.0;
  double pct_ones = 0.0;
  double pct_twos = 0.0;
  std::size_t n = 0;
};

/// Scores must be 0, 1 or 2. Throws on empty input.
ComboStats compute_stats(std::span<const int> scores);
ComboStats compute_stats(std::span<const ScoreRecord> records);

/// Percentage of scores equal to 2. Throws on empty input.
double retrieval_rate(std::span<const int> scores);
double retrieval_rate(std::span<const ScoreRecord> records);

/// Frames closest to `count` equally spaced stations between the first and last
/// tracked positions. Only frames not labeled uninformative are eligible and no
/// frame is picked twice. Returned as indices into intervention.frames.
std::vector<std::size_t> select_queries(const Intervention& intervention, int count = 9);

/// A query/database pair with the database already registered into the query
/// intervention's tracker frame.
struct EvaluationPair {
  Intervention query;
  Intervention database;
  GroundTruth truth;
  std::vector<std::size_t> queries;
};

EvaluationPair prepare_pair(const Intervention& a, const Intervention& b, const GroundTruth& truth,
                            int n_queries = 9);

enum class FilterMode { None, Model, Labels };

struct EvalOptions {
  DescriptorConfig descriptor{};  // family and space are overridden by sweep_combos
  bool correct_roll = true;
  FilterMode filter = FilterMode::None;
  const FilterModel* model = nullptr;  // required for FilterMode::Model
};

/// Drops frames the filter considers uninformative.
Intervention apply_filter(const Intervention& intervention, const EvalOptions& options);

struct QueryOutcome {
  FrameRef query;
  FrameRef em_match;     // EMNN in the unfiltered database
  FrameRef image_match;  // best_viewpoint over the (filtered) k-EMNN set
  int em_score = 0;
  int image_score = 0;
  std::vector<int> knn_scores;  // every candidate within the radius (unfiltered)
  std::size_t k = 0;            // candidate count after filtering
  std::optional<MatchReport> report;
};

/// Runs gross-localization and view-point selection for every query of the
/// pair. `filtered_database` must come from apply_filter(pair.database, ...).
std::vector<QueryOutcome> evaluate_pair(const EvaluationPair& pair, const Intervention& filtered_database,
                                        double radius_mm, const EvalOptions& options, DescriptorCache& cache);

struct RadiusRow {
  double radius_mm = 0.0;
  std::string method;  // "image", "EM-Based" or "EM-kNN"
  ComboStats stats;
  double mean_k = 0.0;
};

/// Per radius: image-based stats, EMNN stats and pooled k-EMNN stats.
std::vector<RadiusRow> sweep_radius(std::span<const EvaluationPair> pairs, std::span<const double> radii,
                                    const EvalOptions& options);

/// One row per (family, space) plus the EM-Based row, sorted by descending
/// average score (ties by label).
std::vector<ComboStats> sweep_combos(std::span<const EvaluationPair> pairs,
                                     std::span<const DescriptorFamily> families,
                                     std::span<const ColorSpace> spaces, double radius_mm,
                                     const EvalOptions& options);

inline constexpr const char* kRadiusHeader =
    "radius_mm,method,descriptor,color_space,n,mean_k,avg_score,std_dev,pct_zeros,pct_ones,pct_twos";
inline constexpr const char* kCombosHeader =
    "rank,descriptor,color_space,n,avg_score,std_dev,pct_zeros,pct_ones,pct_twos";
inline constexpr const char* kStatsHeader =
    "descriptor,color_space,n,avg_score,std_dev,pct_zeros,pct_ones,pct_twos,retrieval_rate";

void write_radius_csv(std::span<const RadiusRow> rows, const std::filesystem::path& path);
void write_combos_csv(std::span<const ComboStats> rows, const std::filesystem::path& path);
void write_stats_csv(std::span<const ComboStats> rows, const std::filesystem::path& path);

/// Score file for the `stats` command: one `score` column, or a results CSV
/// whose score column is filled in.
std::vector<int> read_scores(const std::filesystem::path& path);

}  // namespace endoreloc
