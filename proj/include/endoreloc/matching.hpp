#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "endoreloc/dataset.hpp"
#include "endoreloc/descriptors.hpp"

namespace endoreloc {

/// 0.5 * sum (a-b)^2 / (a+b); bins where a+b == 0 contribute nothing.
/// Throws when lengths or config fingerprints differ.
double chi_squared(const DescriptorVector& h1, const DescriptorVector& h2);
double chi_squared(std::span<const float> h1, std::span<const float> h2);

struct RankedCandidate {
  FrameRef frame;
  double distance = 0.0;
  double roll_correction = 0.0;  // radians applied before extraction
};

struct MatchReport {
  FrameRef query;
  std::vector<RankedCandidate> candidates;  // ascending distance, rank 1 first
  FrameRef em_baseline;                     // EMNN
  DescriptorConfig config;
  double radius_mm = 0.0;

  const RankedCandidate& best() const { return candidates.front(); }
  std::vector<ResultRow> rows() const;
};

/// Thread-safe memo of candidate descriptors keyed by frame, config and
/// 1-degree roll bucket.
class DescriptorCache {
public:
  using Key = std::tuple<std::string, std::int64_t, std::uint64_t, int>;

  DescriptorVector get_or_compute(const std::string& intervention_id, const Frame& frame,
                                  const DescriptorConfig& cfg, int roll_bucket_deg);
  std::size_t size() const;
  void clear();

private:
  mutable std::mutex mutex_;
  std::map<Key, DescriptorVector> entries_;
};

int roll_bucket_degrees(double radians);

struct MatchOptions {
  DescriptorConfig descriptor;
  bool correct_roll = true;
  double radius_mm = 0.0;  // recorded in the report only
};

/// Ranks `candidate_indices` (EMNN first, as returned by knn_within_radius)
/// of `database` against the query frame by chi-squared distance. Returns
/// nullopt when there are no candidates so the caller can fall back to
/// gross-localization.
std::optional<MatchReport> best_viewpoint(const Intervention& query_side, std::size_t query_index,
                                          const Intervention& database,
                                          std::span<const std::size_t> candidate_indices,
                                          const MatchOptions& options,
                                          DescriptorCache* cache = nullptr);

}  // namespace endoreloc
