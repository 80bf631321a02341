#include "endoreloc/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "endoreloc/localization.hpp"

namespace endoreloc {

double chi_squared(std::span<const float> h1, std::span<const float> h2) {
  if (h1.size() != h2.size())
    throw Error("chi-squared length mismatch: " + std::to_string(h1.size()) + " vs " +
                std::to_string(h2.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < h1.size(); ++i) {
    const double a = h1[i], b = h2[i];
    const double s = a + b;
    if (s == 0.0) continue;
    const double d = a - b;
    sum += d * d / s;
  }
  return 0.5 * sum;
}

double chi_squared(const DescriptorVector& h1, const DescriptorVector& h2) {
  if (h1.config_fingerprint != h2.config_fingerprint)
    throw Error("chi-squared between descriptors of different configurations");
  return chi_squared(std::span<const float>(h1.values), std::span<const float>(h2.values));
}

std::vector<ResultRow> MatchReport::rows() const {
  std::vector<ResultRow> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.push_back({query, candidates[i].frame, radius_mm, static_cast<int>(i + 1),
                   candidates[i].distance, std::nullopt});
  }
  return out;
}

int roll_bucket_degrees(double radians) {
  int deg = static_cast<int>(std::lround(radians * 180.0 / std::numbers::pi));
  if (deg <= -180) deg += 360;
  if (deg > 180) deg -= 360;
  return deg;
}

namespace {

DescriptorVector compute(const Frame& frame, const DescriptorConfig& cfg, int bucket) {
  if (bucket == 0) return describe(frame.image, cfg);
  return describe(rotate_image(frame.image, bucket * std::numbers::pi / 180.0), cfg);
}

}  // namespace

DescriptorVector DescriptorCache::get_or_compute(const std::string& intervention_id, const Frame& frame,
                                                 const DescriptorConfig& cfg, int roll_bucket_deg) {
  Key key{intervention_id, frame.frame_id, cfg.fingerprint(), roll_bucket_deg};
  {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(key);
    if (it != entries_.end()) return it->second;
  }
  DescriptorVector v = compute(frame, cfg, roll_bucket_deg);
  std::lock_guard lock(mutex_);
  return entries_.emplace(std::move(key), std::move(v)).first->second;
}

std::size_t DescriptorCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

void DescriptorCache::clear() {
  std::lock_guard lock(mutex_);
  entries_.clear();
}

std::optional<MatchReport> best_viewpoint(const Intervention& query_side, std::size_t query_index,
                                          const Intervention& database,
                                          std::span<const std::size_t> candidate_indices,
                                          const MatchOptions& options, DescriptorCache* cache) {
  if (candidate_indices.empty()) return std::nullopt;
  if (query_index >= query_side.frames.size()) throw Error("query index out of range");
  const Frame& query = query_side.frames[query_index];

  auto descriptor = [&](const std::string& iid, const Frame& f, int bucket) {
    if (cache) return cache->get_or_compute(iid, f, options.descriptor, bucket);
    return compute(f, options.descriptor, bucket);
  };

  MatchReport report;
  report.query = {query_side.intervention_id, query.frame_id};
  report.config = options.descriptor;
  report.radius_mm = options.radius_mm;
  report.em_baseline = {database.intervention_id, database.frames.at(candidate_indices.front()).frame_id};

  const DescriptorVector q = descriptor(query_side.intervention_id, query, 0);
  for (std::size_t idx : candidate_indices) {
    const Frame& cand = database.frames.at(idx);
    if (cand.modality != query.modality)
      throw Error("candidate frame " + std::to_string(cand.frame_id) + " has a different modality");
    int bucket = 0;
    if (options.correct_roll) bucket = roll_bucket_degrees(relative_roll(cand.pose, query.pose));
    const DescriptorVector d = descriptor(database.intervention_id, cand, bucket);
    report.candidates.push_back({{database.intervention_id, cand.frame_id},
                                 chi_squared(q, d),
                                 bucket * std::numbers::pi / 180.0});
  }
  std::sort(report.candidates.begin(), report.candidates.end(),
            [](const RankedCandidate& a, const RankedCandidate& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return a.frame.frame_id < b.frame.frame_id;
            });
  return report;
}

}  // namespace endoreloc
