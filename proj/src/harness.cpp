#include "endoreloc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <tuple>

#include "endoreloc/localization.hpp"

namespace endoreloc {

ComboStats compute_stats(std::span<const int> scores) {
  if (scores.empty()) throw Error("compute_stats: empty score list");
  std::size_t counts[3] = {0, 0, 0};
  for (int s : scores) {
    if (s < 0 || s > 2) throw Error("compute_stats: score " + std::to_string(s) + " outside {0,1,2}");
    ++counts[s];
  }
  ComboStats st;
  st.n = scores.size();
  const double n = static_cast<double>(st.n);
  // Exact integer sums keep the result independent of input order.
  const double sum = static_cast<double>(counts[1] + 2 * counts[2]);
  const double sum_sq = static_cast<double>(counts[1] + 4 * counts[2]);
  st.avg_score = sum / n;
  st.std_dev = st.n > 1 ? std::sqrt(std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0))) : 0.0;
  st.pct_zeros = 100.0 * static_cast<double>(counts[0]) / n;
  st.pct_ones = 100.0 * static_cast<double>(counts[1]) / n;
  st.pct_twos = 100.0 * static_cast<double>(counts[2]) / n;
  return st;
}

ComboStats compute_stats(std::span<const ScoreRecord> records) {
  std::vector<int> scores;
  scores.reserve(records.size());
  for (const auto& r : records) scores.push_back(r.score);
  return compute_stats(scores);
}

double retrieval_rate(std::span<const int> scores) {
  if (scores.empty()) throw Error("retrieval_rate: empty score list");
  return 100.0 * static_cast<double>(std::count(scores.begin(), scores.end(), 2)) /
         static_cast<double>(scores.size());
}

double retrieval_rate(std::span<const ScoreRecord> records) {
  std::vector<int> scores;
  for (const auto& r : records) scores.push_back(r.score);
  return retrieval_rate(scores);
}

std::vector<std::size_t> select_queries(const Intervention& intervention, int count) {
  if (count < 1) throw Error("select_queries: count must be positive");
  const auto& frames = intervention.frames;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (frames[i].label != FrameLabel::Uninformative) eligible.push_back(i);
  if (eligible.size() < static_cast<std::size_t>(count))
    throw Error("select_queries: only " + std::to_string(eligible.size()) + " eligible frames for " +
                std::to_string(count) + " queries");

  const Eigen::Vector3d start = frames.front().pose.position;
  Eigen::Vector3d axis = frames.back().pose.position - start;
  const double length = axis.norm();
  if (length <= 0.0) throw Error("select_queries: trajectory has zero extent");
  axis /= length;

  std::vector<double> along(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) along[i] = axis.dot(frames[i].pose.position - start);

  std::vector<bool> used(frames.size(), false);
  std::vector<std::size_t> picked;
  for (int q = 0; q < count; ++q) {
    const double station = count == 1 ? 0.5 * length : length * q / (count - 1);
    std::size_t best = eligible.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i : eligible) {
      if (used[i]) continue;
      const double d = std::abs(along[i] - station);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    used[best] = true;
    picked.push_back(best);
  }
  return picked;
}

EvaluationPair prepare_pair(const Intervention& a, const Intervention& b, const GroundTruth& truth, int n_queries) {
  EvaluationPair p;
  p.query = a;
  p.database = transformed(b, register_interventions(b, a));
  p.truth = truth;
  if (truth.query_id != a.intervention_id || truth.database_id != b.intervention_id)
    throw Error("ground truth does not describe this pair");
  p.queries = select_queries(p.query, n_queries);
  return p;
}

Intervention apply_filter(const Intervention& intervention, const EvalOptions& options) {
  switch (options.filter) {
    case FilterMode::None:
      return intervention;
    case FilterMode::Model:
      if (options.model == nullptr) throw Error("filter mode 'model' needs a trained filter model");
      return filter_intervention(intervention, *options.model);
    case FilterMode::Labels: {
      Intervention out = intervention;
      out.frames.clear();
      for (const auto& f : intervention.frames)
        if (f.label != FrameLabel::Uninformative) out.frames.push_back(f);
      return out;
    }
  }
  return intervention;
}

std::vector<QueryOutcome> evaluate_pair(const EvaluationPair& pair, const Intervention& filtered_database,
                                        double radius_mm, const EvalOptions& options, DescriptorCache& cache) {
  if (filtered_database.frames.empty()) throw Error("database is empty after filtering");
  MatchOptions match;
  match.descriptor = options.descriptor;
  match.correct_roll = options.correct_roll;
  match.radius_mm = radius_mm;
  const SearchConfig radius{radius_mm};
  const SearchConfig nearest{std::numeric_limits<double>::infinity(), 1};

  std::vector<QueryOutcome> out;
  for (std::size_t qi : pair.queries) {
    const Frame& q = pair.query.frames.at(qi);
    QueryOutcome o;
    o.query = {pair.query.intervention_id, q.frame_id};

    const auto em = knn_within_radius(q.pose.position, pair.database, nearest);
    o.em_match = {pair.database.intervention_id, em.front().frame_id};
    o.em_score = pair.truth.score(q.frame_id, o.em_match.frame_id);
    for (const auto& n : knn_within_radius(q.pose.position, pair.database, radius))
      o.knn_scores.push_back(pair.truth.score(q.frame_id, n.frame_id));

    const auto candidates = knn_within_radius(q.pose.position, filtered_database, radius);
    o.k = candidates.size();
    std::vector<std::size_t> indices;
    for (const auto& n : candidates) indices.push_back(n.index);
    o.report = best_viewpoint(pair.query, qi, filtered_database, indices, match, &cache);
    if (o.report) {
      o.image_match = o.report->best().frame;
    } else {
      // Nothing inside the radius: fall back to gross-localization.
      const auto fallback = knn_within_radius(q.pose.position, filtered_database, nearest);
      o.image_match = {filtered_database.intervention_id, fallback.front().frame_id};
    }
    o.image_score = pair.truth.score(q.frame_id, o.image_match.frame_id);
    out.push_back(std::move(o));
  }
  return out;
}

namespace {

ComboStats labeled(ComboStats st, std::string descriptor, std::string space) {
  st.descriptor = std::move(descriptor);
  st.space = std::move(space);
  return st;
}

}  // namespace

std::vector<RadiusRow> sweep_radius(std::span<const EvaluationPair> pairs, std::span<const double> radii,
                                    const EvalOptions& options) {
  if (pairs.empty()) throw Error("sweep_radius: no evaluation pairs");
  if (radii.empty()) throw Error("sweep_radius: no radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw Error("sweep_radius: radii must be strictly ascending");

  std::vector<Intervention> filtered;
  for (const auto& p : pairs) filtered.push_back(apply_filter(p.database, options));

  DescriptorCache cache;
  std::vector<RadiusRow> rows;
  for (double r : radii) {
    std::vector<int> image, em, knn;
    std::size_t k_total = 0, queries = 0, knn_total = 0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      for (const auto& o : evaluate_pair(pairs[p], filtered[p], r, options, cache)) {
        image.push_back(o.image_score);
        em.push_back(o.em_score);
        knn.insert(knn.end(), o.knn_scores.begin(), o.knn_scores.end());
        k_total += o.k;
        knn_total += o.knn_scores.size();
        ++queries;
      }
    }
    const double nq = static_cast<double>(queries);
    rows.push_back({r, "image",
                    labeled(compute_stats(image), to_string(options.descriptor.family),
                            to_string(options.descriptor.space)),
                    static_cast<double>(k_total) / nq});
    rows.push_back({r, "EM-Based", labeled(compute_stats(em), "EM-Based", "-"), 1.0});
    if (!knn.empty())
      rows.push_back({r, "EM-kNN", labeled(compute_stats(knn), "EM-kNN", "-"),
                      static_cast<double>(knn_total) / nq});
  }
  return rows;
}

std::vector<ComboStats> sweep_combos(std::span<const EvaluationPair> pairs,
                                     std::span<const DescriptorFamily> families,
                                     std::span<const ColorSpace> spaces, double radius_mm,
                                     const EvalOptions& options) {
  if (pairs.empty()) throw Error("sweep_combos: no evaluation pairs");
  if (families.empty() || spaces.empty()) throw Error("sweep_combos: empty descriptor grid");

  std::vector<Intervention> filtered;
  for (const auto& p : pairs) filtered.push_back(apply_filter(p.database, options));

  std::vector<ComboStats> table;
  std::vector<int> em;
  bool em_done = false;
  for (DescriptorFamily f : families) {
    for (ColorSpace s : spaces) {
      EvalOptions combo = options;
      combo.descriptor.family = f;
      combo.descriptor.space = s;
      DescriptorCache cache;
      std::vector<int> image;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        for (const auto& o : evaluate_pair(pairs[p], filtered[p], radius_mm, combo, cache)) {
          image.push_back(o.image_score);
          if (!em_done) em.push_back(o.em_score);
        }
      }
      em_done = true;
      table.push_back(labeled(compute_stats(image), to_string(f), to_string(s)));
    }
  }
  table.push_back(labeled(compute_stats(em), "EM-Based", "-"));
  std::stable_sort(table.begin(), table.end(), [](const ComboStats& a, const ComboStats& b) {
    return std::tie(b.avg_score, a.descriptor, a.space) < std::tie(a.avg_score, b.descriptor, b.space);
  });
  return table;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << header << "\n";
  return out;
}

std::string stats_columns(const ComboStats& s) {
  return std::to_string(s.n) + "," + format_double(s.avg_score) + "," + format_double(s.std_dev) + "," +
         format_double(s.pct_zeros) + "," + format_double(s.pct_ones) + "," + format_double(s.pct_twos);
}

}  // namespace

void write_radius_csv(std::span<const RadiusRow> rows, const std::filesystem::path& path) {
  auto out = open_csv(path, kRadiusHeader);
  for (const auto& r : rows) {
    const ComboStats& s = r.stats;
    out << format_double(r.radius_mm) << "," << r.method << "," << s.descriptor << "," << s.space << "," << s.n
        << "," << format_double(r.mean_k) << "," << format_double(s.avg_score) << "," << format_double(s.std_dev)
        << "," << format_double(s.pct_zeros) << "," << format_double(s.pct_ones) << ","
        << format_double(s.pct_twos) << "\n";
  }
  if (!out) throw Error("I/O failure writing '" + path.string() + "'");
}

void write_combos_csv(std::span<const ComboStats> rows, const std::filesystem::path& path) {
  auto out = open_csv(path, kCombosHeader);
  for (std::size_t i = 0; i < rows.size(); ++i)
    out << (i + 1) << "," << rows[i].descriptor << "," << rows[i].space << "," << stats_columns(rows[i]) << "\n";
  if (!out) throw Error("I/O failure writing '" + path.string() + "'");
}

void write_stats_csv(std::span<const ComboStats> rows, const std::filesystem::path& path) {
  auto out = open_csv(path, kStatsHeader);
  for (const auto& r : rows)
    out << r.descriptor << "," << r.space << "," << stats_columns(r) << "," << format_double(r.pct_twos) << "\n";
  if (!out) throw Error("I/O failure writing '" + path.string() + "'");
}

std::vector<int> read_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("missing file: score file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("empty score file '" + path.string() + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const auto col = std::find(header.begin(), header.end(), "score");
  if (col == header.end()) throw Error("score file has no 'score' column");
  const auto idx = static_cast<std::size_t>(col - header.begin());
  // In a results CSV only the top-ranked match of each query is scored.
  const auto rank_col = std::find(header.begin(), header.end(), "rank");
  const auto rank_idx = static_cast<std::size_t>(rank_col - header.begin());
  std::vector<int> scores;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw Error("malformed score row: " + line);
    if (f[idx].empty()) continue;
    if (rank_col != header.end() && f[rank_idx] != "1") continue;
    std::size_t used = 0;
    const int s = std::stoi(f[idx], &used);
    if (used != f[idx].size()) throw Error("malformed score value '" + f[idx] + "'");
    scores.push_back(s);
  }
  return scores;
}

}  // namespace endoreloc
