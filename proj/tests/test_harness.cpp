#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "endoreloc/config.hpp"
#include "endoreloc/harness.hpp"
#include "test_util.hpp"

using namespace endoreloc;

namespace {

std::vector<int> distribution(int zeros, int ones, int twos) {
  std::vector<int> s;
  s.insert(s.end(), zeros, 0);
  s.insert(s.end(), ones, 1);
  s.insert(s.end(), twos, 2);
  return s;
}

GenerateOptions small_render() {
  GenerateOptions o;
  o.render.size = 64;
  return o;
}

// Two pyramid levels keep the cells of 64 px frames at 8 px or more.
EvalOptions small_eval() {
  EvalOptions o;
  o.descriptor.pyramid_levels = 2;
  return o;
}

EvaluationPair small_pair(std::uint64_t seed, double sigma, const GenerateOptions& o) {
  const auto p = generate_pair(seed, 40, sigma, o);
  return prepare_pair(p.a, p.b, p.truth);
}

}  // namespace

TEST(ComputeStats, TableTwoRows) {
  const auto lbp = compute_stats(distribution(5, 8, 47));
  EXPECT_NEAR(lbp.avg_score, 1.700, 1e-3);
  EXPECT_NEAR(lbp.std_dev, 0.619, 1e-3);
  EXPECT_NEAR(lbp.pct_zeros, 8.33, 5e-3);
  EXPECT_NEAR(lbp.pct_ones, 13.33, 5e-3);
  EXPECT_NEAR(lbp.pct_twos, 78.33, 5e-3);
  EXPECT_EQ(lbp.n, 60u);

  const auto em = compute_stats(distribution(16, 19, 25));
  EXPECT_NEAR(em.avg_score, 1.15, 1e-3);
  EXPECT_NEAR(em.pct_zeros, 26.67, 5e-3);
  EXPECT_NEAR(em.pct_ones, 31.67, 5e-3);
  EXPECT_NEAR(em.pct_twos, 41.67, 5e-3);
}

TEST(ComputeStats, AllTwos) {
  const auto st = compute_stats(distribution(0, 0, 12));
  EXPECT_EQ(st.avg_score, 2.0);
  EXPECT_EQ(st.std_dev, 0.0);
  EXPECT_EQ(st.pct_zeros, 0.0);
  EXPECT_EQ(st.pct_ones, 0.0);
  EXPECT_EQ(st.pct_twos, 100.0);
}

TEST(ComputeStats, MatchesTwoPassSampleDeviation) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> s(2 + rng() % 100);
    for (int& v : s) v = static_cast<int>(rng() % 3);
    double mean = 0;
    for (int v : s) mean += v;
    mean /= s.size();
    double ss = 0;
    for (int v : s) ss += (v - mean) * (v - mean);
    const auto st = compute_stats(s);
    EXPECT_NEAR(st.avg_score, mean, 1e-12);
    EXPECT_NEAR(st.std_dev, std::sqrt(ss / (s.size() - 1)), 1e-12);
  }
}

TEST(ComputeStats, InvariantsHoldForRandomLists) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> s(1 + rng() % 200);
    for (int& v : s) v = static_cast<int>(rng() % 3);
    const auto st = compute_stats(s);
    EXPECT_NEAR(st.pct_zeros + st.pct_ones + st.pct_twos, 100.0, 0.01);
    EXPECT_NEAR(st.avg_score, (st.pct_ones + 2.0 * st.pct_twos) / 100.0, 1e-6);

    std::vector<int> shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto sh = compute_stats(shuffled);
    EXPECT_EQ(sh.avg_score, st.avg_score);
    EXPECT_EQ(sh.std_dev, st.std_dev);
    EXPECT_EQ(sh.pct_twos, st.pct_twos);
  }
}

TEST(ComputeStats, Errors) {
  EXPECT_THROW_MSG(compute_stats(std::vector<int>{}), "empty");
  EXPECT_THROW_MSG(compute_stats(std::vector<int>{0, 3}), "outside");
  EXPECT_THROW_MSG(retrieval_rate(std::vector<int>{}), "empty");
}

TEST(ComputeStats, RecordOverloadAgrees) {
  std::vector<ScoreRecord> recs;
  for (int s : distribution(5, 8, 47)) recs.push_back({{"A", 0}, {"B", 0}, s, 20.0});
  EXPECT_EQ(compute_stats(recs).avg_score, compute_stats(distribution(5, 8, 47)).avg_score);
  EXPECT_NEAR(retrieval_rate(recs), 78.33, 5e-3);
}

TEST(RetrievalRate, Examples) {
  EXPECT_EQ(retrieval_rate(distribution(0, 0, 9)), 100.0);
  EXPECT_NEAR(retrieval_rate(distribution(5, 8, 47)), 78.33, 5e-3);
  EXPECT_NEAR(retrieval_rate(distribution(16, 19, 25)), 41.67, 5e-3);
}

TEST(SelectQueries, NineStationsOverTwoHundredFiftyMillimetres) {
  std::vector<double> depths;
  for (int i = 0; i <= 1000; ++i) depths.push_back(0.25 * i);
  const auto iv = testutil::straight_intervention(depths);
  const auto q = select_queries(iv);
  ASSERT_EQ(q.size(), 9u);
  for (std::size_t i = 0; i < q.size(); ++i)
    EXPECT_DOUBLE_EQ(iv.frames[q[i]].pose.position.z(), 31.25 * static_cast<double>(i));
}

TEST(SelectQueries, SkipsUninformativeAndNeverRepeats) {
  auto iv = testutil::straight_intervention({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  iv.frames[5].label = FrameLabel::Uninformative;
  const auto q = select_queries(iv, 3);
  EXPECT_EQ(q, (std::vector<std::size_t>{0, 4, 10}));

  const auto dense = select_queries(testutil::straight_intervention({0, 0.1, 0.2, 10}), 4);
  std::vector<std::size_t> sorted = dense;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
  EXPECT_THROW_MSG(select_queries(testutil::straight_intervention({0, 1}), 3), "eligible");
}

TEST(PreparePair, RejectsMismatchedTruth) {
  auto p = generate_pair(42, 20, 1.0, small_render());
  p.truth.query_id = "other";
  EXPECT_THROW_MSG(prepare_pair(p.a, p.b, p.truth), "ground truth");
}

TEST(SweepRadius, SingleRadiusGivesOneImageRow) {
  const std::vector<EvaluationPair> pairs{small_pair(42, 5.0, small_render())};
  const std::vector<double> radii{20.0};
  const auto rows = sweep_radius(pairs, radii, small_eval());
  ASSERT_GE(rows.size(), 2u);
  EXPECT_EQ(std::count_if(rows.begin(), rows.end(), [](const RadiusRow& r) { return r.method == "image"; }), 1);
  for (const auto& r : rows) {
    EXPECT_EQ(r.radius_mm, 20.0);
    EXPECT_EQ(r.stats.n, r.method == "EM-kNN" ? r.stats.n : 9u);
  }
  const std::vector<double> bad{20.0, 10.0};
  EXPECT_THROW_MSG(sweep_radius(pairs, bad, small_eval()), "ascending");
}

TEST(SweepRadius, NoiselessEmBaselineIsPerfectAtEveryRadius) {
  GenerateOptions o = GenerateOptions::noiseless();
  o.render.size = 64;
  const std::vector<EvaluationPair> pairs{small_pair(42, 0.0, o), small_pair(43, 0.0, o)};
  const std::vector<double> radii{10, 20, 30, 40, 50, 60, 70};
  const auto rows = sweep_radius(pairs, radii, small_eval());
  int em_rows = 0;
  for (const auto& r : rows) {
    if (r.method != "EM-Based") continue;
    ++em_rows;
    EXPECT_EQ(r.stats.avg_score, 2.0) << r.radius_mm;
  }
  EXPECT_EQ(em_rows, 7);
}

TEST(SweepRadius, DeterministicAcrossRuns) {
  const std::vector<EvaluationPair> pairs{small_pair(7, 5.0, small_render())};
  const std::vector<double> radii{10.0, 30.0};
  const auto d1 = testutil::fresh_dir("sweep_det");
  write_radius_csv(sweep_radius(pairs, radii, small_eval()), d1 / "a.csv");
  write_radius_csv(sweep_radius(pairs, radii, small_eval()), d1 / "b.csv");
  std::ifstream a(d1 / "a.csv"), b(d1 / "b.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(a), {}), std::string(std::istreambuf_iterator<char>(b), {}));
}

TEST(SweepCombos, RowCounts) {
  const std::vector<EvaluationPair> pairs{small_pair(42, 5.0, small_render())};
  const std::vector<DescriptorFamily> one_family{DescriptorFamily::MLBP};
  const std::vector<ColorSpace> one_space{ColorSpace::HSV};
  const auto single = sweep_combos(pairs, one_family, one_space, 20.0, small_eval());
  ASSERT_EQ(single.size(), 2u);
  EXPECT_TRUE(single[0].avg_score >= single[1].avg_score);

  const std::vector<DescriptorFamily> fams(std::begin(kAllFamilies), std::end(kAllFamilies));
  const std::vector<ColorSpace> spaces(std::begin(kAllColorSpaces), std::end(kAllColorSpaces));
  const auto full = sweep_combos(pairs, fams, spaces, 20.0, small_eval());
  EXPECT_EQ(full.size(), 43u);
  EXPECT_EQ(std::count_if(full.begin(), full.end(), [](const ComboStats& c) { return c.descriptor == "EM-Based"; }),
            1);
  for (std::size_t i = 1; i < full.size(); ++i) EXPECT_GE(full[i - 1].avg_score, full[i].avg_score);
}

TEST(EvaluatePair, FilteredMatchesAreNeverUninformative) {
  GenerateOptions o = small_render();
  o.ui_fraction = 0.3;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const EvaluationPair pair = small_pair(seed, 5.0, o);
    EvalOptions opt = small_eval();
    opt.filter = FilterMode::Labels;
    const Intervention filtered = apply_filter(pair.database, opt);
    EXPECT_LT(filtered.frames.size(), pair.database.frames.size());
    DescriptorCache cache;
    for (double r : {5.0, 20.0, 70.0}) {
      for (const auto& out : evaluate_pair(pair, filtered, r, opt, cache)) {
        EXPECT_TRUE(pair.truth.database_truth(out.image_match.frame_id).informative());
        EXPECT_EQ(out.k, out.report ? out.report->candidates.size() : 0u);
      }
    }
  }
}

TEST(EvaluatePair, ModelFilterRequiresModel) {
  const EvaluationPair pair = small_pair(42, 5.0, small_render());
  EvalOptions opt;
  opt.filter = FilterMode::Model;
  EXPECT_THROW_MSG(apply_filter(pair.database, opt), "model");
}

TEST(CsvOutput, FixedHeadersAndRowCounts) {
  const auto dir = testutil::fresh_dir("harness_csv");
  const std::vector<ComboStats> rows{compute_stats(distribution(5, 8, 47)), compute_stats(distribution(16, 19, 25))};
  write_combos_csv(rows, dir / "combos.csv");
  write_stats_csv(rows, dir / "stats.csv");
  for (const auto& [file, header] : {std::pair{"combos.csv", kCombosHeader}, std::pair{"stats.csv", kStatsHeader}}) {
    std::ifstream in(dir / file);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, header);
    int n = 0;
    while (std::getline(in, line)) ++n;
    EXPECT_EQ(n, 2);
  }
}

TEST(ReadScores, ScoreColumnAndResultsFile) {
  const auto dir = testutil::fresh_dir("read_scores");
  {
    std::ofstream f(dir / "plain.csv");
    f << "score\n2\n1\n\n0\n2\n";
  }
  EXPECT_EQ(read_scores(dir / "plain.csv"), (std::vector<int>{2, 1, 0, 2}));

  std::vector<ResultRow> rows{{{"A", 1}, {"B", 3}, 20.0, 1, 0.1, 2},
                              {{"A", 1}, {"B", 4}, 20.0, 2, 0.2, 1},
                              {{"A", 2}, {"B", 5}, 20.0, 1, 0.1, std::nullopt},
                              {{"A", 3}, {"B", 6}, 20.0, 1, 0.3, 0}};
  save_results(rows, dir / "results.csv");
  EXPECT_EQ(read_scores(dir / "results.csv"), (std::vector<int>{2, 0}));

  {
    std::ofstream f(dir / "bad.csv");
    f << "value\n1\n";
  }
  EXPECT_THROW_MSG(read_scores(dir / "bad.csv"), "score");
  EXPECT_THROW_MSG(read_scores(dir / "missing.csv"), "missing");
}

TEST(Settings, DumpLoadRoundTrip) {
  Settings s;
  apply_setting(s, "seed", "7");
  apply_setting(s, "search.radii_mm", "5, 15, 25");
  apply_setting(s, "descriptor.family", "MHOG");
  apply_setting(s, "synth.modality", "WL");
  apply_setting(s, "filter.c_grid", "2,20");
  const auto dir = testutil::fresh_dir("settings");
  {
    std::ofstream f(dir / "cfg.txt");
    f << dump_settings(s);
  }
  const Settings back = load_settings(dir / "cfg.txt");
  EXPECT_EQ(dump_settings(back), dump_settings(s));
  EXPECT_EQ(back.seed, 7u);
  EXPECT_EQ(back.radii, (std::vector<double>{5, 15, 25}));
  EXPECT_EQ(back.descriptor.family, DescriptorFamily::MHOG);
  EXPECT_EQ(back.synth.modality, Modality::WL);
  EXPECT_EQ(back.cv.c_grid, (std::vector<double>{2, 20}));
}

TEST(Settings, RejectsUnknownKeysAndBadValues) {
  Settings s;
  EXPECT_THROW_MSG(apply_setting(s, "no.such.key", "1"), "no.such.key");
  EXPECT_THROW(apply_setting(s, "seed", "abc"), Error);
  EXPECT_THROW(apply_setting(s, "match.correct_roll", "maybe"), Error);
}
