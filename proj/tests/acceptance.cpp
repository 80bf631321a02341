// Acceptance checks. `acceptance N` runs criterion N, `acceptance` runs all;
// each prints one PASS/FAIL line and the exit status is non-zero on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "endoreloc/config.hpp"
#include "endoreloc/harness.hpp"
#include "endoreloc/localization.hpp"
#include "endoreloc/matching.hpp"
#include "endoreloc/pca.hpp"
#include "endoreloc/svm.hpp"
#include "naive_descriptors.hpp"

using namespace endoreloc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<int> distribution(int zeros, int ones, int twos) {
  std::vector<int> s;
  s.insert(s.end(), zeros, 0);
  s.insert(s.end(), ones, 1);
  s.insert(s.end(), twos, 2);
  return s;
}

RgbImage random_image(std::uint64_t seed, int w, int h) {
  std::mt19937_64 rng(seed);
  RgbImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng() & 0xff);
  return img;
}

Outcome statistics_oracle() {
  const Stopwatch t;
  const auto lbp = compute_stats(distribution(5, 8, 47));
  const auto em = compute_stats(distribution(16, 19, 25));
  const double secs = t.seconds();
  const bool ok = std::abs(lbp.avg_score - 1.700) <= 1e-3 && std::abs(lbp.std_dev - 0.619) <= 1e-3 &&
                  std::abs(em.avg_score - 1.150) <= 1e-3 && secs < 1.0;
  return {ok, fmt("MLBP/hsv avg %.4f std %.4f; EM-Based avg %.4f; %.3f s", lbp.avg_score, lbp.std_dev,
                  em.avg_score, secs)};
}

Outcome descriptor_oracle() {
  const Stopwatch t;
  double worst = 0.0;
  long inexact_counts = 0;
  bool lengths_ok = true;
  for (DescriptorFamily f : kAllFamilies) {
    const bool counting = f == DescriptorFamily::MLBP || f == DescriptorFamily::SWMLBP ||
                          f == DescriptorFamily::MLTP || f == DescriptorFamily::MLIOP;
    for (int i = 0; i < 20; ++i) {
      // Two levels of a 4x4 grid is the deepest pyramid whose cells stay 8 px on 64x64 input.
      DescriptorConfig cfg;
      cfg.family = f;
      cfg.pyramid_levels = 2;
      cfg.space = kAllColorSpaces[i % std::size(kAllColorSpaces)];
      const RgbImage img = random_image(1000 + i, 64, 64);
      const auto v = describe(img, cfg);
      const auto ref = naive::describe(img, cfg);
      if (v.length() != ref.size()) {
        lengths_ok = false;
        continue;
      }
      for (std::size_t k = 0; k < ref.size(); ++k) {
        worst = std::max(worst, std::abs(double(v.values[k]) - ref[k]));
        // Counting families normalize integer counts; both sides must round identically.
        if (counting && v.values[k] != static_cast<float>(ref[k])) ++inexact_counts;
      }
    }
  }
  const double secs = t.seconds();
  return {lengths_ok && worst <= 1e-6 && inexact_counts == 0 && secs < 60.0,
          fmt("7 families x 20 images; max |diff| %.3g; count mismatches %ld; %.1f s", worst, inexact_counts, secs)};
}

Outcome chi_squared_identities() {
  const Stopwatch t;
  std::mt19937_64 rng(5);
  long failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // Integer masses over a power-of-two total make the normalized values exact.
    const std::size_t n = 8 + rng() % 250;
    std::vector<float> a(n, 0.0f), b(n, 0.0f), x(n, 0.0f), y(n, 0.0f);
    auto fill = [&](std::vector<float>& h, std::size_t lo, std::size_t hi) {
      for (int m = 0; m < 1024; ++m) h[lo + rng() % (hi - lo)] += 1.0f;
      for (auto& v : h) v /= 1024.0f;
    };
    fill(a, 0, n);
    fill(b, 0, n);
    const std::size_t split = 1 + rng() % (n - 1);
    fill(x, 0, split);
    fill(y, split, n);
    if (chi_squared(a, a) != 0.0) ++failures;
    const double ab = chi_squared(a, b), ba = chi_squared(b, a);
    if (ab != ba) ++failures;
    if (chi_squared(x, y) != 1.0) ++failures;
  }
  const double secs = t.seconds();
  return {failures == 0 && secs < 5.0, fmt("1000 trials; failures %ld; %.3f s", failures, secs)};
}

Eigen::Quaterniond random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
}

Outcome registration() {
  const Stopwatch t;
  double worst_angle = 0.0, worst_translation = 0.0;
  std::vector<double> noisy_errors;
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    RigidTransform truth;
    truth.rotation = random_rotation(rng);
    truth.translation = Eigen::Vector3d(u(rng), u(rng), u(rng));
    std::vector<Eigen::Vector3d> src, dst, noisy;
    std::normal_distribution<double> noise(0.0, 0.1);
    for (int i = 0; i < 6; ++i) {
      src.emplace_back(u(rng), u(rng), u(rng));
      dst.push_back(truth.apply(src.back()));
      noisy.push_back(dst.back() + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
    }
    const RigidTransform est = register_landmarks(src, dst);
    worst_angle = std::max(worst_angle, rotation_angle_between(est.rotation, truth.rotation));
    worst_translation = std::max(worst_translation, (est.translation - truth.translation).norm());
    const RigidTransform rough = register_landmarks(src, noisy);
    noisy_errors.push_back((rough.translation - truth.translation).norm());
  }
  std::nth_element(noisy_errors.begin(), noisy_errors.begin() + 50, noisy_errors.end());
  const double median = noisy_errors[50];
  const double secs = t.seconds();
  return {worst_angle < 1e-9 && worst_translation < 1e-9 && median < 0.5 && secs < 10.0,
          fmt("noiseless max angle %.2e rad, max translation %.2e mm; sigma 0.1 median %.3f mm; %.2f s",
              worst_angle, worst_translation, median, secs)};
}

Settings default_settings() {
  Settings s;
  s.seed = 42;
  s.cv.seed = s.seed;
  return s;
}

std::vector<EvaluationPair> default_pairs(const Settings& s) {
  std::vector<EvaluationPair> pairs;
  for (int i = 0; i < s.n_pairs; ++i) {
    const auto p = generate_pair(s.seed + static_cast<std::uint64_t>(i), s.n_frames, s.em_noise_sigma_mm, s.synth);
    pairs.push_back(prepare_pair(p.a, p.b, p.truth, s.n_queries));
  }
  return pairs;
}

std::vector<LabeledIntervention> filter_training_sets(const Settings& s) {
  std::vector<LabeledIntervention> sets;
  for (int i = 0; i < s.filter_interventions; ++i)
    sets.push_back(label_intervention(
        generate_intervention(s.seed + 100000 + static_cast<std::uint64_t>(i), s.n_frames, s.synth), s.cv.descriptor));
  return sets;
}

Outcome end_to_end() {
  const Stopwatch t;
  const Settings s = default_settings();
  const auto sets = filter_training_sets(s);
  const FilterModel model = cross_validate(sets, s.cv).best_model;
  const auto pairs = default_pairs(s);

  EvalOptions opts;
  opts.descriptor = s.descriptor;
  opts.correct_roll = s.correct_roll;
  opts.filter = FilterMode::Model;
  opts.model = &model;
  std::vector<int> image, em;
  DescriptorCache cache;
  for (const auto& p : pairs) {
    for (const auto& o : evaluate_pair(p, apply_filter(p.database, opts), s.radius_mm, opts, cache)) {
      image.push_back(o.image_score);
      em.push_back(o.em_score);
    }
  }
  const double image_rate = retrieval_rate(image), em_rate = retrieval_rate(em);
  const double secs = t.seconds();
  return {image.size() == 90 && image_rate >= 85.0 && image_rate >= em_rate + 10.0 && secs < 300.0,
          fmt("%zu queries; image-based %.2f%% vs EM-only %.2f%%; %.0f s", image.size(), image_rate, em_rate, secs)};
}

Outcome radius_trend() {
  const Stopwatch t;
  const Settings s = default_settings();
  const auto pairs = default_pairs(s);
  const std::vector<double> radii{10.0, 70.0};
  EvalOptions opts;
  opts.descriptor = s.descriptor;
  const auto rows = sweep_radius(pairs, radii, opts);
  std::map<std::pair<std::string, double>, double> avg;
  for (const auto& r : rows) avg[{r.method, r.radius_mm}] = r.stats.avg_score;
  const double knn10 = avg[{"EM-kNN", 10.0}], knn70 = avg[{"EM-kNN", 70.0}];
  const double em10 = avg[{"EM-Based", 10.0}], em70 = avg[{"EM-Based", 70.0}];
  return {knn70 <= knn10 && em70 <= em10,
          fmt("EM-kNN avg %.3f at 10 mm, %.3f at 70 mm; EMNN %.3f / %.3f; %.0f s", knn10, knn70, em10, em70,
              t.seconds())};
}

Outcome filter_quality() {
  const Stopwatch t;
  const Settings s = default_settings();
  const auto sets = filter_training_sets(s);
  const CvResult cv = cross_validate(sets, s.cv);
  const double precision = cv.pooled.precision().value_or(0.0);
  const double recall = cv.pooled.recall().value_or(0.0);
  const double secs = t.seconds();
  return {sets.size() == 6 && precision >= 0.95 && recall >= 0.90 && secs < 180.0,
          fmt("leave-one-out over %zu interventions: precision %.4f recall %.4f (C=%g gamma=%g); %.0f s", sets.size(),
              precision, recall, cv.best_C, cv.best_gamma, secs)};
}

Outcome numerics() {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x(120, 5);
  std::vector<int> y(120);
  for (int i = 0; i < 120; ++i) {
    for (int j = 0; j < 5; ++j) x(i, j) = n(rng);
    y[i] = x(i, 0) * x(i, 1) + 0.3 * n(rng) > 0 ? 1 : -1;
  }
  SvmParams params;
  params.C = 10.0;
  params.gamma = 0.5;
  params.tolerance = 1e-8;
  const SvmTrainResult r = train_svm(x, y, params);
  double worst_decision = 0.0;
  for (int i = 0; i < 120; ++i) {
    double direct = r.model.bias;
    for (Eigen::Index k = 0; k < r.model.support_vectors.rows(); ++k)
      direct += r.model.coefficients[k] * rbf_kernel(r.model.support_vectors.row(k).transpose(),
                                                     x.row(i).transpose(), r.model.gamma);
    worst_decision = std::max(worst_decision, std::abs(direct - r.decision_values[i]));
  }

  Eigen::MatrixXd wide(30, 80), tall(200, 12);
  for (auto* m : {&wide, &tall})
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = n(rng);
  double worst_ortho = 0.0;
  for (const auto* m : {&wide, &tall}) {
    const PcaModel pca = fit_pca(*m, {0.999, 0});
    const Eigen::MatrixXd gram = pca.basis.transpose() * pca.basis;
    worst_ortho = std::max(worst_ortho, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
  }

  Eigen::MatrixXd xor_x(4, 2);
  xor_x << 0, 0, 1, 1, 0, 1, 1, 0;
  const std::vector<int> xor_y{-1, -1, 1, 1};
  SvmParams xor_params;
  xor_params.C = 100.0;
  xor_params.gamma = 1.0;
  const SvmModel xor_model = train_svm(xor_x, xor_y, xor_params).model;
  int xor_correct = 0;
  for (int i = 0; i < 4; ++i) xor_correct += xor_model.predict(xor_x.row(i).transpose()) == xor_y[i];

  return {worst_decision <= 1e-6 && worst_ortho <= 1e-8 && xor_correct == 4,
          fmt("SMO vs expansion %.2e; PCA orthonormality %.2e; XOR %d/4", worst_decision, worst_ortho, xor_correct)};
}

#ifdef ENDORELOC_CLI
std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + ENDORELOC_CLI + "\" " + args + " > /dev/null";
  return std::system(cmd.c_str());
}

Outcome determinism() {
  const Stopwatch t;
  const fs::path root = fs::temp_directory_path() / "endoreloc_acceptance_determinism";
  fs::remove_all(root);
  const std::string common =
      "--seed 7 --set synth.n_frames=30 --set synth.n_pairs=2 --set synth.image_size=64 "
      "--set filter.train_interventions=3 --set filter.c_grid=1,10 --set filter.gamma_grid=0.1,1 "
      "--set filter.selection_repetitions=2 --set eval.families=MLBP,MHOG --set eval.color_spaces=gs,hsv "
      "--set search.radii_mm=10,30 --set descriptor.pyramid_levels=2";
  std::vector<fs::path> runs;
  for (int run = 0; run < 2; ++run) {
    const fs::path out = root / ("run" + std::to_string(run));
    const std::string o = " --out \"" + out.string() + "\" ";
    const std::string pairs = " \"" + (out / "pair_7").string() + "\" \"" + (out / "pair_8").string() + "\"";
    const std::string model = " --model \"" + (out / "filter_model.bin").string() + "\"";
    for (const std::string& step : {common + o + "generate", common + o + "filter-train",
                                    common + o + "sweep-radius" + pairs + model,
                                    common + o + "sweep-combos" + pairs + model,
                                    common + o + "match \"" + (out / "pair_7").string() + "\" --frame 3" + model}) {
      if (run_cli(step) != 0) return {false, "CLI failed: " + step};
    }
    runs.push_back(out);
  }
  int compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(runs[0])) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    ++compared;
    differing += slurp(e.path()) != slurp(runs[1] / fs::relative(e.path(), runs[0]));
  }
  return {compared >= 7 && differing == 0,
          fmt("%d CSV files compared, %d differ; %.0f s", compared, differing, t.seconds())};
}
#else
Outcome determinism() { return {false, "built without the CLI"}; }
#endif

const std::vector<std::pair<std::string, std::function<Outcome()>>> kCriteria{
    {"statistics oracle", statistics_oracle},
    {"descriptor oracle equivalence", descriptor_oracle},
    {"chi-squared identities", chi_squared_identities},
    {"registration", registration},
    {"end-to-end retrieval improvement", end_to_end},
    {"radius-sweep trend", radius_trend},
    {"uninformative filter quality", filter_quality},
    {"SVM and PCA numerics", numerics},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(kCriteria.size())) {
      std::fprintf(stderr, "usage: acceptance [1-%zu]\n", kCriteria.size());
      return 2;
    }
    which.push_back(static_cast<std::size_t>(n - 1));
  } else {
    for (std::size_t i = 0; i < kCriteria.size(); ++i) which.push_back(i);
  }
  bool all = true;
  for (std::size_t i : which) {
    Outcome o;
    try {
      o = kCriteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("criterion %zu (%s): %s - %s\n", i + 1, kCriteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
