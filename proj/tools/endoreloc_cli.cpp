// Command-line front end for the relocalization pipeline.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "endoreloc/config.hpp"
#include "endoreloc/harness.hpp"
#include "endoreloc/png_io.hpp"

namespace fs = std::filesystem;
using namespace endoreloc;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out = "out";
  std::vector<std::string> set;  // key=value overrides
};

Settings resolve_settings(const Globals& g) {
  Settings s = g.config.empty() ? Settings{} : load_settings(g.config);
  for (const auto& kv : g.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
    apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (g.seed) s.seed = *g.seed;
  s.cv.seed = s.seed;
  return s;
}

std::vector<EvaluationPair> load_or_generate_pairs(const Settings& s, const std::vector<std::string>& dirs) {
  std::vector<EvaluationPair> pairs;
  if (!dirs.empty()) {
    for (const auto& d : dirs) {
      const LoadedPair p = load_pair(d);
      pairs.push_back(prepare_pair(p.a, p.b, p.truth, s.n_queries));
    }
    return pairs;
  }
  for (int i = 0; i < s.n_pairs; ++i) {
    const SyntheticPair p = generate_pair(s.seed + static_cast<std::uint64_t>(i), s.n_frames, s.em_noise_sigma_mm, s.synth);
    pairs.push_back(prepare_pair(p.a, p.b, p.truth, s.n_queries));
  }
  return pairs;
}

CvResult train_filter_from(const Settings& s, const std::vector<std::string>& manifests) {
  std::vector<LabeledIntervention> sets;
  if (manifests.empty()) {
    for (int i = 0; i < s.filter_interventions; ++i) {
      const Intervention iv =
          generate_intervention(s.seed + 100000 + static_cast<std::uint64_t>(i), s.n_frames, s.synth);
      sets.push_back(label_intervention(iv, s.cv.descriptor));
    }
  } else {
    for (const auto& m : manifests) sets.push_back(label_intervention(load_intervention(m), s.cv.descriptor));
  }
  return cross_validate(sets, s.cv);
}

void write_cv_csv(const CvResult& cv, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << "C,gamma,mean_f1\n";
  for (const auto& g : cv.grid) out << format_double(g.C) << "," << format_double(g.gamma) << "," << format_double(g.mean_f1) << "\n";
  out << "fold,tp,fp,fn,tn\n";
  for (std::size_t f = 0; f < cv.folds.size(); ++f)
    out << f << "," << cv.folds[f].tp << "," << cv.folds[f].fp << "," << cv.folds[f].fn << "," << cv.folds[f].tn << "\n";
  out << "pooled," << cv.pooled.tp << "," << cv.pooled.fp << "," << cv.pooled.fn << "," << cv.pooled.tn << "\n";
}

std::optional<FilterModel> filter_for(const Settings& s, const std::string& model_path) {
  if (!model_path.empty()) return load_filter_model(model_path, s.cv.descriptor.fingerprint());
  if (!s.filter_enabled) return std::nullopt;
  return train_filter_from(s, {}).best_model;
}

EvalOptions eval_options(const Settings& s, const std::optional<FilterModel>& model) {
  EvalOptions o;
  o.descriptor = s.descriptor;
  o.correct_roll = s.correct_roll;
  if (model) {
    o.filter = FilterMode::Model;
    o.model = &*model;
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Endoscopic view-point relocalization toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Base random seed");
  app.add_option("--config", g.config, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--set", g.set, "Override one setting, key=value (repeatable)");

  auto* cfg_cmd = app.add_subcommand("config", "Print the effective settings");

  auto* gen = app.add_subcommand("generate", "Write synthetic intervention pairs with ground truth");

  auto* ext = app.add_subcommand("extract", "Compute a descriptor cache for one intervention");
  std::string ext_manifest;
  ext->add_option("manifest", ext_manifest, "manifest.csv")->required()->check(CLI::ExistingFile);

  auto* ftrain = app.add_subcommand("filter-train", "Cross-validate and train the uninformative-frame filter");
  std::vector<std::string> ftrain_manifests;
  ftrain->add_option("manifests", ftrain_manifests, "Labeled manifests (synthetic data when omitted)");

  auto* fapply = app.add_subcommand("filter-apply", "Classify the frames of an intervention");
  std::string fapply_model, fapply_manifest;
  fapply->add_option("--model", fapply_model, "Filter model file")->required()->check(CLI::ExistingFile);
  fapply->add_option("manifest", fapply_manifest, "manifest.csv")->required()->check(CLI::ExistingFile);

  auto* match = app.add_subcommand("match", "Find the best view-point for one query frame");
  std::string match_pair, match_model;
  std::int64_t match_frame = 0;
  match->add_option("pair", match_pair, "Pair directory written by generate")->required()->check(CLI::ExistingDirectory);
  match->add_option("--frame", match_frame, "Query frame id")->required();
  match->add_option("--model", match_model, "Filter model file")->check(CLI::ExistingFile);

  auto* sweep_r = app.add_subcommand("sweep-radius", "Average scores over increasing search radii");
  auto* sweep_c = app.add_subcommand("sweep-combos", "Rank descriptor and color-space combinations");
  std::vector<std::string> sweep_pairs;
  std::string sweep_model;
  for (auto* sub : {sweep_r, sweep_c}) {
    sub->add_option("pairs", sweep_pairs, "Pair directories (synthetic data when omitted)");
    sub->add_option("--model", sweep_model, "Filter model file (trained on the fly when omitted)")->check(CLI::ExistingFile);
  }

  auto* stats = app.add_subcommand("stats", "Statistics of a score file");
  std::string stats_file;
  stats->add_option("scores", stats_file, "CSV with a score column")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    const Settings s = resolve_settings(g);
    const fs::path out = g.out;
    fs::create_directories(out);

    if (*cfg_cmd) {
      std::cout << dump_settings(s);
    } else if (*gen) {
      for (int i = 0; i < s.n_pairs; ++i) {
        const std::uint64_t seed = s.seed + static_cast<std::uint64_t>(i);
        const SyntheticPair p = generate_pair(seed, s.n_frames, s.em_noise_sigma_mm, s.synth);
        const fs::path dir = out / ("pair_" + std::to_string(seed));
        write_pair(p, dir);
        std::cout << dir.string() << "\n";
      }
    } else if (*ext) {
      const Intervention iv = load_intervention(ext_manifest);
      DescriptorCacheFile cache;
      cache.fingerprint = s.descriptor.fingerprint();
      for (const auto& f : iv.frames) {
        DescriptorVector v = describe(f.image, s.descriptor);
        cache.length = static_cast<std::uint32_t>(v.length());
        cache.vectors.emplace(f.frame_id, std::move(v.values));
      }
      const fs::path path = out / (iv.intervention_id + ".erdc");
      write_descriptor_cache(path, cache);
      std::cout << path.string() << "\n";
    } else if (*ftrain) {
      const CvResult cv = train_filter_from(s, ftrain_manifests);
      save_filter_model(cv.best_model, out / "filter_model.bin");
      write_cv_csv(cv, out / "filter_cv.csv");
      std::printf("C=%g gamma=%g precision=%.4f recall=%.4f\n", cv.best_C, cv.best_gamma,
                  cv.pooled.precision().value_or(0.0), cv.pooled.recall().value_or(0.0));
    } else if (*fapply) {
      const FilterModel model = load_filter_model(fapply_model, s.cv.descriptor.fingerprint());
      const Intervention iv = load_intervention(fapply_manifest);
      const Eigen::MatrixXd features = frame_features(iv.frames, model.descriptor);
      std::ofstream csv(out / "filter_predictions.csv", std::ios::binary);
      csv << "intervention,frame_id,decision,predicted\n";
      for (std::size_t i = 0; i < iv.frames.size(); ++i) {
        const double d = model.decision(features.row(static_cast<Eigen::Index>(i)).transpose());
        csv << iv.intervention_id << "," << iv.frames[i].frame_id << "," << format_double(d) << ","
            << (d > 0.0 ? "uninformative" : "informative") << "\n";
      }
    } else if (*match) {
      const LoadedPair lp = load_pair(match_pair);
      EvaluationPair pair = prepare_pair(lp.a, lp.b, lp.truth, 1);
      const auto it = std::find_if(pair.query.frames.begin(), pair.query.frames.end(),
                                   [&](const Frame& f) { return f.frame_id == match_frame; });
      if (it == pair.query.frames.end()) throw Error("query frame " + std::to_string(match_frame) + " not found");
      pair.queries = {static_cast<std::size_t>(it - pair.query.frames.begin())};
      const auto model = match_model.empty() ? std::nullopt : filter_for(s, match_model);
      const EvalOptions opts = eval_options(s, model);
      DescriptorCache cache;
      const auto outcome = evaluate_pair(pair, apply_filter(pair.database, opts), s.radius_mm, opts, cache).front();
      std::vector<ResultRow> rows;
      if (outcome.report) rows = outcome.report->rows();
      for (auto& r : rows) r.score = pair.truth.score(r.query.frame_id, r.match.frame_id);
      save_results(rows, out / "match.csv");
      std::printf("query %lld -> %s/%lld (score %d); EMNN %lld (score %d); k=%zu\n",
                  static_cast<long long>(match_frame), outcome.image_match.intervention_id.c_str(),
                  static_cast<long long>(outcome.image_match.frame_id), outcome.image_score,
                  static_cast<long long>(outcome.em_match.frame_id), outcome.em_score, outcome.k);
    } else if (*sweep_r || *sweep_c) {
      const auto pairs = load_or_generate_pairs(s, sweep_pairs);
      const auto model = filter_for(s, sweep_model);
      const EvalOptions opts = eval_options(s, model);
      if (*sweep_r) {
        const auto rows = sweep_radius(pairs, s.radii, opts);
        write_radius_csv(rows, out / "sweep_radius.csv");
      } else {
        const auto rows = sweep_combos(pairs, s.families, s.spaces, s.radius_mm, opts);
        write_combos_csv(rows, out / "sweep_combos.csv");
      }
    } else if (*stats) {
      const std::vector<int> scores = read_scores(stats_file);
      ComboStats st = compute_stats(scores);
      st.descriptor = fs::path(stats_file).stem().string();
      st.space = "-";
      const std::vector<ComboStats> rows{st};
      write_stats_csv(rows, out / "stats.csv");
      std::printf("n=%zu avg=%.3f std=%.3f zeros=%.2f%% ones=%.2f%% twos=%.2f%%\n", st.n, st.avg_score, st.std_dev,
                  st.pct_zeros, st.pct_ones, st.pct_twos);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
