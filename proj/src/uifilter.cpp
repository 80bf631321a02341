#include "endoreloc/uifilter.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "endoreloc/colorspace.hpp"
#include "endoreloc/kmeans.hpp"

namespace endoreloc {

std::optional<double> FilterMetrics::precision() const {
  if (tp + fp == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> FilterMetrics::recall() const {
  if (tp + fn == 0) return std::nullopt;
  return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double FilterMetrics::f1() const {
  if (tp + fp + fn == 0) return 1.0;
  return 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
}

FilterMetrics& FilterMetrics::operator+=(const FilterMetrics& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

FilterMetrics score_predictions(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw Error("prediction/label count mismatch");
  FilterMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i] == kUninformative, t = truth[i] == kUninformative;
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  return m;
}

DescriptorConfig default_filter_descriptor() {
  DescriptorConfig cfg;
  cfg.family = DescriptorFamily::MLBP;
  cfg.space = ColorSpace::GS;
  cfg.pyramid_levels = 3;
  cfg.grid = 2;
  return cfg;
}

Eigen::VectorXd FilterModel::embed(const Eigen::VectorXd& descriptor_values) const {
  if (descriptor_values.size() != pca.input_dim())
    throw Error("descriptor length " + std::to_string(descriptor_values.size()) +
                " does not match the filter model input dimension " + std::to_string(pca.input_dim()));
  return pca.project(descriptor_values) * feature_scale;
}

double FilterModel::decision(const Eigen::VectorXd& descriptor_values) const {
  return svm.decision(embed(descriptor_values));
}

int FilterModel::predict(const Eigen::VectorXd& descriptor_values) const {
  return decision(descriptor_values) >= 0.0 ? kUninformative : kInformative;
}

Eigen::MatrixXd frame_features(std::span<const Frame> frames, const DescriptorConfig& cfg) {
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const DescriptorVector v = describe(frames[i].image, cfg);
    if (i == 0) out.resize(static_cast<Eigen::Index>(frames.size()), static_cast<Eigen::Index>(v.length()));
    if (static_cast<Eigen::Index>(v.length()) != out.cols()) throw Error("frames of different sizes");
    for (std::size_t j = 0; j < v.length(); ++j) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v.values[j];
  }
  return out;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, std::span<const std::size_t> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

double scale_for(const PcaModel& pca) {
  const double retained = pca.explained_variance.sum();
  return retained > 0.0 ? 1.0 / std::sqrt(retained) : 1.0;
}

SvmParams svm_params(double C, double gamma, const FilterTrainOptions& o) {
  SvmParams p;
  p.C = C;
  p.gamma = gamma;
  p.tolerance = o.svm_tolerance;
  p.balance_classes = o.balance_classes;
  return p;
}

}  // namespace

FilterModel train_filter(const Eigen::MatrixXd& features, std::span<const int> labels, double C,
                         double gamma, const FilterTrainOptions& options, std::uint64_t seed,
                         const DescriptorConfig& descriptor) {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) throw Error("feature/label count mismatch");

  Eigen::MatrixXd train = features;
  std::vector<int> train_labels(labels.begin(), labels.end());
  if (options.select_representatives) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < labels.size(); ++i) (labels[i] == kUninformative ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) throw Error("filter training needs both classes (single-class input)");
    const std::vector<Eigen::MatrixXd> per_class{take_rows(features, pos), take_rows(features, neg)};
    const auto picks = select_representatives(per_class, options.representative_fraction, seed);
    std::vector<std::size_t> rows;
    train_labels.clear();
    for (std::size_t k : picks[0]) {
      rows.push_back(pos[k]);
      train_labels.push_back(kUninformative);
    }
    for (std::size_t k : picks[1]) {
      rows.push_back(neg[k]);
      train_labels.push_back(kInformative);
    }
    train = take_rows(features, rows);
  }

  FilterModel model;
  model.descriptor = descriptor;
  model.pca = fit_pca(train, options.pca);
  model.feature_scale = scale_for(model.pca);
  const Eigen::MatrixXd embedded = model.pca.project_rows(train) * model.feature_scale;
  model.svm = train_svm(embedded, train_labels, svm_params(C, gamma, options)).model;
  return model;
}

std::vector<int> predict_rows(const FilterModel& model, const Eigen::MatrixXd& features) {
  const Eigen::MatrixXd embedded = model.pca.project_rows(features) * model.feature_scale;
  std::vector<int> out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out[static_cast<std::size_t>(i)] = model.svm.decision(embedded.row(i).transpose()) >= 0.0 ? kUninformative : kInformative;
  return out;
}

LabeledIntervention label_intervention(const Intervention& intervention, const DescriptorConfig& cfg) {
  std::vector<Frame> labeled;
  LabeledIntervention out;
  out.intervention_id = intervention.intervention_id;
  for (const Frame& f : intervention.frames) {
    if (!f.label) continue;
    labeled.push_back(f);
    out.labels.push_back(*f.label == FrameLabel::Uninformative ? kUninformative : kInformative);
  }
  if (labeled.empty()) throw Error("intervention " + intervention.intervention_id + " has no labeled frames");
  out.features = frame_features(labeled, cfg);
  return out;
}

namespace {

struct Split {
  Eigen::MatrixXd train;
  std::vector<int> train_labels;
};

Split leave_out(std::span<const LabeledIntervention> sets, std::size_t held_out) {
  Eigen::Index rows = 0, cols = sets.front().features.cols();
  for (std::size_t k = 0; k < sets.size(); ++k)
    if (k != held_out) rows += sets[k].features.rows();
  Split s;
  s.train.resize(rows, cols);
  Eigen::Index r = 0;
  for (std::size_t k = 0; k < sets.size(); ++k) {
    if (k == held_out) continue;
    s.train.middleRows(r, sets[k].features.rows()) = sets[k].features;
    r += sets[k].features.rows();
    s.train_labels.insert(s.train_labels.end(), sets[k].labels.begin(), sets[k].labels.end());
  }
  return s;
}

}  // namespace

CvResult cross_validate(std::span<const LabeledIntervention> interventions, const CvOptions& options) {
  if (interventions.size() < 2) throw Error("cross-validation needs at least 2 interventions");
  if (options.c_grid.empty() || options.gamma_grid.empty()) throw Error("empty parameter grid");
  for (const auto& s : interventions) {
    if (s.features.cols() != interventions.front().features.cols())
      throw Error("interventions use different descriptor lengths");
    if (static_cast<std::size_t>(s.features.rows()) != s.labels.size())
      throw Error("feature/label count mismatch in " + s.intervention_id);
  }

  CvResult result;
  for (double C : options.c_grid)
    for (double gamma : options.gamma_grid) result.grid.push_back({C, gamma, 0.0, 0.0, {}, {}});

  // Parameter selection on all descriptors; PCA depends only on the fold.
  for (std::size_t f = 0; f < interventions.size(); ++f) {
    const Split s = leave_out(interventions, f);
    const PcaModel pca = fit_pca(s.train, options.train.pca);
    const double scale = scale_for(pca);
    const Eigen::MatrixXd train = pca.project_rows(s.train) * scale;
    const Eigen::MatrixXd test = pca.project_rows(interventions[f].features) * scale;
    for (GridPoint& g : result.grid) {
      const SvmModel svm = train_svm(train, s.train_labels, svm_params(g.C, g.gamma, options.train)).model;
      std::vector<int> pred(static_cast<std::size_t>(test.rows()));
      double hinge = 0.0;
      for (Eigen::Index i = 0; i < test.rows(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double d = svm.decision(test.row(i).transpose());
        pred[k] = d >= 0.0 ? kUninformative : kInformative;
        hinge += std::max(0.0, 1.0 - interventions[f].labels[k] * d);
      }
      g.folds.push_back(score_predictions(pred, interventions[f].labels));
      g.fold_hinge.push_back(hinge / static_cast<double>(std::max<Eigen::Index>(1, test.rows())));
    }
  }
  const GridPoint* best = nullptr;
  for (GridPoint& g : result.grid) {
    double sum = 0.0, hinge = 0.0;
    for (const auto& m : g.folds) sum += m.f1();
    for (double h : g.fold_hinge) hinge += h;
    g.mean_f1 = sum / static_cast<double>(g.folds.size());
    g.mean_hinge = hinge / static_cast<double>(g.fold_hinge.size());
    if (!best || g.mean_f1 > best->mean_f1 || (g.mean_f1 == best->mean_f1 && g.mean_hinge < best->mean_hinge))
      best = &g;
  }
  result.best_C = best->C;
  result.best_gamma = best->gamma;

  // Repeated data selection at the chosen parameters.
  FilterTrainOptions train_opts = options.train;
  train_opts.select_representatives = true;
  bool have_model = false;
  for (std::size_t f = 0; f < interventions.size(); ++f) {
    const Split s = leave_out(interventions, f);
    FilterMetrics fold;
    for (int r = 0; r < options.selection_repetitions; ++r) {
      const std::uint64_t seed = options.seed + 1'000'003ULL * static_cast<std::uint64_t>(r) + 97ULL * f;
      FilterModel model = train_filter(s.train, s.train_labels, result.best_C, result.best_gamma,
                                       train_opts, seed, options.descriptor);
      const FilterMetrics m = score_predictions(predict_rows(model, interventions[f].features),
                                                interventions[f].labels);
      fold += m;
      if (!have_model || m.f1() > result.best_model_f1) {
        result.best_model = std::move(model);
        result.best_model_f1 = m.f1();
        have_model = true;
      }
    }
    result.folds.push_back(fold);
    result.pooled += fold;
  }
  return result;
}

std::vector<std::size_t> filter_frames(std::span<const Frame> frames, const FilterModel& model) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const DescriptorVector v = describe(frames[i].image, model.descriptor);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXf>(v.values.data(),
                                                                static_cast<Eigen::Index>(v.length())).cast<double>();
    if (model.predict(x) == kInformative) kept.push_back(i);
  }
  return kept;
}

Intervention filter_intervention(const Intervention& intervention, const FilterModel& model) {
  Intervention out = intervention;
  out.frames.clear();
  for (std::size_t i : filter_frames(intervention.frames, model)) out.frames.push_back(intervention.frames[i]);
  return out;
}

// --- persistence -------------------------------------------------------------

namespace {

constexpr char kModelMagic[4] = {'E', 'R', 'U', 'F'};
constexpr std::uint32_t kModelVersion = 1;

template <class T>
void put(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw Error("truncated filter model file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_filter_model(const FilterModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write filter model '" + path.string() + "'");
  const auto d = static_cast<std::uint32_t>(model.pca.input_dim());
  const auto m = static_cast<std::uint32_t>(model.pca.output_dim());
  const auto nsv = static_cast<std::uint32_t>(model.svm.support_vectors.rows());
  os.write(kModelMagic, 4);
  put(os, kModelVersion);
  put(os, d);
  put(os, m);
  put(os, nsv);
  put(os, model.svm.gamma);
  put(os, model.svm.C);
  put(os, model.descriptor.fingerprint());
  const DescriptorConfig& c = model.descriptor;
  put<std::int32_t>(os, static_cast<std::int32_t>(c.family));
  put<std::int32_t>(os, static_cast<std::int32_t>(c.space));
  put<std::int32_t>(os, c.pyramid_levels);
  put<std::int32_t>(os, c.grid);
  put<std::int32_t>(os, c.sw_window);
  put<std::int32_t>(os, c.sw_stride);
  put<double>(os, c.ltp_threshold);
  put<std::int32_t>(os, c.liop_neighbors);
  put<std::int32_t>(os, c.hog_bins);

  for (std::uint32_t i = 0; i < d; ++i) put(os, model.pca.mean(i));
  for (std::uint32_t j = 0; j < m; ++j)
    for (std::uint32_t i = 0; i < d; ++i) put(os, model.pca.basis(i, j));
  for (std::uint32_t j = 0; j < m; ++j) put(os, model.pca.explained_variance(j));
  put(os, model.pca.total_variance);
  put(os, model.feature_scale);
  put(os, model.svm.bias);
  for (std::uint32_t k = 0; k < nsv; ++k) {
    put(os, model.svm.coefficients(k));
    for (std::uint32_t j = 0; j < m; ++j) put(os, model.svm.support_vectors(k, j));
  }
  if (!os) throw Error("I/O error writing filter model");
}

FilterModel load_filter_model(const std::filesystem::path& path, std::optional<std::uint64_t> expected_fingerprint) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open filter model '" + path.string() + "'");
  char magic[4];
  if (!is.read(magic, 4) || !std::equal(magic, magic + 4, kModelMagic)) throw Error("not a filter model file");
  if (get<std::uint32_t>(is) != kModelVersion) throw Error("unsupported filter model version");
  const auto d = get<std::uint32_t>(is);
  const auto m = get<std::uint32_t>(is);
  const auto nsv = get<std::uint32_t>(is);
  FilterModel model;
  model.svm.gamma = get<double>(is);
  model.svm.C = get<double>(is);
  const auto fingerprint = get<std::uint64_t>(is);
  DescriptorConfig& c = model.descriptor;
  c.family = static_cast<DescriptorFamily>(get<std::int32_t>(is));
  c.space = static_cast<ColorSpace>(get<std::int32_t>(is));
  c.pyramid_levels = get<std::int32_t>(is);
  c.grid = get<std::int32_t>(is);
  c.sw_window = get<std::int32_t>(is);
  c.sw_stride = get<std::int32_t>(is);
  c.ltp_threshold = get<double>(is);
  c.liop_neighbors = get<std::int32_t>(is);
  c.hog_bins = get<std::int32_t>(is);
  if (c.fingerprint() != fingerprint) throw Error("filter model header is inconsistent (fingerprint)");
  if (expected_fingerprint && *expected_fingerprint != fingerprint)
    throw Error("filter model was trained for a different descriptor configuration (fingerprint mismatch)");

  model.pca.mean.resize(d);
  for (std::uint32_t i = 0; i < d; ++i) model.pca.mean(i) = get<double>(is);
  model.pca.basis.resize(d, m);
  for (std::uint32_t j = 0; j < m; ++j)
    for (std::uint32_t i = 0; i < d; ++i) model.pca.basis(i, j) = get<double>(is);
  model.pca.explained_variance.resize(m);
  for (std::uint32_t j = 0; j < m; ++j) model.pca.explained_variance(j) = get<double>(is);
  model.pca.total_variance = get<double>(is);
  model.feature_scale = get<double>(is);
  model.svm.bias = get<double>(is);
  model.svm.support_vectors.resize(nsv, m);
  model.svm.coefficients.resize(nsv);
  for (std::uint32_t k = 0; k < nsv; ++k) {
    model.svm.coefficients(k) = get<double>(is);
    for (std::uint32_t j = 0; j < m; ++j) model.svm.support_vectors(k, j) = get<double>(is);
  }
  return model;
}

}  // namespace endoreloc
