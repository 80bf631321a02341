#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "endoreloc/dataset.hpp"
#include "endoreloc/descriptors.hpp"
#include "endoreloc/pca.hpp"
#include "endoreloc/svm.hpp"

namespace endoreloc {

/// Positive class is "uninformative" (+1); informative frames are -1.
inline constexpr int kUninformative = 1;
inline constexpr int kInformative = -1;

/// Confusion counts for the uninformative class.
struct FilterMetrics {
  long tp = 0, fp = 0, fn = 0, tn = 0;

  std::optional<double> precision() const;
  std::optional<double> recall() const;
  /// Undefined F1 (no positives at all, none predicted) counts as 1.
  double f1() const;
  FilterMetrics& operator+=(const FilterMetrics& other);
};

FilterMetrics score_predictions(std::span<const int> predicted, std::span<const int> truth);

/// mLBP on gray-scale with a coarse grid keeps k-means and PCA tractable.
DescriptorConfig default_filter_descriptor();

/// Descriptor -> PCA -> scale -> SVM.
struct FilterModel {
  DescriptorConfig descriptor = default_filter_descriptor();
  PcaModel pca;
  double feature_scale = 1.0;  // projections are multiplied by this
  SvmModel svm;

  Eigen::VectorXd embed(const Eigen::VectorXd& descriptor_values) const;
  double decision(const Eigen::VectorXd& descriptor_values) const;
  int predict(const Eigen::VectorXd& descriptor_values) const;
};

/// Descriptor matrix (rows = frames) for the filter's configuration.
Eigen::MatrixXd frame_features(std::span<const Frame> frames, const DescriptorConfig& cfg);

struct FilterTrainOptions {
  PcaTarget pca{};
  double representative_fraction = 0.25;
  bool select_representatives = true;
  double svm_tolerance = 1e-3;
  bool balance_classes = true;
};

/// Fits PCA on the (optionally k-means-selected) training rows, then the SVM.
FilterModel train_filter(const Eigen::MatrixXd& features, std::span<const int> labels, double C,
                         double gamma, const FilterTrainOptions& options, std::uint64_t seed,
                         const DescriptorConfig& descriptor = default_filter_descriptor());

std::vector<int> predict_rows(const FilterModel& model, const Eigen::MatrixXd& features);

struct LabeledIntervention {
  std::string intervention_id;
  Eigen::MatrixXd features;  // rows = frames
  std::vector<int> labels;   // kUninformative / kInformative
};

/// Builds a labeled set from an intervention; unlabeled frames are skipped.
LabeledIntervention label_intervention(const Intervention& intervention, const DescriptorConfig& cfg);

struct CvOptions {
  DescriptorConfig descriptor = default_filter_descriptor();  // recorded in the trained model
  std::vector<double> c_grid{1.0, 10.0, 100.0};
  std::vector<double> gamma_grid{0.01, 0.1, 1.0};
  FilterTrainOptions train{};
  int selection_repetitions = 5;
  std::uint64_t seed = 1;
};

struct GridPoint {
  double C = 0.0;
  double gamma = 0.0;
  double mean_f1 = 0.0;
  double mean_hinge = 0.0;  // held-out max(0, 1 - y f(x)), breaks F1 ties
  std::vector<FilterMetrics> folds;
  std::vector<double> fold_hinge;
};

struct CvResult {
  double best_C = 0.0;
  double best_gamma = 0.0;
  std::vector<GridPoint> grid;
  /// Per held-out intervention, summed over the selection repetitions.
  std::vector<FilterMetrics> folds;
  FilterMetrics pooled;
  FilterModel best_model;
  double best_model_f1 = 0.0;
};

/// Leave-one-intervention-out grid search on all descriptors (highest mean F1,
/// ties to the lowest mean hinge loss), then repeated k-means data selection
/// at the chosen parameters.
CvResult cross_validate(std::span<const LabeledIntervention> interventions, const CvOptions& options);

/// Indices of frames predicted informative, in input order.
std::vector<std::size_t> filter_frames(std::span<const Frame> frames, const FilterModel& model);

/// Copy of the intervention keeping only frames predicted informative.
Intervention filter_intervention(const Intervention& intervention, const FilterModel& model);

/// Binary, little-endian float64 payload after a header carrying dimensions,
/// gamma, C and the descriptor fingerprint.
void save_filter_model(const FilterModel& model, const std::filesystem::path& path);
FilterModel load_filter_model(const std::filesystem::path& path,
                              std::optional<std::uint64_t> expected_fingerprint = std::nullopt);

}  // namespace endoreloc
