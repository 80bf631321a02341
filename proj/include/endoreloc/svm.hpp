#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <vector>

namespace endoreloc {

struct SvmParams {
  double C = 1.0;
  double gamma = 0.1;
  double tolerance = 1e-3;       // KKT violation gap at termination
  bool balance_classes = true;   // per-class C scaled by n_minority / n_class
  std::size_t cache_rows = 2048; // kernel rows kept in the LRU cache
  long max_iterations = 10'000'000;
};

/// RBF-kernel binary classifier, f(x) = sum_i coef_i K(sv_i, x) + bias with
/// K(x, y) = exp(-gamma |x - y|^2) and coef_i = alpha_i * y_i.
struct SvmModel {
  Eigen::MatrixXd support_vectors;  // rows
  Eigen::VectorXd coefficients;
  double bias = 0.0;
  double gamma = 0.1;
  double C = 1.0;

  int dimension() const { return static_cast<int>(support_vectors.cols()); }
  double decision(const Eigen::VectorXd& x) const;
  int predict(const Eigen::VectorXd& x) const { return decision(x) >= 0.0 ? 1 : -1; }
};

double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma);

struct SvmTrainResult {
  SvmModel model;
  Eigen::VectorXd alpha;
  /// Training-set decision values maintained by the solver's gradient.
  Eigen::VectorXd decision_values;
  long iterations = 0;
  double objective = 0.0;  // dual objective 0.5 a'Qa - e'a
};

/// Soft-margin dual solved by sequential minimal optimization with maximal
/// violating pair working-set selection. Labels must be +1 / -1 and both present.
SvmTrainResult train_svm(const Eigen::MatrixXd& samples, std::span<const int> labels,
                         const SvmParams& params);

}  // namespace endoreloc
