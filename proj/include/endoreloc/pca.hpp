#pragma once

#include <Eigen/Core>

namespace endoreloc {

/// Keeps the smallest number of components whose cumulative explained
/// variance reaches `variance_fraction`, unless `dimensions` > 0 fixes it.
struct PcaTarget {
  double variance_fraction = 0.95;
  int dimensions = 0;
};

struct PcaModel {
  Eigen::VectorXd mean;                // d
  Eigen::MatrixXd basis;               // d x m, orthonormal columns
  Eigen::VectorXd explained_variance;  // m, non-increasing
  double total_variance = 0.0;         // trace of the sample covariance

  int input_dim() const { return static_cast<int>(mean.size()); }
  int output_dim() const { return static_cast<int>(basis.cols()); }

  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd project_rows(const Eigen::MatrixXd& rows) const;
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& z) const;
};

/// Eigendecomposition of the mean-centered sample covariance (rows are
/// samples). Wide data (d > n) goes through the n x n Gram matrix, which has
/// the same non-zero spectrum.
PcaModel fit_pca(const Eigen::MatrixXd& samples, const PcaTarget& target = {});

}  // namespace endoreloc
