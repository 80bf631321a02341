#include "endoreloc/pca.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

#include "endoreloc/image.hpp"

namespace endoreloc {

Eigen::VectorXd PcaModel::project(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) throw Error("PCA input dimension mismatch");
  return basis.transpose() * (x - mean);
}

Eigen::MatrixXd PcaModel::project_rows(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean.size()) throw Error("PCA input dimension mismatch");
  return (rows.rowwise() - mean.transpose()) * basis;
}

Eigen::VectorXd PcaModel::reconstruct(const Eigen::VectorXd& z) const { return mean + basis * z; }

PcaModel fit_pca(const Eigen::MatrixXd& samples, const PcaTarget& target) {
  const auto n = samples.rows();
  const auto d = samples.cols();
  if (n < 2) throw Error("PCA needs at least 2 samples");
  if (target.dimensions <= 0 && !(target.variance_fraction > 0.0 && target.variance_fraction <= 1.0))
    throw Error("PCA variance fraction must be in (0, 1]");

  PcaModel model;
  model.mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(n - 1);

  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // d x r
  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    values = eig.eigenvalues().reverse();
    vectors = eig.eigenvectors().rowwise().reverse();
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose() / denom;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    values = eig.eigenvalues().reverse();
    const Eigen::MatrixXd u = eig.eigenvectors().rowwise().reverse();
    const double floor = std::max(values(0), 0.0) * 1e-12;
    Eigen::Index usable = 0;
    while (usable < values.size() && values(usable) > floor) ++usable;
    vectors.resize(d, usable);
    for (Eigen::Index i = 0; i < usable; ++i)
      vectors.col(i) = centered.transpose() * u.col(i) / std::sqrt(denom * values(i));
    values.conservativeResize(usable);
  }

  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = std::max(values(i), 0.0);
  model.total_variance = centered.squaredNorm() / denom;
  if (!(model.total_variance > 0.0)) throw Error("PCA on data with zero variance");

  Eigen::Index m = 0;
  if (target.dimensions > 0) {
    m = std::min<Eigen::Index>(target.dimensions, values.size());
  } else {
    double cumulative = 0.0;
    while (m < values.size()) {
      cumulative += values(m);
      ++m;
      if (cumulative >= target.variance_fraction * model.total_variance * (1.0 - 1e-12)) break;
    }
  }
  m = std::max<Eigen::Index>(m, 1);

  // Re-orthonormalize; the Gram route loses a little orthogonality on small
  // eigenvalues.
  Eigen::MatrixXd basis = vectors.leftCols(m);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, m);
  for (Eigen::Index i = 0; i < m; ++i)
    if (q.col(i).dot(basis.col(i)) < 0.0) q.col(i) *= -1.0;
  model.basis = std::move(q);
  model.explained_variance = values.head(m);
  return model;
}

}  // namespace endoreloc
