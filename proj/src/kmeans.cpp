#include "endoreloc/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "endoreloc/image.hpp"

namespace endoreloc {

namespace {

// Squared distances, samples x centers.
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x, const Eigen::VectorXd& x_norms,
                                  const Eigen::MatrixXd& centers) {
  Eigen::MatrixXd d = -2.0 * x * centers.transpose();
  d.colwise() += x_norms;
  d.rowwise() += centers.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& samples, int k, std::uint64_t seed, int max_iterations) {
  const auto n = samples.rows();
  if (k < 1 || k > n) throw Error("k-means needs 1 <= k <= number of samples");
  std::mt19937_64 rng(seed);

  // k-means++ seeding.
  std::vector<Eigen::Index> chosen;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  chosen.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  taken[chosen.back()] = true;
  Eigen::VectorXd nearest = (samples.rowwise() - samples.row(chosen.back())).rowwise().squaredNorm();
  while (static_cast<int>(chosen.size()) < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!taken[i]) total += nearest(i);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[i]) continue;
        pick = i;
        u -= nearest(i);
        if (u < 0.0) break;
      }
    } else {
      // Remaining points coincide with chosen centers.
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < n; ++i)
        if (!taken[i]) free.push_back(i);
      pick = free[std::uniform_int_distribution<std::size_t>(0, free.size() - 1)(rng)];
    }
    chosen.push_back(pick);
    taken[pick] = true;
    nearest = nearest.cwiseMin((samples.rowwise() - samples.row(pick)).rowwise().squaredNorm());
  }

  KMeansResult result;
  result.centers.resize(k, samples.cols());
  for (int j = 0; j < k; ++j) result.centers.row(j) = samples.row(chosen[j]);
  result.assignment.assign(static_cast<std::size_t>(n), -1);

  const Eigen::VectorXd norms = samples.rowwise().squaredNorm();
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd d = squared_distances(samples, norms, result.centers);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      d.row(i).minCoeff(&best);
      if (result.assignment[i] != best) {
        result.assignment[i] = static_cast<int>(best);
        changed = true;
      }
    }
    result.iterations = it + 1;
    if (!changed) {
      result.converged = true;
      break;
    }
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, samples.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(result.assignment[i]) += samples.row(i);
      ++counts[result.assignment[i]];
    }
    for (int j = 0; j < k; ++j)
      if (counts[j] > 0) result.centers.row(j) = sums.row(j) / counts[j];
  }
  return result;
}

std::vector<std::vector<std::size_t>> select_representatives(std::span<const Eigen::MatrixXd> per_class,
                                                             double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("representative fraction must be in (0, 1]");
  std::vector<std::vector<std::size_t>> selected;
  for (std::size_t c = 0; c < per_class.size(); ++c) {
    const Eigen::MatrixXd& x = per_class[c];
    if (x.rows() == 0) throw Error("representative selection on an empty class");
    const int k = std::clamp(static_cast<int>(std::ceil(fraction * static_cast<double>(x.rows()) - 1e-9)), 1,
                             static_cast<int>(x.rows()));
    const KMeansResult km = kmeans(x, k, seed + 7919 * c);
    std::vector<bool> used(static_cast<std::size_t>(x.rows()), false);
    std::vector<std::size_t> picks;
    for (int j = 0; j < k; ++j) {
      double best = std::numeric_limits<double>::infinity();
      Eigen::Index best_i = -1;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        if (used[i]) continue;
        const double d = (x.row(i) - km.centers.row(j)).squaredNorm();
        if (d < best) {
          best = d;
          best_i = i;
        }
      }
      used[best_i] = true;
      picks.push_back(static_cast<std::size_t>(best_i));
    }
    std::sort(picks.begin(), picks.end());
    selected.push_back(std::move(picks));
  }
  return selected;
}

}  // namespace endoreloc
