#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace endoreloc {

struct KMeansResult {
  Eigen::MatrixXd centers;        // k x d
  std::vector<int> assignment;    // per sample
  int iterations = 0;
  bool converged = false;
};

/// Lloyd iterations from k-means++ seeding; stops when assignments are stable
/// or after max_iterations. Rows of `samples` are points.
KMeansResult kmeans(const Eigen::MatrixXd& samples, int k, std::uint64_t seed, int max_iterations = 100);

/// Per class, clusters ceil(fraction * n) centers and returns the distinct
/// sample nearest to each center (indices into that class's rows).
std::vector<std::vector<std::size_t>> select_representatives(std::span<const Eigen::MatrixXd> per_class,
                                                             double fraction, std::uint64_t seed);

}  // namespace endoreloc
