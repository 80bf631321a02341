#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "endoreloc/dataset.hpp"

namespace endoreloc {

/// Proper rigid motion x -> R x + t (no scale).
struct RigidTransform {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
  Pose apply(const Pose& pose) const;
  RigidTransform inverse() const;
  /// (this * other)(x) = this(other(x)).
  RigidTransform operator*(const RigidTransform& other) const;

  static RigidTransform identity() { return {}; }
};

/// Angle of the rotation taking `a` to `b`, in [0, pi].
double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Least-squares rigid fit mapping `source[i]` onto `target[i]` (closed form,
/// unit-quaternion eigenvector of the cross-covariance profile matrix).
/// Throws on fewer than 3 pairs or a collinear configuration.
RigidTransform register_landmarks(std::span<const Eigen::Vector3d> source,
                                  std::span<const Eigen::Vector3d> target);

/// Pairs the two interventions' landmarks by name and fits moving -> fixed.
RigidTransform register_interventions(const Intervention& moving, const Intervention& fixed);

/// Same intervention with every pose and landmark mapped through `transform`.
Intervention transformed(const Intervention& intervention, const RigidTransform& transform);

struct SearchConfig {
  double radius_mm = 20.0;
  std::size_t max_k = std::numeric_limits<std::size_t>::max();
};

struct Neighbor {
  std::size_t index = 0;  // position in Intervention::frames
  std::int64_t frame_id = 0;
  double distance = 0.0;
};

/// Every frame within cfg.radius_mm of `query`, nearest first; ties broken by
/// (timestamp, frame_id). The first element is the EMNN. Linear scan.
std::vector<Neighbor> knn_within_radius(const Eigen::Vector3d& query, const Intervention& trajectory,
                                        const SearchConfig& cfg);

/// Roll about the local optical axis (+z) of a^-1 * b, wrapped to (-pi, pi].
double relative_roll(const Pose& a, const Pose& b);

/// Rotates image content counterclockwise (on screen) by `angle` radians about
/// the center; bilinear sampling with edge clamp.
RgbImage rotate_image(const RgbImage& image, double angle);

double wrap_angle(double angle);

}  // namespace endoreloc
