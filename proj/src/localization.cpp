#include "endoreloc/localization.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace endoreloc {

Pose RigidTransform::apply(const Pose& pose) const {
  Pose out = pose;
  out.position = apply(pose.position);
  out.orientation = (rotation * pose.orientation).normalized();
  return out;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.conjugate();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::operator*(const RigidTransform& other) const {
  RigidTransform out;
  out.rotation = (rotation * other.rotation).normalized();
  out.translation = rotation * other.translation + translation;
  return out;
}

double rotation_angle_between(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const Eigen::Quaterniond d = a.conjugate() * b;
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

double wrap_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

namespace {

// Eigenvalues of the centered scatter, ascending.
Eigen::Vector3d scatter_spectrum(std::span<const Eigen::Vector3d> pts, const Eigen::Vector3d& centroid) {
  Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
  for (const auto& p : pts) s += (p - centroid) * (p - centroid).transpose();
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(s, Eigen::EigenvaluesOnly).eigenvalues();
}

void require_spread(std::span<const Eigen::Vector3d> pts, const Eigen::Vector3d& centroid,
                    const char* which) {
  const Eigen::Vector3d ev = scatter_spectrum(pts, centroid);
  const double largest = ev(2);
  const double middle = ev(1);
  const double ratio = largest > 0.0 ? middle / largest : 0.0;
  if (!(largest > 0.0) || ratio < 1e-12) {
    std::ostringstream msg;
    msg << "degenerate landmark configuration: " << which
        << " points are collinear (scatter eigenvalue ratio " << ratio << ")";
    throw Error(msg.str());
  }
}

}  // namespace

RigidTransform register_landmarks(std::span<const Eigen::Vector3d> source,
                                  std::span<const Eigen::Vector3d> target) {
  if (source.size() != target.size()) throw Error("landmark sets differ in size");
  if (source.size() < 3) throw Error("registration needs at least 3 landmark pairs");

  Eigen::Vector3d cs = Eigen::Vector3d::Zero(), ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cs += source[i];
    ct += target[i];
  }
  cs /= static_cast<double>(source.size());
  ct /= static_cast<double>(target.size());
  require_spread(source, cs, "source");
  require_spread(target, ct, "target");

  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) m += (source[i] - cs) * (target[i] - ct).transpose();

  const double sxx = m(0, 0), sxy = m(0, 1), sxz = m(0, 2);
  const double syx = m(1, 0), syy = m(1, 1), syz = m(1, 2);
  const double szx = m(2, 0), szy = m(2, 1), szz = m(2, 2);
  Eigen::Matrix4d n;
  n << sxx + syy + szz, syz - szy, szx - sxz, sxy - syx,
       syz - szy, sxx - syy - szz, sxy + syx, szx + sxz,
       szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy,
       sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz;

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(n);
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  RigidTransform t;
  t.rotation = Eigen::Quaterniond(q(0), q(1), q(2), q(3)).normalized();
  if (t.rotation.w() < 0.0) t.rotation.coeffs() *= -1.0;
  t.translation = ct - t.rotation * cs;
  return t;
}

RigidTransform register_interventions(const Intervention& moving, const Intervention& fixed) {
  std::map<std::string, Eigen::Vector3d> fixed_by_name;
  for (const auto& lm : fixed.landmarks) fixed_by_name[lm.name] = lm.position;
  std::vector<Eigen::Vector3d> src, dst;
  for (const auto& lm : moving.landmarks) {
    const auto it = fixed_by_name.find(lm.name);
    if (it == fixed_by_name.end()) continue;
    src.push_back(lm.position);
    dst.push_back(it->second);
  }
  if (src.size() < 3)
    throw Error("registration needs at least 3 shared landmark names, found " + std::to_string(src.size()));
  return register_landmarks(src, dst);
}

Intervention transformed(const Intervention& intervention, const RigidTransform& transform) {
  Intervention out = intervention;
  for (auto& lm : out.landmarks) lm.position = transform.apply(lm.position);
  for (auto& f : out.frames) f.pose = transform.apply(f.pose);
  return out;
}

std::vector<Neighbor> knn_within_radius(const Eigen::Vector3d& query, const Intervention& trajectory,
                                        const SearchConfig& cfg) {
  if (!(cfg.radius_mm > 0.0)) throw Error("search radius must be positive");
  std::vector<Neighbor> hits;
  for (std::size_t i = 0; i < trajectory.frames.size(); ++i) {
    const double d = (trajectory.frames[i].pose.position - query).norm();
    if (d <= cfg.radius_mm) hits.push_back({i, trajectory.frames[i].frame_id, d});
  }
  std::sort(hits.begin(), hits.end(), [&](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    const double ta = trajectory.frames[a.index].pose.timestamp;
    const double tb = trajectory.frames[b.index].pose.timestamp;
    if (ta != tb) return ta < tb;
    return a.frame_id < b.frame_id;
  });
  if (hits.size() > cfg.max_k) hits.resize(cfg.max_k);
  return hits;
}

double relative_roll(const Pose& a, const Pose& b) {
  const Eigen::Quaterniond rel = (a.orientation.conjugate() * b.orientation).normalized();
  // Twist component about local z.
  if (rel.w() == 0.0 && rel.z() == 0.0) return 0.0;
  return wrap_angle(2.0 * std::atan2(rel.z(), rel.w()));
}

RgbImage rotate_image(const RgbImage& image, double angle) {
  RgbImage out(image.width, image.height);
  if (image.empty()) return out;
  const double cx = 0.5 * (image.width - 1), cy = 0.5 * (image.height - 1);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double dx = x - cx, dy = y - cy;
      double sx = cx + c * dx - s * dy;
      double sy = cy + s * dx + c * dy;
      sx = std::clamp(sx, 0.0, static_cast<double>(image.width - 1));
      sy = std::clamp(sy, 0.0, static_cast<double>(image.height - 1));
      const int x0 = std::min(static_cast<int>(sx), image.width - 1);
      const int y0 = std::min(static_cast<int>(sy), image.height - 1);
      const int x1 = std::min(x0 + 1, image.width - 1), y1 = std::min(y0 + 1, image.height - 1);
      const double ax = sx - x0, ay = sy - y0;
      std::uint8_t* dst = out.at(x, y);
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - ax) * image.at(x0, y0)[ch] + ax * image.at(x1, y0)[ch];
        const double bottom = (1.0 - ax) * image.at(x0, y1)[ch] + ax * image.at(x1, y1)[ch];
        const double v = (1.0 - ay) * top + ay * bottom;
        dst[ch] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace endoreloc
