#include "partbench/geometry.hpp"

#include <cmath>

namespace partbench {

Mat3 euler_to_rot(const Vec3& abc) {
  return (Eigen::AngleAxisd(abc.z(), Vec3::UnitZ()) *
          Eigen::AngleAxisd(abc.y(), Vec3::UnitY()) *
          Eigen::AngleAxisd(abc.x(), Vec3::UnitX()))
      .toRotationMatrix();
}

Vec3 rot_to_euler(const Mat3& R) {
  // Inverse of Rz*Ry*Rx; gimbal-degenerate poses resolve with a = 0.
  Vec3 abc;
  abc.y() = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  if (std::abs(R(2, 0)) < 1.0 - 1e-12) {
    abc.x() = std::atan2(R(2, 1), R(2, 2));
    abc.z() = std::atan2(R(1, 0), R(0, 0));
  } else {
    abc.x() = 0.0;
    abc.z() = std::atan2(-R(0, 1), R(1, 1));
  }
  return abc;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) * 0.5;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

Mat3 rotate_toward(const Mat3& from, const Mat3& to, double max_step) {
  Eigen::AngleAxisd rel(from.transpose() * to);
  if (rel.angle() <= max_step) return to;
  return from * Eigen::AngleAxisd(max_step, rel.axis()).toRotationMatrix();
}

std::array<Vec3, 8> Obb::corners() const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Vec3 s((i & 1) ? half.x() : -half.x(),
                 (i & 2) ? half.y() : -half.y(),
                 (i & 4) ? half.z() : -half.z());
    out[i] = center + axes * s;
  }
  return out;
}

Obb Obb::transformed(const Pose& g) const {
  Obb out = *this;
  out.center = g * center;
  out.axes = g.linear() * axes;
  return out;
}

bool Obb::contains(const Vec3& p, double margin) const {
  const Vec3 local = axes.transpose() * (p - center);
  return std::abs(local.x()) <= half.x() + margin &&
         std::abs(local.y()) <= half.y() + margin &&
         std::abs(local.z()) <= half.z() + margin;
}

bool ray_obb(const Vec3& origin, const Vec3& dir, const Obb& box, double& t, double eps) {
  const Vec3 o = box.axes.transpose() * (origin - box.center);
  const Vec3 d = box.axes.transpose() * dir;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (std::abs(o[i]) > box.half[i]) return false;
      continue;
    }
    double t1 = (-box.half[i] - o[i]) / d[i];
    double t2 = (box.half[i] - o[i]) / d[i];
    if (t1 > t2) std::swap(t1, t2);
    t_near = std::max(t_near, t1);
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return false;
  }
  if (t_near <= eps) return false;  // origin inside or box behind
  t = t_near;
  return true;
}

}  // namespace partbench
