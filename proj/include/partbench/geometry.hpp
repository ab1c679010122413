#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <array>

namespace partbench {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Pose = Eigen::Isometry3d;

// Euler convention used for 6-DoF actions and pose vectors: R = Rz(c)*Ry(b)*Rx(a),
// with each angle in (-pi, pi).
Mat3 euler_to_rot(const Vec3& abc);
Vec3 rot_to_euler(const Mat3& R);

// Geodesic angle between two rotations.
double rotation_angle(const Mat3& a, const Mat3& b);

// Rotate `from` toward `to` by at most `max_step` radians along the geodesic.
Mat3 rotate_toward(const Mat3& from, const Mat3& to, double max_step);

inline double wrap_pi(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a < -M_PI) a += 2.0 * M_PI;
  return a;
}

// Oriented box. Corner i carries bits (i&1, i>>1&1, i>>2&1) selecting the
// +/- face along the local x/y/z axes:
//   corner(i) = center + axes * (sign(bit) .* half_extents)
// so corner0 = center - axes*half, corner1 - corner0 || x-axis,
// corner2 - corner0 || y-axis, corner4 - corner0 || z-axis. The convention is
// preserved under rigid motion.
struct Obb {
  Vec3 center = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // columns are unit box axes
  Vec3 half = Vec3::Zero();

  std::array<Vec3, 8> corners() const;
  Obb transformed(const Pose& g) const;
  bool contains(const Vec3& p, double margin = 0.0) const;
};

// Ray/oriented-box intersection (slab test in the box frame). Returns true
// with the entering distance `t` when the ray origin is outside the box and
// hits it at t > eps. Origins inside a box do not see it (documented
// inside-hit convention: such boxes are skipped).
bool ray_obb(const Vec3& origin, const Vec3& dir, const Obb& box, double& t, double eps = 1e-9);

}  // namespace partbench
