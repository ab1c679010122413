#pragma once

#include <vector>

#include "partbench/geometry.hpp"

namespace partbench::percept {

// Pinhole camera, OpenCV axes: +z optical axis, +x right, +y down. `pose`
// maps camera coordinates to world coordinates. Depth is the Euclidean range
// along the (unit) ray, so a point at pixel (cx, cy) with depth d sits at
// position + d * optical_axis.
struct CameraSpec {
  Pose pose = Pose::Identity();
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  void validate() const;
  Vec3 position() const { return pose.translation(); }
  Vec3 optical_axis() const { return pose.linear().col(2); }
  // world-space unit ray through continuous pixel coordinates (u, v)
  Vec3 ray_dir(double u, double v) const;
  Vec3 backproject(double u, double v, double range) const;
  // world point -> pixel + range; false when behind the camera
  bool project(const Vec3& p, double& u, double& v, double& range) const;

  static CameraSpec look_at(const Vec3& eye, const Vec3& target, double fov_deg, int w, int h);
};

// Camera rig around the scene: one camera above facing down plus one on each
// side facing the object. n_cameras = 1 keeps only a single oblique front
// view.
std::vector<CameraSpec> default_rig(const Vec3& center, double radius, int n_cameras, int resolution);

}  // namespace partbench::percept
