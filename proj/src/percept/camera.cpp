#include "partbench/percept/camera.hpp"

#include <cmath>

#include "partbench/common.hpp"

namespace partbench::percept {

void CameraSpec::validate() const {
  if (!(fx > 0) || !(fy > 0)) throw ConfigError("camera focal lengths must be positive");
  if (width < 16 || height < 16) throw ConfigError("camera resolution must be at least 16x16");
}

Vec3 CameraSpec::ray_dir(double u, double v) const {
  const Vec3 d((u - cx) / fx, (v - cy) / fy, 1.0);
  return (pose.linear() * d).normalized();
}

Vec3 CameraSpec::backproject(double u, double v, double range) const {
  return position() + range * ray_dir(u, v);
}

bool CameraSpec::project(const Vec3& p, double& u, double& v, double& range) const {
  const Vec3 c = pose.inverse() * p;
  if (c.z() <= 1e-12) return false;
  u = cx + fx * c.x() / c.z();
  v = cy + fy * c.y() / c.z();
  range = c.norm();
  return true;
}

CameraSpec CameraSpec::look_at(const Vec3& eye, const Vec3& target, double fov_deg, int w, int h) {
  CameraSpec cam;
  cam.width = w;
  cam.height = h;
  cam.cx = 0.5 * w;
  cam.cy = 0.5 * h;
  cam.fx = cam.fy = 0.5 * w / std::tan(0.5 * fov_deg * M_PI / 180.0);

  const Vec3 fwd = (target - eye).normalized();
  Vec3 up = Vec3::UnitZ();
  if (std::abs(fwd.dot(up)) > 0.99) up = Vec3::UnitX();
  const Vec3 right = fwd.cross(up).normalized();   // +x in image space
  const Vec3 down = fwd.cross(right).normalized(); // +y in image space
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = fwd;
  cam.pose = Pose::Identity();
  cam.pose.linear() = r;
  cam.pose.translation() = eye;
  cam.validate();
  return cam;
}

std::vector<CameraSpec> default_rig(const Vec3& center, double radius, int n_cameras, int resolution) {
  std::vector<CameraSpec> cams;
  const double fov = 62.0;
  if (n_cameras == 1) {
    cams.push_back(CameraSpec::look_at(center + radius * Vec3(1.2, 0.0, 0.9), center, fov, resolution, resolution));
    return cams;
  }
  if (n_cameras != 3) throw ConfigError("camera rig supports 1 or 3 cameras");
  cams.push_back(CameraSpec::look_at(center + radius * Vec3(0.25, 0.0, 1.35), center, fov, resolution, resolution));
  cams.push_back(CameraSpec::look_at(center + radius * Vec3(0.95, 0.95, 0.4), center, fov, resolution, resolution));
  cams.push_back(CameraSpec::look_at(center + radius * Vec3(0.95, -0.95, 0.4), center, fov, resolution, resolution));
  return cams;
}

}  // namespace partbench::percept
