#include "partbench/canon/frame.hpp"

namespace partbench::canon {

PartFrame part_frame(const sim::PartBBox& bbox) {
  const Vec3 ex = bbox.corners[1] - bbox.corners[0];
  const Vec3 ey = bbox.corners[2] - bbox.corners[0];
  if (ex.norm() < 1e-12 || ey.norm() < 1e-12 ||
      (bbox.corners[4] - bbox.corners[0]).norm() < 1e-12)
    throw GeometryError("degenerate part bounding box");
  PartFrame f;
  Vec3 c = Vec3::Zero();
  for (const auto& p : bbox.corners) c += p;
  f.origin = c / 8.0;
  const Vec3 x = ex.normalized();
  const Vec3 y = (ey - ey.dot(x) * x).normalized();
  f.axes.col(0) = x;
  f.axes.col(1) = y;
  f.axes.col(2) = x.cross(y);
  return f;
}

sim::EnvState canonicalize_state(const sim::EnvState& state, const PartFrame& frame) {
  sim::EnvState out = state;
  out.x = frame.to_local(state.x);
  out.r = frame.to_local(state.r);
  for (auto& bbox : out.b_gaparts)
    for (auto& corner : bbox.corners) corner = frame.to_local(corner);
  // qp embeds the gripper pose in slots [0..6): keep them consistent with x/r
  if (out.qp.size() >= 6) {
    out.qp.segment<3>(0) = out.x;
    out.qp.segment<3>(3) = rot_to_euler(out.r);
  }
  // Cartesian linear velocity rotates; Euler rates and joint velocities are
  // treated as scalars and stay as-is.
  if (out.qv.size() >= 3) out.qv.segment<3>(0) = frame.axes.transpose() * state.qv.segment<3>(0);
  return out;
}

}  // namespace partbench::canon
