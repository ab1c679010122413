#pragma once

#include "partbench/sim/env.hpp"

namespace partbench::canon {

// Canonical frame of a part: origin at the bounding-box center, axes aligned
// to the box edges under the fixed corner convention. Scale is never applied.
struct PartFrame {
  Vec3 origin = Vec3::Zero();
  Mat3 axes = Mat3::Identity();  // in SO(3): orthonormal, det +1

  Vec3 to_local(const Vec3& p) const { return axes.transpose() * (p - origin); }
  Mat3 to_local(const Mat3& r) const { return axes.transpose() * r; }
};

// Recovers the frame from the 8 corners. The axes are orthonormalized from
// the edge directions at corner 0 and right-handed (z = x cross y).
// Degenerate boxes (a near-zero edge) are geometry errors.
PartFrame part_frame(const sim::PartBBox& bbox);

// Re-expresses every coordinate-dependent quantity of the state in the part
// frame: gripper position/rotation, all bbox corners, the embedded pose slots
// of qp, and the Cartesian linear-velocity components of qv. Scalar joint
// coordinates and velocities are untouched.
sim::EnvState canonicalize_state(const sim::EnvState& state, const PartFrame& frame);

}  // namespace partbench::canon
