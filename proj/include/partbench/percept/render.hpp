#pragma once

#include "partbench/percept/camera.hpp"
#include "partbench/sim/env.hpp"

namespace partbench::percept {

// Mask tags carried through rendering for training-time losses. They never
// enter the policy input path.
enum : int8_t { kTagNone = 0, kTagTargetPart = 1, kTagHandle = 2 };

struct RenderBox {
  Obb box;
  Vec3 color = Vec3::Zero();
  int8_t tag = kTagNone;
};

struct DepthColorImage {
  int width = 0, height = 0;
  std::vector<double> depth;  // range along the unit ray; < 0 marks a miss
  std::vector<Vec3> color;
  std::vector<int8_t> tag;

  bool valid(int ix, int iy) const { return depth[size_t(iy) * size_t(width) + size_t(ix)] >= 0.0; }
};

// Scene geometry: link boxes (panels carry their part's tag, since the
// door/drawer/button/lid part box coincides with its link box), handle boxes,
// and the gripper's palm and finger boxes.
std::vector<RenderBox> scene_boxes(const sim::ArticulatedObject& obj,
                                   const std::vector<Pose>& link_poses,
                                   const sim::GripperState& grip);

// Nearest ray-box hit per pixel over all boxes; misses are invalid. A camera
// inside a box does not see that box (see ray_obb).
DepthColorImage raycast_depth(const std::vector<RenderBox>& boxes, const CameraSpec& camera);

}  // namespace partbench::percept
