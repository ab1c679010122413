#include "partbench/percept/render.hpp"

namespace partbench::percept {

std::vector<RenderBox> scene_boxes(const sim::ArticulatedObject& obj,
                                   const std::vector<Pose>& link_poses,
                                   const sim::GripperState& grip) {
  std::vector<RenderBox> out;

  std::vector<int8_t> link_tag(obj.links.size(), kTagNone);
  for (const auto& part : obj.parts) {
    if (part.part_class == sim::PartClass::Handle) continue;
    if (part.id == obj.target_part_id) link_tag[size_t(part.link)] = kTagTargetPart;
  }

  for (size_t l = 0; l < obj.links.size(); ++l) {
    RenderBox rb;
    rb.box.center = link_poses[l].translation();
    rb.box.axes = link_poses[l].linear();
    rb.box.half = obj.links[l].half_extents;
    rb.color = obj.links[l].color;
    rb.tag = link_tag[l];
    out.push_back(rb);
  }

  for (const auto& part : obj.parts) {
    if (part.part_class != sim::PartClass::Handle) continue;
    RenderBox rb;
    rb.box = part.local.transformed(link_poses[size_t(part.link)]);
    rb.color = part.color;
    rb.tag = kTagHandle;
    out.push_back(rb);
  }

  // gripper: palm plus two fingers reaching toward the tips
  const Vec3 grip_color(0.15, 0.15, 0.18);
  const double finger_half = 0.006;
  RenderBox palm;
  palm.box.center = grip.pose * Vec3(0, 0.02, 0);
  palm.box.axes = grip.pose.linear();
  palm.box.half = Vec3(0.5 * grip.finger_width + 2.0 * finger_half, 0.02, 0.016);
  palm.color = grip_color;
  out.push_back(palm);
  for (double side : {-1.0, 1.0}) {
    RenderBox finger;
    finger.box.center = grip.pose * Vec3(side * (0.5 * grip.finger_width + finger_half),
                                         -0.5 * grip.tip_forward_offset, 0.0);
    finger.box.axes = grip.pose.linear();
    finger.box.half = Vec3(finger_half, 0.5 * grip.tip_forward_offset, 0.012);
    finger.color = grip_color;
    out.push_back(finger);
  }
  return out;
}

DepthColorImage raycast_depth(const std::vector<RenderBox>& boxes, const CameraSpec& camera) {
  camera.validate();
  DepthColorImage img;
  img.width = camera.width;
  img.height = camera.height;
  const size_t n = size_t(camera.width) * size_t(camera.height);
  img.depth.assign(n, -1.0);
  img.color.assign(n, Vec3::Zero());
  img.tag.assign(n, kTagNone);

  const Vec3 origin = camera.position();
  for (int iy = 0; iy < camera.height; ++iy) {
    for (int ix = 0; ix < camera.width; ++ix) {
      const Vec3 dir = camera.ray_dir(ix + 0.5, iy + 0.5);
      double best = std::numeric_limits<double>::infinity();
      const RenderBox* hit = nullptr;
      for (const auto& rb : boxes) {
        double t;
        if (ray_obb(origin, dir, rb.box, t) && t < best) {
          best = t;
          hit = &rb;
        }
      }
      if (hit) {
        const size_t idx = size_t(iy) * size_t(camera.width) + size_t(ix);
        img.depth[idx] = best;
        img.color[idx] = hit->color;
        img.tag[idx] = hit->tag;
      }
    }
  }
  return img;
}

}  // namespace partbench::percept
