#include "partbench/sim/object.hpp"

#include <cmath>

namespace partbench::sim {

Pose JointSpec::motion(double q) const {
  Pose m = Pose::Identity();
  if (kind == JointKind::Hinge) {
    m.translate(anchor);
    m.rotate(Eigen::AngleAxisd(q, axis));
    m.translate(-anchor);
  } else {
    m.translate(axis * q);
  }
  return m;
}

void JointSpec::validate() const {
  if (std::abs(axis.norm() - 1.0) > 1e-9) throw GeometryError("joint axis not unit length");
  if (!(lo < hi)) throw GeometryError("joint limits must satisfy lo < hi");
}

const char* part_class_name(PartClass c) {
  switch (c) {
    case PartClass::Handle: return "handle";
    case PartClass::Button: return "button";
    case PartClass::Door: return "door";
    case PartClass::Drawer: return "drawer";
    case PartClass::Lid: return "lid";
  }
  return "?";
}

PartClass part_class_from_name(const std::string& s) {
  if (s == "handle") return PartClass::Handle;
  if (s == "button") return PartClass::Button;
  if (s == "door") return PartClass::Door;
  if (s == "drawer") return PartClass::Drawer;
  if (s == "lid") return PartClass::Lid;
  throw ConfigError("unknown part class: " + s);
}

const char* task_class_name(TaskClass t) {
  switch (t) {
    case TaskClass::OpenDoor: return "OpenDoor";
    case TaskClass::OpenDrawer: return "OpenDrawer";
    case TaskClass::CloseDoor: return "CloseDoor";
    case TaskClass::CloseDrawer: return "CloseDrawer";
    case TaskClass::PressButton: return "PressButton";
    case TaskClass::GraspHandle: return "GraspHandle";
  }
  return "?";
}

TaskClass task_class_from_name(const std::string& s) {
  if (s == "OpenDoor") return TaskClass::OpenDoor;
  if (s == "OpenDrawer") return TaskClass::OpenDrawer;
  if (s == "CloseDoor") return TaskClass::CloseDoor;
  if (s == "CloseDrawer") return TaskClass::CloseDrawer;
  if (s == "PressButton") return TaskClass::PressButton;
  if (s == "GraspHandle") return TaskClass::GraspHandle;
  throw ConfigError("unknown task class: " + s);
}

Vec3 PartBBox::center() const {
  Vec3 c = Vec3::Zero();
  for (const auto& p : corners) c += p;
  return c / 8.0;
}

Mat3 PartBBox::edge_axes() const {
  Mat3 a;
  a.col(0) = (corners[1] - corners[0]).normalized();
  a.col(1) = (corners[2] - corners[0]).normalized();
  a.col(2) = (corners[4] - corners[0]).normalized();
  return a;
}

Vec3 PartBBox::half_extents() const {
  return 0.5 * Vec3((corners[1] - corners[0]).norm(),
                    (corners[2] - corners[0]).norm(),
                    (corners[4] - corners[0]).norm());
}

PartBBox make_part_bbox(const Part& part, const Pose& link_world) {
  PartBBox out;
  const Obb world = part.local.transformed(link_world);
  out.corners = world.corners();
  out.part_class = part.part_class;
  out.part_id = part.id;
  return out;
}

std::vector<Pose> ArticulatedObject::link_poses(const Eigen::VectorXd& q) const {
  if (q.size() != Eigen::Index(joints.size())) throw ShapeError("joint vector size mismatch");
  std::vector<Pose> poses(links.size(), Pose::Identity());
  std::vector<char> done(links.size(), 0);
  done[0] = 1;
  // joints are authored parent-before-child, so one pass suffices
  for (size_t j = 0; j < joints.size(); ++j) {
    const JointSpec& js = joints[j];
    if (!done[size_t(js.parent)]) throw GeometryError("joint order violates tree");
    poses[size_t(js.child)] = poses[size_t(js.parent)] * js.motion(q[Eigen::Index(j)]) *
                              links[size_t(js.child)].pose_in_parent;
    done[size_t(js.child)] = 1;
  }
  for (size_t l = 1; l < links.size(); ++l)
    if (!done[l]) throw GeometryError("link not connected by any joint: " + links[l].name);
  return poses;
}

PartBBox ArticulatedObject::part_bbox(int part_id, const std::vector<Pose>& poses) const {
  const Part& p = part(part_id);
  return make_part_bbox(p, poses[size_t(p.link)]);
}

const Part& ArticulatedObject::part(int part_id) const {
  for (const Part& p : parts)
    if (p.id == part_id) return p;
  throw ConfigError("no part with id " + std::to_string(part_id));
}

int ArticulatedObject::joint_of_part(int part_id) const {
  const Part& p = part(part_id);
  // walk up from the part's link until a joint child is found
  int link = p.link;
  while (link > 0) {
    for (size_t j = 0; j < joints.size(); ++j)
      if (joints[j].child == link) return int(j);
    link = links[size_t(link)].parent;
  }
  return -1;
}

void ArticulatedObject::validate() const {
  if (links.empty()) throw GeometryError("object has no links");
  if (links[0].parent != -1) throw GeometryError("links[0] must be the base");
  for (const auto& j : joints) {
    j.validate();
    if (j.parent < 0 || j.parent >= int(links.size()) || j.child <= 0 || j.child >= int(links.size()))
      throw GeometryError("joint link ids out of range");
  }
  for (const auto& p : parts)
    if (p.link < 0 || p.link >= int(links.size())) throw GeometryError("part link out of range");
  if (target_part_id >= 0) part(target_part_id);
  // doors/drawers/lids carry exactly one handle on the same kinematic child
  for (const auto& p : parts) {
    if (p.part_class == PartClass::Door || p.part_class == PartClass::Drawer ||
        p.part_class == PartClass::Lid) {
      int handles = 0;
      for (const auto& h : parts)
        if (h.part_class == PartClass::Handle && h.link == p.link) ++handles;
      if (handles != 1)
        throw GeometryError(std::string(part_class_name(p.part_class)) +
                            " must carry exactly one handle, has " + std::to_string(handles));
    }
  }
  // base-rooted tree reachability
  (void)link_poses(Eigen::VectorXd::Zero(Eigen::Index(joints.size())));
}

bool ArticulatedObject::operator==(const ArticulatedObject& other) const {
  auto pose_eq = [](const Pose& a, const Pose& b) { return a.matrix() == b.matrix(); };
  if (category != other.category || task_class != other.task_class || seed != other.seed ||
      links.size() != other.links.size() || joints.size() != other.joints.size() ||
      parts.size() != other.parts.size() || target_part_id != other.target_part_id ||
      paired_handle_id != other.paired_handle_id)
    return false;
  for (size_t i = 0; i < links.size(); ++i) {
    const Link &a = links[i], &b = other.links[i];
    if (a.name != b.name || a.half_extents != b.half_extents || !pose_eq(a.pose_in_parent, b.pose_in_parent) ||
        a.color != b.color || a.parent != b.parent)
      return false;
  }
  for (size_t i = 0; i < joints.size(); ++i) {
    const JointSpec &a = joints[i], &b = other.joints[i];
    if (a.kind != b.kind || a.axis != b.axis || a.anchor != b.anchor || a.lo != b.lo || a.hi != b.hi ||
        a.stiffness != b.stiffness || a.damping != b.damping || a.friction != b.friction ||
        a.recovery_force != b.recovery_force || a.parent != b.parent || a.child != b.child)
      return false;
  }
  for (size_t i = 0; i < parts.size(); ++i) {
    const Part &a = parts[i], &b = other.parts[i];
    if (a.id != b.id || a.part_class != b.part_class || a.link != b.link ||
        a.local.center != b.local.center || a.local.axes != b.local.axes || a.local.half != b.local.half ||
        a.color != b.color)
      return false;
  }
  return true;
}

}  // namespace partbench::sim
