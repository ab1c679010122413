#pragma once

#include <optional>
#include <string>
#include <vector>

#include "partbench/common.hpp"
#include "partbench/geometry.hpp"

namespace partbench::sim {

enum class JointKind { Hinge, Slider };

// Axis and anchor live in the parent-link frame. The joint motion transform
// pre-multiplies the child's rest pose-in-parent:
//   hinge : T(anchor) * R(axis, q) * T(-anchor)
//   slider: T(axis * q)
struct JointSpec {
  JointKind kind = JointKind::Hinge;
  Vec3 axis = Vec3::UnitZ();
  Vec3 anchor = Vec3::Zero();
  double lo = 0.0, hi = 1.0;
  double stiffness = 20.0;
  double damping = 200.0;
  double friction = 5.0;
  double recovery_force = 0.1;
  int parent = -1;
  int child = -1;

  Pose motion(double q) const;
  void validate() const;
};

enum class PartClass { Handle, Button, Door, Drawer, Lid };

const char* part_class_name(PartClass c);
PartClass part_class_from_name(const std::string& s);

// A part is an oriented box riding on a link; its world bounding box moves
// with the link. The local y-axis is the part's outward normal.
struct Part {
  int id = -1;
  PartClass part_class = PartClass::Handle;
  int link = -1;
  Obb local;       // in link frame
  Vec3 color = Vec3::Zero();
};

// World-frame part bounding box snapshot: 8 corners under the fixed corner
// convention (see Obb), plus identity.
struct PartBBox {
  std::array<Vec3, 8> corners;
  PartClass part_class = PartClass::Handle;
  int part_id = -1;

  Vec3 center() const;
  // Unit edge directions at corner 0 (x, y, z of the convention).
  Mat3 edge_axes() const;
  Vec3 half_extents() const;
};

PartBBox make_part_bbox(const Part& part, const Pose& link_world);

struct Link {
  std::string name;
  Vec3 half_extents = Vec3::Zero();
  Pose pose_in_parent = Pose::Identity();  // rest pose
  Vec3 color = Vec3::Zero();
  int parent = -1;  // -1 for the base link
};

enum class TaskClass { OpenDoor, OpenDrawer, CloseDoor, CloseDrawer, PressButton, GraspHandle };

const char* task_class_name(TaskClass t);
TaskClass task_class_from_name(const std::string& s);

// Kinematic tree of box links, rooted at links[0]. Parts ride on links.
struct ArticulatedObject {
  std::string category;
  TaskClass task_class = TaskClass::OpenDoor;
  uint64_t seed = 0;
  std::vector<Link> links;
  std::vector<JointSpec> joints;   // joints[j] drives joint coordinate q[j]
  std::vector<Part> parts;
  int target_part_id = -1;
  std::optional<int> paired_handle_id;

  // World pose per link for joint coordinates q (size = joints.size()).
  std::vector<Pose> link_poses(const Eigen::VectorXd& q) const;
  PartBBox part_bbox(int part_id, const std::vector<Pose>& poses) const;
  const Part& part(int part_id) const;
  // Joint index whose child subtree carries the part (-1 if on the base).
  int joint_of_part(int part_id) const;
  int num_joints() const { return int(joints.size()); }

  void validate() const;
  bool operator==(const ArticulatedObject& other) const;
};

}  // namespace partbench::sim
