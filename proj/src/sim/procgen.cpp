#include "partbench/sim/procgen.hpp"

#include <cmath>

namespace partbench::sim {

namespace {

struct Range {
  double lo, hi;
  double draw(Rng& rng) const { return rng.uniform(lo, hi); }
};

enum class HandleStyle { VBar, HBar, Knob };

Vec3 draw_base_color(Rng& rng) {
  const double v = rng.uniform(0.3, 0.65);
  return Vec3(v + rng.uniform(-0.05, 0.05), v + rng.uniform(-0.05, 0.05), v + rng.uniform(-0.05, 0.05));
}

Vec3 draw_panel_color(Rng& rng) {
  return Vec3(rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9));
}

Vec3 draw_handle_color(Rng& rng) {
  static const Vec3 accents[] = {
      {0.85, 0.15, 0.10}, {0.10, 0.35, 0.85}, {0.10, 0.70, 0.25}, {0.95, 0.80, 0.10}, {0.90, 0.45, 0.10}};
  Vec3 c = accents[size_t(rng.uniform_int(0, 4))];
  for (int i = 0; i < 3; ++i) c[i] = std::clamp(c[i] + rng.uniform(-0.05, 0.05), 0.0, 1.0);
  return c;
}

Mat3 axes_from_xy(const Vec3& ax, const Vec3& ay) {
  Mat3 m;
  m.col(0) = ax;
  m.col(1) = ay;
  m.col(2) = ax.cross(ay);
  return m;
}

// Part axes conventions (link frame): the y column is always the outward
// normal of the part face.
Mat3 front_panel_axes() { return axes_from_xy(Vec3::UnitZ(), Vec3::UnitX()); }   // doors, drawers, buttons
Mat3 top_panel_axes() { return axes_from_xy(Vec3::UnitY(), Vec3::UnitZ()); }     // lids
Mat3 vbar_axes() { return axes_from_xy(Vec3::UnitZ(), Vec3::UnitX()); }
Mat3 hbar_axes() { return axes_from_xy(Vec3::UnitY(), Vec3::UnitX()); }
Mat3 lid_bar_axes() { return axes_from_xy(Vec3::UnitY(), Vec3::UnitZ()); }

// Bar/knob handle riding a front panel, centered at `at` in the link frame.
Part make_front_handle(int id, HandleStyle style, const Vec3& at, Rng& rng, const Vec3& color) {
  Part h;
  h.id = id;
  h.part_class = PartClass::Handle;
  h.local.center = at;
  const double thick = rng.uniform(0.009, 0.012);
  const double depth = rng.uniform(0.009, 0.012);
  switch (style) {
    case HandleStyle::VBar:
      h.local.axes = vbar_axes();
      h.local.half = Vec3(rng.uniform(0.045, 0.07), depth, thick);
      break;
    case HandleStyle::HBar:
      h.local.axes = hbar_axes();
      h.local.half = Vec3(rng.uniform(0.045, 0.07), depth, thick);
      break;
    case HandleStyle::Knob:
      h.local.axes = vbar_axes();
      h.local.half = Vec3(rng.uniform(0.014, 0.02), depth, thick);
      break;
  }
  h.color = color;
  return h;
}

// Flips a hinge axis so that positive joint motion moves the probe part's
// center toward +`want` in world space.
void orient_hinge(ArticulatedObject& obj, int joint_idx, int probe_part, const Vec3& want) {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(obj.num_joints());
  const Vec3 c0 = obj.part_bbox(probe_part, obj.link_poses(q)).center();
  q[joint_idx] = 0.02;
  const Vec3 c1 = obj.part_bbox(probe_part, obj.link_poses(q)).center();
  if ((c1 - c0).dot(want) < 0.0) obj.joints[size_t(joint_idx)].axis = -obj.joints[size_t(joint_idx)].axis;
}

struct DoorOpts {
  Range W, H, D, z0, y0;
  double hinge_side;  // +1: hinge at +y edge
  HandleStyle style;
};

ArticulatedObject gen_door(Rng& rng, const DoorOpts& o) {
  ArticulatedObject obj;
  const double W = o.W.draw(rng), H = o.H.draw(rng), D = o.D.draw(rng);
  const double z0 = o.z0.draw(rng), y0 = o.y0.draw(rng);
  const double td = rng.uniform(0.018, 0.025);
  const double gap = 0.002;

  Link base;
  base.name = "base";
  base.half_extents = Vec3(D / 2, W / 2, H / 2);
  base.pose_in_parent = Pose::Identity();
  base.pose_in_parent.translation() = Vec3(-D / 2, y0, z0 + H / 2);
  base.color = draw_base_color(rng);
  obj.links.push_back(base);

  const double Wd = W - rng.uniform(0.04, 0.08);
  const double Hd = H - rng.uniform(0.04, 0.08);
  Link door;
  door.name = "door";
  door.half_extents = Vec3(td / 2, Wd / 2, Hd / 2);
  door.pose_in_parent = Pose::Identity();
  door.pose_in_parent.translation() = Vec3(D / 2 + gap + td / 2, 0, 0);
  door.color = draw_panel_color(rng);
  door.parent = 0;
  obj.links.push_back(door);

  JointSpec j;
  j.kind = JointKind::Hinge;
  j.axis = Vec3::UnitZ();
  j.anchor = Vec3(D / 2 + gap + td / 2, o.hinge_side * Wd / 2, 0);
  j.lo = 0.0;
  j.hi = M_PI / 2;
  j.parent = 0;
  j.child = 1;
  obj.joints.push_back(j);

  Part panel;
  panel.id = 0;
  panel.part_class = PartClass::Door;
  panel.link = 1;
  panel.local.center = Vec3::Zero();
  panel.local.axes = front_panel_axes();
  panel.local.half = Vec3(Hd / 2, td / 2, Wd / 2);
  panel.color = door.color;
  obj.parts.push_back(panel);

  const double standoff = rng.uniform(0.02, 0.032);
  const double hy = -o.hinge_side * (Wd / 2 - rng.uniform(0.05, 0.08));
  const Vec3 at(td / 2 + standoff, hy, rng.uniform(-0.05, 0.05) * Hd);
  Part handle = make_front_handle(1, o.style, at, rng, draw_handle_color(rng));
  handle.link = 1;
  obj.parts.push_back(handle);

  obj.target_part_id = 0;
  obj.paired_handle_id = 1;
  orient_hinge(obj, 0, 1, Vec3::UnitX());
  return obj;
}

struct DrawerOpts {
  Range W, H, D, z0, y0, height_ratio;
  HandleStyle style;
};

ArticulatedObject gen_drawer(Rng& rng, const DrawerOpts& o) {
  ArticulatedObject obj;
  const double W = o.W.draw(rng), H = o.H.draw(rng), D = o.D.draw(rng);
  const double z0 = o.z0.draw(rng), y0 = o.y0.draw(rng);
  const double ratio = o.height_ratio.draw(rng);
  const double td = rng.uniform(0.018, 0.025);
  const double gap = 0.002;

  Link base;
  base.name = "base";
  base.half_extents = Vec3(D / 2, W / 2, H / 2);
  base.pose_in_parent = Pose::Identity();
  base.pose_in_parent.translation() = Vec3(-D / 2, y0, z0 + H / 2);
  base.color = draw_base_color(rng);
  obj.links.push_back(base);

  const double Wp = W - rng.uniform(0.04, 0.08);
  const double Hp = rng.uniform(0.16, 0.22);
  Link drawer;
  drawer.name = "drawer";
  drawer.half_extents = Vec3(td / 2, Wp / 2, Hp / 2);
  drawer.pose_in_parent = Pose::Identity();
  drawer.pose_in_parent.translation() = Vec3(D / 2 + gap + td / 2, 0, (ratio - 0.5) * H);
  drawer.color = draw_panel_color(rng);
  drawer.parent = 0;
  obj.links.push_back(drawer);

  JointSpec j;
  j.kind = JointKind::Slider;
  j.axis = Vec3::UnitX();
  j.anchor = Vec3::Zero();
  j.lo = 0.0;
  j.hi = rng.uniform(0.5, 0.62) * D;
  j.parent = 0;
  j.child = 1;
  obj.joints.push_back(j);

  Part panel;
  panel.id = 0;
  panel.part_class = PartClass::Drawer;
  panel.link = 1;
  panel.local.center = Vec3::Zero();
  panel.local.axes = front_panel_axes();
  panel.local.half = Vec3(Hp / 2, td / 2, Wp / 2);
  panel.color = drawer.color;
  obj.parts.push_back(panel);

  const double standoff = rng.uniform(0.02, 0.032);
  const Vec3 at(td / 2 + standoff, rng.uniform(-0.08, 0.08) * Wp, 0);
  Part handle = make_front_handle(1, o.style, at, rng, draw_handle_color(rng));
  handle.link = 1;
  obj.parts.push_back(handle);

  obj.target_part_id = 0;
  obj.paired_handle_id = 1;
  return obj;
}

struct ButtonOpts {
  Range W, H, D, z0, y0, face_ratio;
};

ArticulatedObject gen_button(Rng& rng, const ButtonOpts& o) {
  ArticulatedObject obj;
  const double W = o.W.draw(rng), H = o.H.draw(rng), D = o.D.draw(rng);
  const double z0 = o.z0.draw(rng), y0 = o.y0.draw(rng);
  const double ratio = o.face_ratio.draw(rng);

  Link base;
  base.name = "base";
  base.half_extents = Vec3(D / 2, W / 2, H / 2);
  base.pose_in_parent = Pose::Identity();
  base.pose_in_parent.translation() = Vec3(-D / 2, y0, z0 + H / 2);
  base.color = draw_base_color(rng);
  obj.links.push_back(base);

  const double bd = rng.uniform(0.012, 0.016);  // protrusion half-depth
  const double bw = rng.uniform(0.014, 0.022);
  Link button;
  button.name = "button";
  button.half_extents = Vec3(bd, bw, bw);
  button.pose_in_parent = Pose::Identity();
  button.pose_in_parent.translation() =
      Vec3(D / 2 + bd, rng.uniform(-0.25, 0.25) * W, (ratio - 0.5) * H);
  button.color = draw_handle_color(rng);
  button.parent = 0;
  obj.links.push_back(button);

  JointSpec j;
  j.kind = JointKind::Slider;
  j.axis = -Vec3::UnitX();  // positive coordinate pushes the button in
  j.anchor = Vec3::Zero();
  j.lo = 0.0;
  j.hi = rng.uniform(0.7, 0.9) * 2.0 * bd;
  j.parent = 0;
  j.child = 1;
  obj.joints.push_back(j);

  Part face;
  face.id = 0;
  face.part_class = PartClass::Button;
  face.link = 1;
  face.local.center = Vec3::Zero();
  face.local.axes = front_panel_axes();
  face.local.half = Vec3(bw, bd, bw);
  face.color = button.color;
  obj.parts.push_back(face);

  obj.target_part_id = 0;
  obj.paired_handle_id.reset();
  return obj;
}

struct LidOpts {
  Range W, H, D, z0, y0;
  HandleStyle style;
};

ArticulatedObject gen_lid(Rng& rng, const LidOpts& o) {
  ArticulatedObject obj;
  const double W = o.W.draw(rng), H = o.H.draw(rng), D = o.D.draw(rng);
  const double z0 = o.z0.draw(rng), y0 = o.y0.draw(rng);
  const double t = rng.uniform(0.018, 0.025);
  const double gap = 0.002;

  Link base;
  base.name = "base";
  base.half_extents = Vec3(D / 2, W / 2, H / 2);
  base.pose_in_parent = Pose::Identity();
  // front face still at x = 0: body sits behind it like the cabinets
  base.pose_in_parent.translation() = Vec3(-D / 2, y0, z0 + H / 2);
  base.color = draw_base_color(rng);
  obj.links.push_back(base);

  Link lid;
  lid.name = "lid";
  lid.half_extents = Vec3(D / 2, W / 2, t / 2);
  lid.pose_in_parent = Pose::Identity();
  lid.pose_in_parent.translation() = Vec3(0, 0, H / 2 + gap + t / 2);
  lid.color = draw_panel_color(rng);
  lid.parent = 0;
  obj.links.push_back(lid);

  JointSpec j;
  j.kind = JointKind::Hinge;
  j.axis = Vec3::UnitY();
  j.anchor = Vec3(-D / 2, 0, H / 2 + gap + t / 2);
  j.lo = 0.0;
  j.hi = M_PI / 2;
  j.parent = 0;
  j.child = 1;
  obj.joints.push_back(j);

  Part panel;
  panel.id = 0;
  panel.part_class = PartClass::Lid;
  panel.link = 1;
  panel.local.center = Vec3::Zero();
  panel.local.axes = top_panel_axes();
  panel.local.half = Vec3(W / 2, t / 2, D / 2);
  panel.color = lid.color;
  obj.parts.push_back(panel);

  Part handle;
  handle.id = 1;
  handle.part_class = PartClass::Handle;
  handle.link = 1;
  const double standoff = rng.uniform(0.02, 0.032);
  const double thick = rng.uniform(0.009, 0.012);
  const double depth = rng.uniform(0.009, 0.012);
  handle.local.center = Vec3(rng.uniform(0.0, 0.2) * D, 0, t / 2 + standoff);
  handle.local.axes = lid_bar_axes();
  const double len = o.style == HandleStyle::Knob ? rng.uniform(0.014, 0.02) : rng.uniform(0.045, 0.07);
  handle.local.half = Vec3(len, depth, thick);
  handle.color = draw_handle_color(rng);
  obj.parts.push_back(handle);

  obj.target_part_id = 0;
  obj.paired_handle_id = 1;
  orient_hinge(obj, 0, 1, Vec3::UnitZ());
  return obj;
}

}  // namespace

const std::vector<CategoryInfo>& category_registry() {
  static const std::vector<CategoryInfo> registry = {
      // doors (last entry is the conventional val-inter holdout)
      {"box_cabinet_door", {TaskClass::OpenDoor, TaskClass::CloseDoor}},
      {"microwave_door", {TaskClass::OpenDoor, TaskClass::CloseDoor}},
      {"mini_safe_door", {TaskClass::OpenDoor, TaskClass::CloseDoor}},
      {"tall_locker_door", {TaskClass::OpenDoor, TaskClass::CloseDoor}},
      // drawers
      {"box_cabinet_drawer", {TaskClass::OpenDrawer, TaskClass::CloseDrawer}},
      {"desk_drawer", {TaskClass::OpenDrawer, TaskClass::CloseDrawer}},
      {"nightstand_drawer", {TaskClass::OpenDrawer, TaskClass::CloseDrawer}},
      {"filing_drawer", {TaskClass::OpenDrawer, TaskClass::CloseDrawer}},
      // buttons
      {"appliance_button", {TaskClass::PressButton}},
      {"remote_slab_button", {TaskClass::PressButton}},
      {"kiosk_button", {TaskClass::PressButton}},
      {"wall_panel_button", {TaskClass::PressButton}},
      // lids
      {"bin_lid", {TaskClass::GraspHandle}},
      {"chest_lid", {TaskClass::GraspHandle}},
      {"cooker_lid", {TaskClass::GraspHandle}},
      {"crate_lid", {TaskClass::GraspHandle}},
  };
  return registry;
}

std::vector<std::string> categories_for_task(TaskClass t) {
  std::vector<std::string> out;
  for (const auto& c : category_registry())
    for (TaskClass ct : c.tasks)
      if (ct == t) out.push_back(c.name);
  return out;
}

bool category_supports(const std::string& category, TaskClass t) {
  for (const auto& c : category_registry())
    if (c.name == category)
      for (TaskClass ct : c.tasks)
        if (ct == t) return true;
  return false;
}

ArticulatedObject generate_object(uint64_t seed, const std::string& category, TaskClass task) {
  bool known = false;
  for (const auto& c : category_registry()) known = known || c.name == category;
  if (!known) throw ConfigError("unknown category: " + category);
  if (!category_supports(category, task))
    throw ConfigError("category " + category + " does not support task " + task_class_name(task));

  Rng rng(mix_seed(seed, std::hash<std::string>{}(category), uint64_t(task)));
  ArticulatedObject obj;

  if (category == "box_cabinet_door")
    obj = gen_door(rng, {{0.5, 0.7}, {0.7, 0.95}, {0.3, 0.42}, {0.0, 0.02}, {-0.05, 0.05}, -1.0, HandleStyle::VBar});
  else if (category == "microwave_door")
    obj = gen_door(rng, {{0.55, 0.75}, {0.35, 0.5}, {0.35, 0.45}, {0.35, 0.5}, {-0.05, 0.05}, -1.0, HandleStyle::HBar});
  else if (category == "mini_safe_door")
    obj = gen_door(rng, {{0.42, 0.55}, {0.42, 0.55}, {0.35, 0.45}, {0.2, 0.4}, {-0.05, 0.05}, 1.0, HandleStyle::Knob});
  else if (category == "tall_locker_door")
    obj = gen_door(rng, {{0.35, 0.5}, {1.2, 1.5}, {0.4, 0.5}, {0.0, 0.02}, {0.12, 0.28}, 1.0, HandleStyle::VBar});
  else if (category == "box_cabinet_drawer")
    obj = gen_drawer(rng, {{0.5, 0.7}, {0.75, 0.95}, {0.45, 0.6}, {0.0, 0.02}, {-0.05, 0.05}, {0.55, 0.72}, HandleStyle::HBar});
  else if (category == "desk_drawer")
    obj = gen_drawer(rng, {{0.8, 1.05}, {0.55, 0.68}, {0.5, 0.6}, {0.0, 0.02}, {-0.05, 0.05}, {0.68, 0.8}, HandleStyle::HBar});
  else if (category == "nightstand_drawer")
    obj = gen_drawer(rng, {{0.38, 0.48}, {0.45, 0.55}, {0.38, 0.45}, {0.0, 0.02}, {-0.05, 0.05}, {0.6, 0.75}, HandleStyle::Knob});
  else if (category == "filing_drawer")
    obj = gen_drawer(rng, {{0.4, 0.5}, {1.15, 1.35}, {0.5, 0.6}, {0.0, 0.02}, {0.18, 0.3}, {0.78, 0.86}, HandleStyle::HBar});
  else if (category == "appliance_button")
    obj = gen_button(rng, {{0.5, 0.7}, {0.7, 0.9}, {0.35, 0.45}, {0.0, 0.02}, {-0.05, 0.05}, {0.5, 0.7}});
  else if (category == "remote_slab_button")
    obj = gen_button(rng, {{0.25, 0.35}, {0.25, 0.35}, {0.12, 0.2}, {0.05, 0.1}, {-0.05, 0.05}, {0.45, 0.65}});
  else if (category == "kiosk_button")
    obj = gen_button(rng, {{0.3, 0.4}, {1.0, 1.3}, {0.3, 0.4}, {0.0, 0.02}, {-0.05, 0.05}, {0.6, 0.8}});
  else if (category == "wall_panel_button")
    obj = gen_button(rng, {{0.8, 1.0}, {0.9, 1.1}, {0.1, 0.15}, {0.25, 0.4}, {0.15, 0.3}, {0.55, 0.75}});
  else if (category == "bin_lid")
    obj = gen_lid(rng, {{0.4, 0.5}, {0.5, 0.65}, {0.4, 0.5}, {0.0, 0.02}, {-0.05, 0.05}, HandleStyle::HBar});
  else if (category == "chest_lid")
    obj = gen_lid(rng, {{0.7, 0.9}, {0.45, 0.55}, {0.45, 0.55}, {0.0, 0.02}, {-0.05, 0.05}, HandleStyle::HBar});
  else if (category == "cooker_lid")
    obj = gen_lid(rng, {{0.35, 0.45}, {0.35, 0.45}, {0.35, 0.45}, {0.1, 0.25}, {-0.05, 0.05}, HandleStyle::Knob});
  else if (category == "crate_lid")
    obj = gen_lid(rng, {{0.55, 0.7}, {0.75, 0.9}, {0.5, 0.6}, {0.0, 0.02}, {0.15, 0.28}, HandleStyle::HBar});
  else
    throw ConfigError("unhandled category: " + category);

  obj.category = category;
  obj.task_class = task;
  obj.seed = seed;
  obj.validate();
  return obj;
}

}  // namespace partbench::sim
