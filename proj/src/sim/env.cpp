#include "partbench/sim/env.hpp"

#include <cmath>

namespace partbench::sim {

Action Action::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != kDim) throw ShapeError("action vector must have 7 entries");
  Action a;
  a.target_pos = v.segment<3>(0);
  a.target_euler = v.segment<3>(3);
  a.target_width = v[6];
  return a;
}

Eigen::VectorXd Action::to_vector() const {
  Eigen::VectorXd v(kDim);
  v.segment<3>(0) = target_pos;
  v.segment<3>(3) = target_euler;
  v[6] = target_width;
  return v;
}

void TaskSpec::validate() const {
  if (episode_length <= 0) throw ConfigError("episode_length must be positive");
  for (double th : {open_door_angle, open_drawer_frac, close_door_angle, close_drawer_ext, press_frac})
    if (!(th > 0.0)) throw ConfigError("success thresholds must be strictly positive");
}

canon::RewardWeights default_reward_weights(TaskClass t) {
  canon::RewardWeights w;
  switch (t) {
    case TaskClass::OpenDoor:    w = {0.2, 2.0, 1.0, 0.0, 1.0}; break;
    case TaskClass::OpenDrawer:  w = {0.2, 1.3, 1.0, 0.0, 2.0}; break;
    case TaskClass::CloseDoor:   w = {0.0, 1.0, 1.0, 0.0, 0.0}; break;
    case TaskClass::CloseDrawer: w = {0.0, 1.0, 1.0, 0.0, 0.0}; break;
    case TaskClass::PressButton: w = {0.0, 1.0, 100.0, 10.0, 0.0}; break;
    case TaskClass::GraspHandle: w = {0.2, 1.0, 0.0, 1.0, 0.0}; break;
  }
  return w;
}

TaskSpec make_task_spec(TaskClass t) {
  TaskSpec spec;
  spec.task_class = t;
  spec.weights = default_reward_weights(t);
  return spec;
}

// The z edge of a handle box is its grasp axis by the corner convention;
// the closing width must not exceed that extent (plus margin).
static double handle_thickness(const PartBBox& handle) { return 2.0 * handle.half_extents().z(); }

static bool tips_straddle(const GripperState& grip, const PartBBox& handle) {
  const Vec3 c = handle.center();
  const Vec3 thin = handle.edge_axes().col(2);
  const double l = (grip.tip_left() - c).dot(thin);
  const double r = (grip.tip_right() - c).dot(thin);
  return (l > 0.0) != (r > 0.0);
}

static bool center_inside(const GripperState& grip, const PartBBox& handle, double margin) {
  Obb box;
  box.center = handle.center();
  box.axes = handle.edge_axes();
  box.half = handle.half_extents();
  return box.contains(grip.tips_center(), margin);
}

bool is_attached(const GripperState& grip, const PartBBox& handle, double margin) {
  return center_inside(grip, handle, margin) && tips_straddle(grip, handle) &&
         grip.finger_width <= handle_thickness(handle) + margin;
}

static int find_target_joint(const ArticulatedObject& obj) {
  return obj.joint_of_part(obj.target_part_id);
}

bool check_success(const EnvState& state, const GripperState& grip,
                   const ArticulatedObject& obj, const TaskSpec& task, const SimParams& params) {
  const int tj = find_target_joint(obj);
  double q = 0.0, range = 0.0;
  if (tj >= 0) {
    q = state.joint_coords[tj];
    range = obj.joints[size_t(tj)].hi - obj.joints[size_t(tj)].lo;
  }
  switch (task.task_class) {
    case TaskClass::OpenDoor: return q > task.open_door_angle;
    case TaskClass::OpenDrawer: return q > task.open_drawer_frac * range;
    case TaskClass::CloseDoor: return q < task.close_door_angle;
    case TaskClass::CloseDrawer: return q < task.close_drawer_ext;
    case TaskClass::PressButton:
      return q > obj.joints[size_t(tj)].lo + task.press_frac * range;
    case TaskClass::GraspHandle: {
      const PartBBox* handle = nullptr;
      for (const auto& b : state.b_gaparts)
        if (b.part_class == PartClass::Handle) handle = &b;
      if (!handle) return false;
      return grip.finger_width < handle_thickness(*handle) + params.grasp_margin &&
             tips_straddle(grip, *handle) && center_inside(grip, *handle, 0.0);
    }
  }
  return false;
}

Env::Env(const ArticulatedObject* obj, TaskSpec task, SimParams params)
    : obj_(obj), task_(std::move(task)), params_(params) {
  obj_->validate();
  task_.validate();
  target_joint_ = find_target_joint(*obj_);
  const int used = 7 + obj_->num_joints();
  if (used > params_.n_q)
    throw ConfigError("n_q too small: need " + std::to_string(used));
  if (task_.task_class == TaskClass::CloseDoor && target_joint_ >= 0 &&
      obj_->joints[size_t(target_joint_)].hi < task_.close_door_init)
    throw ConfigError("door range below the configured initial opening angle");
}

double Env::target_joint_range() const {
  if (target_joint_ < 0) return 0.0;
  return obj_->joints[size_t(target_joint_)].hi - obj_->joints[size_t(target_joint_)].lo;
}

double Env::target_joint() const {
  return target_joint_ >= 0 ? q_[target_joint_] : 0.0;
}

const PartBBox& Env::grasp_bbox() const {
  return state_.b_gaparts.size() > 1 ? state_.b_gaparts[1] : state_.b_gaparts[0];
}

EnvState Env::reset(uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  episode_rng_ = Rng(mix_seed(episode_seed, 0x0b5e));
  success_ever_ = false;

  q_.setZero(obj_->num_joints());
  for (int j = 0; j < obj_->num_joints(); ++j) q_[j] = obj_->joints[size_t(j)].lo;
  if (target_joint_ >= 0) {
    const JointSpec& js = obj_->joints[size_t(target_joint_)];
    switch (task_.task_class) {
      case TaskClass::OpenDoor:
      case TaskClass::OpenDrawer:
      case TaskClass::PressButton:
      case TaskClass::GraspHandle:
        q_[target_joint_] = js.lo;
        break;
      case TaskClass::CloseDoor:
        q_[target_joint_] = task_.close_door_init;
        break;
      case TaskClass::CloseDrawer:
        q_[target_joint_] = std::min(task_.close_drawer_init, 0.9 * (js.hi - js.lo));
        break;
    }
  }
  q_rest_ = q_;

  poses_ = obj_->link_poses(q_);
  const PartBBox target = obj_->part_bbox(obj_->target_part_id, poses_);
  const Vec3 c = target.center();
  const Mat3 axes = target.edge_axes();

  grip_ = GripperState{};
  grip_.tip_forward_offset = params_.tip_forward_offset;
  grip_.finger_width = params_.finger_max_width;
  Mat3 g;
  g.col(0) = axes.col(2);   // finger separation tracks the grasp axis
  g.col(1) = axes.col(1);   // y points back along the part normal
  g.col(2) = -axes.col(0);
  Pose p = Pose::Identity();
  p.linear() = g;
  p.translation() = c + task_.init_distance * axes.col(1);
  grip_.pose = p;
  grip_.attached_part.reset();

  indicator_ = c;

  prev_qp_.setZero(params_.n_q);
  refresh_state();
  prev_qp_ = state_.qp;
  state_.qv.setZero(params_.n_q);
  state_.t = 0;
  prev_state_ = state_;
  return state_;
}

void Env::refresh_state() {
  poses_ = obj_->link_poses(q_);
  state_.x = grip_.pose.translation();
  state_.r = grip_.pose.linear();
  state_.b_gaparts.clear();
  state_.b_gaparts.push_back(obj_->part_bbox(obj_->target_part_id, poses_));
  if (obj_->paired_handle_id)
    state_.b_gaparts.push_back(obj_->part_bbox(*obj_->paired_handle_id, poses_));
  state_.joint_coords = q_;

  Eigen::VectorXd qp = Eigen::VectorXd::Zero(params_.n_q);
  qp.segment<3>(0) = state_.x;
  qp.segment<3>(3) = rot_to_euler(state_.r);
  qp[6] = grip_.finger_width;
  qp.segment(7, obj_->num_joints()) = q_;
  state_.qp = qp;

  Eigen::VectorXd qv = (qp - prev_qp_) / params_.dt;
  for (int i = 3; i < 6; ++i) qv[i] = wrap_pi(qp[i] - prev_qp_[i]) / params_.dt;
  state_.qv = qv;
}

void Env::apply_recovery(int skip_joint, double* delta_out) {
  for (int j = 0; j < obj_->num_joints(); ++j) {
    if (j == skip_joint) continue;
    const JointSpec& js = obj_->joints[size_t(j)];
    const double pull = std::min(1.0, js.recovery_force * params_.dt);
    double dq = (q_rest_[j] - q_[j]) * pull;
    dq = std::clamp(dq, -params_.max_step_joint, params_.max_step_joint);
    q_[j] = std::clamp(q_[j] + dq, js.lo, js.hi);
    if (delta_out && j == target_joint_) *delta_out += dq;
  }
}

StepInfo Env::step(const Action& action) {
  StepInfo info;
  prev_state_ = state_;
  prev_qp_ = state_.qp;

  // sanitize: non-finite channels hold the current value, out-of-range
  // angles wrap; both are counted
  Action act = action;
  const Vec3 cur_euler = rot_to_euler(grip_.pose.linear());
  for (int i = 0; i < 3; ++i) {
    if (!std::isfinite(act.target_pos[i])) { act.target_pos[i] = grip_.pose.translation()[i]; ++info.clamped_components; }
    if (!std::isfinite(act.target_euler[i])) { act.target_euler[i] = cur_euler[i]; ++info.clamped_components; }
    else if (std::abs(act.target_euler[i]) >= M_PI) { act.target_euler[i] = wrap_pi(act.target_euler[i]); ++info.clamped_components; }
  }
  if (!std::isfinite(act.target_width)) { act.target_width = grip_.finger_width; ++info.clamped_components; }

  const bool attached = grip_.attached_part.has_value();
  info.attached = attached;
  const Vec3 cg_before = grip_.tips_center();

  // position-control proxy with per-step caps
  const Vec3 dp = act.target_pos - grip_.pose.translation();
  const double dn = dp.norm();
  Pose pose = grip_.pose;
  pose.translation() += (dn > params_.max_step_translation) ? Vec3(dp * (params_.max_step_translation / dn)) : dp;
  pose.linear() = rotate_toward(grip_.pose.linear(), euler_to_rot(act.target_euler), params_.max_step_rotation);
  grip_.pose = pose;

  const double tw = std::clamp(act.target_width, 0.0, params_.finger_max_width);
  const double dw = std::clamp(tw - grip_.finger_width, -params_.max_step_finger, params_.max_step_finger);
  grip_.finger_width += dw;

  // joint actuation
  int driven = -1;
  if (task_.task_class == TaskClass::PressButton && target_joint_ >= 0) {
    const PartBBox button = state_.b_gaparts[0];
    const Mat3 axes = button.edge_axes();
    const Vec3 n = axes.col(1);  // outward face normal
    const Vec3 face = button.center() + n * button.half_extents().y();
    double pen = 0.0;
    for (const Vec3& tip : {grip_.tip_left(), grip_.tip_right()}) {
      const Vec3 rel = tip - face;
      if (std::abs(rel.dot(axes.col(0))) > button.half_extents().x() + params_.tip_radius) continue;
      if (std::abs(rel.dot(axes.col(2))) > button.half_extents().z() + params_.tip_radius) continue;
      pen = std::max(pen, params_.tip_radius - rel.dot(n));
    }
    if (pen > 0.0) {
      const JointSpec& js = obj_->joints[size_t(target_joint_)];
      const double dq = std::min(pen, params_.max_step_joint);
      const double q_new = std::clamp(q_[target_joint_] + dq, js.lo, js.hi);
      info.joint_delta = q_new - q_[target_joint_];
      q_[target_joint_] = q_new;
      driven = target_joint_;
    }
  } else if (attached && target_joint_ >= 0) {
    const JointSpec& js = obj_->joints[size_t(target_joint_)];
    const Vec3 dx = grip_.tips_center() - cg_before;
    const PartBBox handle = grasp_bbox();
    double dq_raw = 0.0;
    if (js.kind == JointKind::Slider) {
      // slider axis expressed in the joint parent's world frame
      const Vec3 axis_w = poses_[size_t(js.parent)].linear() * js.axis;
      dq_raw = dx.dot(axis_w);
    } else {
      const Vec3 axis_w = poses_[size_t(js.parent)].linear() * js.axis;
      const Vec3 anchor_w = poses_[size_t(js.parent)] * js.anchor;
      const Vec3 dh_dq = axis_w.cross(handle.center() - anchor_w);
      const double r2 = dh_dq.squaredNorm();
      if (r2 > 1e-12) dq_raw = dx.dot(dh_dq) / r2;
    }
    const double dq = std::clamp(dq_raw, -params_.max_step_joint, params_.max_step_joint);
    const double q_new = std::clamp(q_[target_joint_] + dq, js.lo, js.hi);
    info.joint_delta = q_new - q_[target_joint_];
    q_[target_joint_] = q_new;
    driven = target_joint_;
  }
  apply_recovery(driven, &info.joint_delta);

  refresh_state();
  state_.t = prev_state_.t + 1;

  // attachment condition for the next step, evaluated on the new configuration
  grip_.attached_part.reset();
  if (task_.task_class != TaskClass::PressButton && obj_->paired_handle_id) {
    const PartBBox handle = grasp_bbox();
    if (is_attached(grip_, handle, params_.attach_margin))
      grip_.attached_part = *obj_->paired_handle_id;
  }

  info.success = success();
  success_ever_ = success_ever_ || info.success;
  return info;
}

bool Env::success() const {
  return check_success(state_, grip_, *obj_, task_, params_);
}

}  // namespace partbench::sim
