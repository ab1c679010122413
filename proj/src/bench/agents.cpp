#include "partbench/bench/agents.hpp"

namespace partbench::bench {

ZeroAgent::ZeroAgent(double finger_max_width) : scaler(learn::default_action_scaler(finger_max_width)) {}

sim::Action ZeroAgent::act(sim::Env& env) {
  const Eigen::VectorXd scaled = scaler.scale(Eigen::RowVectorXd::Zero(sim::Action::kDim)).row(0);
  return learn::compose_action(env.state().x, env.state().r, scaled);
}

sim::Action ExpertAgent::act(sim::Env& env) {
  const Eigen::VectorXd scaled =
      policy->act_scaled(learn::policy_state(env.state(), policy->canonicalized));
  return learn::compose_action(env.state().x, env.state().r, scaled);
}

StudentAgent::StudentAgent(const learn::StudentPolicy* p, const percept::PerceptConfig& cfg,
                           std::map<std::string, int> ids)
    : policy(p), rig(percept::make_rig(cfg)), percept_cfg(cfg), category_ids(std::move(ids)) {}

sim::Action StudentAgent::act(sim::Env& env) {
  percept::Observation obs = percept::make_observation(env, rig, percept_cfg);
  const auto it = category_ids.find(env.object().category);
  obs.category_id = it == category_ids.end() ? -1 : it->second;
  const diff::Mat scaled = learn::student_act(*policy, {&obs});
  return learn::compose_action(env.state().x, env.state().r, scaled.row(0).transpose());
}

sim::Action OracleAgent::act(sim::Env& env) {
  const sim::SimParams& params = env.params();
  const sim::PartBBox grasp = env.grasp_bbox();
  const Mat3 axes = grasp.edge_axes();
  const Vec3 ch = grasp.center();
  const Vec3 ax = axes.col(0), ay = axes.col(1), az = axes.col(2);

  Mat3 g_des;
  g_des.col(0) = az;
  g_des.col(1) = ay;
  g_des.col(2) = -ax;
  const Vec3 euler_des = rot_to_euler(g_des);
  const double tip_off = params.tip_forward_offset;
  auto origin_for_tips = [&](const Vec3& tips) { return tips + tip_off * ay; };

  sim::Action act;
  act.target_euler = euler_des;

  if (env.task().task_class == sim::TaskClass::PressButton) {
    const Vec3 face = ch + ay * grasp.half_extents().y();
    if (env.gripper().finger_width > 2e-3) {
      act.target_pos = origin_for_tips(face + ay * 0.02);
      act.target_width = 0.0;
    } else {
      act.target_pos = origin_for_tips(face - ay * 0.05);
      act.target_width = 0.0;
    }
    return act;
  }

  if (env.task().task_class == sim::TaskClass::GraspHandle && env.success_ever()) {
    act.target_pos = env.state().x;
    act.target_euler = rot_to_euler(env.state().r);
    act.target_width = env.gripper().finger_width;
    return act;
  }

  const double thickness = 2.0 * grasp.half_extents().z();
  const double close_w = std::max(0.0, thickness - 4e-3);
  const Vec3 tips = env.gripper().tips_center();
  const double dist = (tips - ch).norm();
  const bool attached = env.gripper().attached_part.has_value();

  if (dist > 0.12) {
    act.target_pos = origin_for_tips(ch + ay * 0.10);
    act.target_width = params.finger_max_width;
    return act;
  }
  if (!attached && dist > 5e-3) {
    act.target_pos = origin_for_tips(ch);
    act.target_width = params.finger_max_width;
    return act;
  }
  if (!attached || env.task().task_class == sim::TaskClass::GraspHandle) {
    act.target_pos = origin_for_tips(ch);
    act.target_width = close_w;
    return act;
  }

  // attached: drive the joint along its motion direction
  const int joint = env.target_joint_index();
  const sim::JointSpec& js = env.object().joints[size_t(joint)];
  const Pose& parent = env.link_poses()[size_t(js.parent)];
  const Vec3 axis_w = parent.linear() * js.axis;
  double open_dir = 1.0;
  if (env.task().task_class == sim::TaskClass::CloseDoor ||
      env.task().task_class == sim::TaskClass::CloseDrawer)
    open_dir = -1.0;

  Vec3 dir;
  double step_len;
  if (js.kind == sim::JointKind::Slider) {
    dir = axis_w * open_dir;
    step_len = 0.9 * std::min(params.max_step_translation, params.max_step_joint);
  } else {
    const Vec3 anchor_w = parent * js.anchor;
    const Vec3 tang = axis_w.cross(ch - anchor_w);
    const double radius = tang.norm();
    if (radius < 1e-9) {
      act.target_pos = origin_for_tips(ch);
      act.target_width = close_w;
      return act;
    }
    dir = (tang / radius) * open_dir;
    step_len = 0.9 * std::min(params.max_step_translation, params.max_step_joint * radius);
  }
  act.target_pos = origin_for_tips(ch + dir * step_len);
  act.target_width = close_w;
  return act;
}

}  // namespace partbench::bench
