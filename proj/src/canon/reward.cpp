#include "partbench/canon/reward.hpp"

#include <cmath>

namespace partbench::canon {

using sim::TaskClass;

TaskGoal task_goal(const sim::ArticulatedObject& obj, const sim::TaskSpec& task) {
  TaskGoal g;
  const int tj = obj.joint_of_part(obj.target_part_id);
  if (tj < 0) return g;
  const sim::JointSpec& js = obj.joints[size_t(tj)];
  const double range = js.hi - js.lo;
  switch (task.task_class) {
    case TaskClass::OpenDoor:
      g.init_q = js.lo;
      g.success_q = task.open_door_angle;
      break;
    case TaskClass::OpenDrawer:
      g.init_q = js.lo;
      g.success_q = task.open_drawer_frac * range;
      break;
    case TaskClass::CloseDoor:
      g.init_q = task.close_door_init;
      g.success_q = task.close_door_angle;
      break;
    case TaskClass::CloseDrawer:
      g.init_q = std::min(task.close_drawer_init, 0.9 * range);
      g.success_q = task.close_drawer_ext;
      break;
    case TaskClass::PressButton:
      g.init_q = js.lo;
      g.success_q = js.lo + task.press_frac * range;
      break;
    case TaskClass::GraspHandle:
      g.init_q = js.lo;
      g.success_q = js.lo;  // no joint goal
      break;
  }
  return g;
}

double reward_rotation(const Mat3& gripper_rot, const sim::PartBBox& handle) {
  return handle.edge_axes().col(1).dot(gripper_rot.col(1));
}

double reward_distance(const Vec3& tips_center, const Vec3& handle_center, double d_f) {
  return -d_f * (tips_center - handle_center).norm();
}

double discount_factor(double ratio, double lambda_df) {
  return std::exp(-lambda_df * std::clamp(ratio, 0.0, 1.0));
}

double progress_ratio(double q, const TaskGoal& goal) {
  const double span = goal.success_q - goal.init_q;
  if (span == 0.0) return 0.0;
  return std::clamp((q - goal.init_q) / span, 0.0, 1.0);
}

double reward_part_motion(double q, double q_prev, const TaskGoal& goal) {
  return (q - q_prev) * goal.dir();
}

double reward_tips(double finger_width) { return -finger_width; }

double total_reward(const sim::EnvState& state, const sim::EnvState& prev_state,
                    const sim::GripperState& gripper, const sim::TaskSpec& task,
                    int target_joint, const TaskGoal& goal) {
  const RewardWeights& w = task.weights;
  const sim::PartBBox& grasp =
      state.b_gaparts.size() > 1 ? state.b_gaparts[1] : state.b_gaparts[0];

  const double q = target_joint >= 0 ? state.joint_coords[target_joint] : 0.0;
  const double q_prev = target_joint >= 0 ? prev_state.joint_coords[target_joint] : 0.0;

  const double d_f = discount_factor(progress_ratio(q, goal), w.lambda_df);
  const double r_rot = reward_rotation(state.r, grasp);
  const double r_dist = reward_distance(gripper.tips_center(), grasp.center(), d_f);
  const double r_pose = reward_part_motion(q, q_prev, goal);
  const double r_tips = reward_tips(gripper.finger_width);
  return w.lambda_r * r_rot + w.lambda_d * r_dist + w.lambda_p * r_pose + w.lambda_t * r_tips;
}

}  // namespace partbench::canon
