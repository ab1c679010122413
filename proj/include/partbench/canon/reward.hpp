#pragma once

#include "partbench/canon/weights.hpp"
#include "partbench/sim/env.hpp"

namespace partbench::canon {

// Resolved per-episode goal for the target joint: the initial coordinate and
// the success-boundary coordinate. dir() is +1 when success lies above the
// initial coordinate, -1 below, 0 when the task does not move a joint.
struct TaskGoal {
  double init_q = 0.0;
  double success_q = 0.0;

  double dir() const { return success_q > init_q ? 1.0 : (success_q < init_q ? -1.0 : 0.0); }
};

TaskGoal task_goal(const sim::ArticulatedObject& obj, const sim::TaskSpec& task);

// Alignment of the gripper's y-axis with the part bounding box's y-axis
// (both unit). 1 when aligned, 0 orthogonal, -1 opposed.
double reward_rotation(const Mat3& gripper_rot, const sim::PartBBox& handle);

// -d_f * || c_g - c_h ||
double reward_distance(const Vec3& tips_center, const Vec3& handle_center, double d_f);

// d_f = exp(-lambda_df * clamp(ratio, 0, 1)); equals 1 when lambda_df = 0.
double discount_factor(double progress_ratio, double lambda_df);

// Fraction of the way from the initial coordinate to the success boundary.
double progress_ratio(double q, const TaskGoal& goal);

// Signed joint progress toward the goal over one step.
double reward_part_motion(double q, double q_prev, const TaskGoal& goal);

// -finger_width: maximal at closure.
double reward_tips(double finger_width);

// lambda_r*R_rot + lambda_d*R_dist + lambda_p*R_pose + lambda_t*R_tips with
// d_f derived from the current progress ratio. The rotation and distance
// terms track the paired handle when one exists, else the target part.
double total_reward(const sim::EnvState& state, const sim::EnvState& prev_state,
                    const sim::GripperState& gripper, const sim::TaskSpec& task,
                    int target_joint, const TaskGoal& goal);

}  // namespace partbench::canon
