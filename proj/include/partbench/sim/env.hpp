#pragma once

#include "partbench/canon/weights.hpp"
#include "partbench/sim/object.hpp"

namespace partbench::sim {

struct SimParams {
  double dt = 1.0 / 30.0;
  double max_step_translation = 0.03;  // per-step gripper translation cap (m)
  double max_step_rotation = 0.1;      // per-step rotation cap (rad, geodesic)
  double max_step_finger = 0.01;       // per-step finger width cap (m)
  double max_step_joint = 0.03;        // per-step joint coordinate cap (rad or m)
  double attach_margin = 1e-3;         // contact offset for attachment checks
  double grasp_margin = 5e-3;          // width threshold slack for grasp success
  double finger_max_width = 0.08;
  double tip_forward_offset = 0.05;    // tips sit this far ahead of the palm
  double tip_radius = 5e-3;            // pressing sphere radius
  int n_q = 11;                        // padded robot joint vector length
};

// Free-flying parallel gripper. Local frame: fingers separate along +/-x,
// -y is the approach direction (so the gripper's y-axis points back out of
// the object when facing it), z completes the frame. Tips sit at
// (+/- width/2, -tip_forward_offset, 0) in the local frame.
struct GripperState {
  Pose pose = Pose::Identity();
  double finger_width = 0.0;
  double tip_forward_offset = 0.05;
  std::optional<int> attached_part;

  Vec3 tip_left() const { return pose * Vec3(-0.5 * finger_width, -tip_forward_offset, 0.0); }
  Vec3 tip_right() const { return pose * Vec3(0.5 * finger_width, -tip_forward_offset, 0.0); }
  Vec3 tips_center() const { return pose * Vec3(0.0, -tip_forward_offset, 0.0); }
};

// Oracle environment state. qp packs [position(3), euler(3), finger width,
// object joint coordinates, zero padding] up to n_q entries; qv is its
// finite-difference velocity with wrapped angle deltas. The observation path
// zeroes the object-joint slots (a real robot cannot sense them).
struct EnvState {
  Eigen::VectorXd qp;
  Eigen::VectorXd qv;
  Vec3 x = Vec3::Zero();
  Mat3 r = Mat3::Identity();
  std::vector<PartBBox> b_gaparts;  // [target, paired handle] or [button]
  Eigen::VectorXd joint_coords;
  int t = 0;
};

// 6-DoF gripper pose target plus a finger-width channel. Angles are
// (-pi, pi) Euler components under the Rz*Ry*Rx convention.
struct Action {
  Vec3 target_pos = Vec3::Zero();
  Vec3 target_euler = Vec3::Zero();
  double target_width = 0.0;

  static Action from_vector(const Eigen::VectorXd& v);
  Eigen::VectorXd to_vector() const;
  static constexpr int kDim = 7;
};

struct TaskSpec {
  TaskClass task_class = TaskClass::OpenDoor;
  int episode_length = 200;
  double init_distance = 0.5;
  // success thresholds (strict inequalities)
  double open_door_angle = M_PI / 6.0;     // opened to more than 30 deg
  double open_drawer_frac = 0.2;           // more than 20% of the slide range
  double close_door_angle = M_PI / 180.0;  // closed to less than 1 deg
  double close_drawer_ext = 0.01;          // less than 1 cm
  double press_frac = 0.5;                 // more than 50% of travel
  double close_door_init = M_PI / 4.0;     // initial opening angle
  double close_drawer_init = 0.30;         // initial opening length
  canon::RewardWeights weights;

  void validate() const;
};

// Default reward-weight table per task class.
canon::RewardWeights default_reward_weights(TaskClass t);
TaskSpec make_task_spec(TaskClass t);

struct StepInfo {
  bool attached = false;
  double joint_delta = 0.0;
  int clamped_components = 0;
  bool success = false;
};

// Attachment test: tips-center inside the handle box inflated by `margin`,
// tips on opposite sides of the handle's thin axis, and the fingers closed
// to the handle thickness plus `margin`.
bool is_attached(const GripperState& grip, const PartBBox& handle, double margin);

// Success predicate on an arbitrary state (strict inequalities throughout).
bool check_success(const EnvState& state, const GripperState& grip,
                   const ArticulatedObject& obj, const TaskSpec& task, const SimParams& params);

// Quasi-static kinematic environment. Deterministic: identical
// (object, seed, action sequence) produce bit-identical state sequences.
class Env {
 public:
  Env(const ArticulatedObject* obj, TaskSpec task, SimParams params = {});

  EnvState reset(uint64_t episode_seed);
  StepInfo step(const Action& action);

  const EnvState& state() const { return state_; }
  const EnvState& prev_state() const { return prev_state_; }
  const GripperState& gripper() const { return grip_; }
  const ArticulatedObject& object() const { return *obj_; }
  const TaskSpec& task() const { return task_; }
  const SimParams& params() const { return params_; }
  const std::vector<Pose>& link_poses() const { return poses_; }

  bool success() const;  // success at the current state
  bool success_ever() const { return success_ever_; }
  bool done() const { return state_.t >= task_.episode_length; }
  Vec3 indicator() const { return indicator_; }
  uint64_t episode_seed() const { return episode_seed_; }
  Rng& episode_rng() { return episode_rng_; }

  // Joint range of the task's target joint.
  double target_joint_range() const;
  double target_joint() const;
  int target_joint_index() const { return target_joint_; }
  // Bbox of the part the reward geometry tracks (paired handle when present,
  // else the target part).
  const PartBBox& grasp_bbox() const;

 private:
  void refresh_state();
  void apply_recovery(int skip_joint, double* delta_out);

  const ArticulatedObject* obj_;
  TaskSpec task_;
  SimParams params_;

  Eigen::VectorXd q_, q_rest_;
  GripperState grip_;
  std::vector<Pose> poses_;
  EnvState state_, prev_state_;
  Eigen::VectorXd prev_qp_;
  Vec3 indicator_ = Vec3::Zero();
  int target_joint_ = -1;
  bool success_ever_ = false;
  uint64_t episode_seed_ = 0;
  Rng episode_rng_;
};

}  // namespace partbench::sim
