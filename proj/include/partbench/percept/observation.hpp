#pragma once

#include "partbench/percept/cloud.hpp"

namespace partbench::percept {

// Robot-side state as a real robot could report it: the padded joint vector
// with the object-joint slots zeroed (they are not sensed), its velocity,
// and the gripper pose.
struct RobotState {
  Eigen::VectorXd qp;
  Eigen::VectorXd qv;
  Vec3 x = Vec3::Zero();
  Mat3 r = Mat3::Identity();

  Eigen::VectorXd flat() const;
  static int flat_dim(int n_q) { return 2 * n_q + 3 + 9; }
};

// Realistic observation: robot state, a 4096-point colored cloud, and the
// fixed point indicator captured at reset. part_mask and category_id are
// training-time auxiliaries (domain labels, color augmentation); they never
// feed the policy.
struct Observation {
  RobotState robot;
  Eigen::MatrixXd cloud;         // n_points x 6
  Vec3 indicator = Vec3::Zero();
  std::vector<int8_t> part_mask;
  int category_id = -1;
  uint64_t episode_id = 0;
  int t = 0;
};

struct PerceptConfig {
  int n_cameras = 3;
  int resolution = 128;
  int n_points = 4096;
  SampleMethod method = SampleMethod::Random;
  double rig_radius = 1.3;
  Vec3 rig_center = Vec3(0.0, 0.0, 0.55);
};

std::vector<CameraSpec> make_rig(const PerceptConfig& cfg);

// Renders, back-projects, downsamples to cfg.n_points and assembles the
// observation. Deterministic in (env episode seed, env timestep): the frame
// sampling stream is derived from both, so a stored state re-renders to a
// bit-identical observation.
Observation make_observation(const sim::Env& env, const std::vector<CameraSpec>& cameras,
                             const PerceptConfig& cfg);

}  // namespace partbench::percept
