#include "partbench/percept/observation.hpp"

namespace partbench::percept {

Eigen::VectorXd RobotState::flat() const {
  Eigen::VectorXd v(flat_dim(int(qp.size())));
  v.segment(0, qp.size()) = qp;
  v.segment(qp.size(), qv.size()) = qv;
  v.segment(2 * qp.size(), 3) = x;
  v.segment(2 * qp.size() + 3, 9) = Eigen::Map<const Eigen::VectorXd>(r.data(), 9);
  return v;
}

std::vector<CameraSpec> make_rig(const PerceptConfig& cfg) {
  return default_rig(cfg.rig_center, cfg.rig_radius, cfg.n_cameras, cfg.resolution);
}

Observation make_observation(const sim::Env& env, const std::vector<CameraSpec>& cameras,
                             const PerceptConfig& cfg) {
  const auto boxes = scene_boxes(env.object(), env.link_poses(), env.gripper());
  std::vector<DepthColorImage> images;
  images.reserve(cameras.size());
  for (const auto& cam : cameras) images.push_back(raycast_depth(boxes, cam));

  Cloud merged = backproject_merge(images, cameras);
  const uint64_t frame_seed = mix_seed(env.episode_seed(), uint64_t(env.state().t), 0xc10d);
  Cloud sampled = sample_to_n(merged, cfg.n_points, cfg.method, frame_seed);

  Observation obs;
  const sim::EnvState& s = env.state();
  const int n_joints = env.object().num_joints();
  obs.robot.qp = s.qp;
  obs.robot.qv = s.qv;
  obs.robot.qp.segment(7, n_joints).setZero();
  obs.robot.qv.segment(7, n_joints).setZero();
  obs.robot.x = s.x;
  obs.robot.r = s.r;
  obs.cloud = std::move(sampled.points);
  obs.part_mask = std::move(sampled.tags);
  obs.indicator = env.indicator();
  obs.episode_id = env.episode_seed();
  obs.t = s.t;
  return obs;
}

}  // namespace partbench::percept
