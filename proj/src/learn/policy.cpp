#include "partbench/learn/policy.hpp"

namespace partbench::learn {

using diff::Mat;
using diff::Tape;

int state_dim(int n_q, int n_parts) { return 2 * n_q + 3 + 9 + 24 * n_parts; }

Eigen::VectorXd flatten_state(const sim::EnvState& s) {
  const int n_q = int(s.qp.size());
  const int n_parts = int(s.b_gaparts.size());
  Eigen::VectorXd v(state_dim(n_q, n_parts));
  Eigen::Index k = 0;
  v.segment(k, n_q) = s.qp;
  k += n_q;
  v.segment(k, n_q) = s.qv;
  k += n_q;
  v.segment<3>(k) = s.x;
  k += 3;
  v.segment<9>(k) = Eigen::Map<const Eigen::VectorXd>(s.r.data(), 9);
  k += 9;
  for (const auto& bbox : s.b_gaparts)
    for (const auto& corner : bbox.corners) {
      v.segment<3>(k) = corner;
      k += 3;
    }
  return v;
}

Eigen::VectorXd policy_state(const sim::EnvState& state, bool canonicalize) {
  if (!canonicalize) return flatten_state(state);
  const canon::PartFrame frame = canon::part_frame(state.b_gaparts[0]);
  return flatten_state(canon::canonicalize_state(state, frame));
}

diff::ActionScaler default_action_scaler(double finger_max_width) {
  diff::ActionScaler s;
  s.center.resize(7);
  s.half.resize(7);
  // body-frame pose offset: translation +-0.1 m, rotation angles in (-pi, pi)
  s.center << 0, 0, 0, 0, 0, 0, 0.5 * finger_max_width;
  s.half << 0.1, 0.1, 0.1, M_PI, M_PI, M_PI, 0.5 * finger_max_width;
  return s;
}

sim::Action compose_action(const Vec3& x, const Mat3& r, const Eigen::VectorXd& scaled) {
  if (scaled.size() != 7) throw ShapeError("scaled action must have 7 entries");
  sim::Action a;
  a.target_pos = x + r * scaled.segment<3>(0);
  a.target_euler = rot_to_euler(r * euler_to_rot(scaled.segment<3>(3)));
  a.target_width = scaled[6];
  return a;
}

Eigen::VectorXd ExpertPolicy::act_scaled(const Eigen::VectorXd& state) const {
  return scaler.scale(mlp_eval(actor, state.transpose())).row(0);
}

ExpertPolicy make_expert_policy(int input_dim, const std::vector<int>& hidden,
                                double finger_max_width, bool canonicalized, uint64_t seed) {
  ExpertPolicy p;
  p.input_dim = input_dim;
  p.canonicalized = canonicalized;
  p.hidden = hidden;
  Rng rng(mix_seed(seed, 0xac70));
  p.actor = make_mlp(p.store, "actor", input_dim, hidden, sim::Action::kDim, diff::Activation::Elu, rng);
  p.actor.weights.back()->value *= 0.1;  // start near the hold-pose action
  p.critic = make_mlp(p.store, "critic", input_dim, hidden, 1, diff::Activation::Elu, rng);
  p.head = diff::make_gaussian_head(p.store, "policy", sim::Action::kDim);
  p.scaler = default_action_scaler(finger_max_width);
  return p;
}

void save_expert(const std::string& path, const ExpertPolicy& policy, const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["kind"] = "expert";
  meta["input_dim"] = policy.input_dim;
  meta["hidden"] = policy.hidden;
  meta["canonicalized"] = policy.canonicalized;
  meta["finger_max_width"] = policy.scaler.center[6] * 2.0;
  diff::save_checkpoint(path, policy.store, meta);
}

ExpertPolicy load_expert(const std::string& path) {
  const nlohmann::json meta = diff::read_checkpoint_metadata(path);
  if (meta.at("kind") != "expert") throw IoError("not an expert checkpoint: " + path);
  ExpertPolicy p = make_expert_policy(meta.at("input_dim"), meta.at("hidden").get<std::vector<int>>(),
                                      meta.at("finger_max_width"), meta.at("canonicalized"),
                                      /*seed=*/0);
  diff::load_checkpoint(path, p.store);
  return p;
}

static nlohmann::json student_spec_to_json(const StudentSpec& s) {
  nlohmann::json j;
  j["encoder"] = s.encoder == EncoderKind::Sparse ? "sparse" : "pointwise";
  j["unet_depth"] = s.unet.depth;
  j["unet_channels"] = s.unet.channels;
  j["unet_out"] = s.unet.out_dim;
  j["voxel_lo"] = {s.voxel.lo.x(), s.voxel.lo.y(), s.voxel.lo.z()};
  j["voxel_hi"] = {s.voxel.hi.x(), s.voxel.hi.y(), s.voxel.hi.z()};
  j["voxel_resolution"] = s.voxel.resolution;
  j["enc_points"] = s.enc_points;
  j["pointwise_hidden"] = s.pointwise_hidden;
  j["pointwise_out"] = s.pointwise_out;
  j["lift_hidden"] = s.lift_hidden;
  j["lift_out"] = s.lift_out;
  j["actor_hidden"] = s.actor_hidden;
  j["n_q"] = s.n_q;
  j["n_categories"] = s.n_categories;
  j["finger_max_width"] = s.finger_max_width;
  return j;
}

static StudentSpec student_spec_from_json(const nlohmann::json& j) {
  StudentSpec s;
  s.encoder = j.at("encoder") == "sparse" ? EncoderKind::Sparse : EncoderKind::Pointwise;
  s.unet.depth = j.at("unet_depth");
  s.unet.channels = j.at("unet_channels").get<std::vector<int>>();
  s.unet.out_dim = j.at("unet_out");
  s.voxel.lo = Vec3(j.at("voxel_lo").at(0), j.at("voxel_lo").at(1), j.at("voxel_lo").at(2));
  s.voxel.hi = Vec3(j.at("voxel_hi").at(0), j.at("voxel_hi").at(1), j.at("voxel_hi").at(2));
  s.voxel.resolution = j.at("voxel_resolution");
  s.enc_points = j.at("enc_points");
  s.pointwise_hidden = j.at("pointwise_hidden").get<std::vector<int>>();
  s.pointwise_out = j.at("pointwise_out");
  s.lift_hidden = j.at("lift_hidden").get<std::vector<int>>();
  s.lift_out = j.at("lift_out");
  s.actor_hidden = j.at("actor_hidden").get<std::vector<int>>();
  s.n_q = j.at("n_q");
  s.n_categories = j.at("n_categories");
  s.finger_max_width = j.at("finger_max_width");
  return s;
}

StudentPolicy make_student_policy(const StudentSpec& spec, uint64_t seed) {
  StudentPolicy p;
  p.spec = spec;
  Rng rng(mix_seed(seed, 0x57d0));
  int feat_dim = 0;
  if (spec.encoder == EncoderKind::Sparse) {
    encoder::UNetSpec us = spec.unet;
    us.in_dim = 9;
    p.unet = encoder::make_unet(p.store, "unet", us, rng);
    feat_dim = us.out_dim;
  } else {
    p.pointwise = make_mlp(p.store, "pointwise", 9, spec.pointwise_hidden, spec.pointwise_out,
                           diff::Activation::Elu, rng);
    feat_dim = spec.pointwise_out;
  }
  p.lift = make_mlp(p.store, "lift", feat_dim, spec.lift_hidden, spec.lift_out,
                    diff::Activation::Elu, rng);
  const int robot_dim = percept::RobotState::flat_dim(spec.n_q);
  p.actor = make_mlp(p.store, "actor", spec.lift_out + robot_dim, spec.actor_hidden,
                     sim::Action::kDim, diff::Activation::Elu, rng);
  p.actor.weights.back()->value *= 0.1;
  p.head = diff::make_gaussian_head(p.store, "policy", sim::Action::kDim);
  p.scaler = default_action_scaler(spec.finger_max_width);
  if (spec.n_categories > 0)
    p.domain = encoder::make_domain_classifier(p.store, "domain", feat_dim, spec.n_categories, rng);
  return p;
}

static void append_mlp_params(std::vector<diff::Param*>& out, const diff::Mlp& mlp) {
  for (size_t l = 0; l < mlp.weights.size(); ++l) {
    out.push_back(mlp.weights[l]);
    out.push_back(mlp.biases[l]);
  }
}

std::vector<diff::Param*> StudentPolicy::policy_params() {
  std::vector<diff::Param*> out;
  if (spec.encoder == EncoderKind::Sparse) {
    auto push_conv = [&](const encoder::SparseConvParams& c) {
      for (auto* t : c.taps) out.push_back(t);
      out.push_back(c.bias);
    };
    push_conv(unet.in_conv);
    for (const auto& c : unet.down) push_conv(c);
    for (const auto& c : unet.enc) push_conv(c);
    for (const auto& c : unet.dec) push_conv(c);
    out.push_back(unet.out_w);
    out.push_back(unet.out_b);
  } else {
    append_mlp_params(out, pointwise);
  }
  append_mlp_params(out, lift);
  append_mlp_params(out, actor);
  return out;
}

std::vector<diff::Param*> StudentPolicy::domain_params() {
  std::vector<diff::Param*> out;
  if (spec.n_categories > 0) {
    append_mlp_params(out, domain.lift);
    append_mlp_params(out, domain.head);
  }
  return out;
}

void save_student(const std::string& path, const StudentPolicy& policy, const nlohmann::json& extra) {
  nlohmann::json meta = extra;
  meta["kind"] = "student";
  meta["spec"] = student_spec_to_json(policy.spec);
  diff::save_checkpoint(path, policy.store, meta);
}

StudentPolicy load_student(const std::string& path) {
  const nlohmann::json meta = diff::read_checkpoint_metadata(path);
  if (meta.at("kind") != "student") throw IoError("not a student checkpoint: " + path);
  StudentPolicy p = make_student_policy(student_spec_from_json(meta.at("spec")), 0);
  diff::load_checkpoint(path, p.store);
  return p;
}

StudentForward student_forward(Tape& tape, const StudentPolicy& policy,
                               const std::vector<const percept::Observation*>& batch) {
  const StudentSpec& spec = policy.spec;
  const int b = int(batch.size());
  if (b == 0) throw InputError("student_forward: empty batch");
  const int p = spec.enc_points;

  StudentForward fwd;
  Eigen::MatrixXd features(Eigen::Index(b) * p, 9);
  Mat robot(b, percept::RobotState::flat_dim(spec.n_q));
  std::vector<int> point_seg(size_t(b) * size_t(p));
  std::vector<int> cloud_offsets{0};

  for (int i = 0; i < b; ++i) {
    const percept::Observation& obs = *batch[i];
    const uint64_t pick_seed = mix_seed(obs.episode_id, uint64_t(obs.t), 0xe4c9);
    const std::vector<int> idx =
        percept::sample_indices(obs.cloud, p, percept::SampleMethod::Random, pick_seed);
    for (int j = 0; j < p; ++j) {
      const Eigen::Index src = idx[size_t(j)];
      const Eigen::Index row = Eigen::Index(i) * p + j;
      features.row(row).segment<3>(0) = obs.cloud.row(src).segment<3>(0);
      features.row(row).segment<3>(3) = obs.cloud.row(src).segment<3>(3);
      features.row(row).segment<3>(6) =
          obs.cloud.row(src).segment<3>(0) - obs.indicator.transpose();
      point_seg[size_t(row)] = i;
      if (!obs.part_mask.empty() && obs.part_mask[size_t(src)] != percept::kTagNone) {
        fwd.mask_rows.push_back(int(row));
        fwd.mask_seg.push_back(i);
      }
    }
    robot.row(i) = batch[i]->robot.flat().transpose();
    fwd.labels.push_back(obs.category_id);
    cloud_offsets.push_back((i + 1) * p);
  }

  if (spec.encoder == EncoderKind::Sparse) {
    Tape::Id pts = tape.constant(std::move(features));
    encoder::SparseVoxelGrid grid = encoder::voxelize_batch_node(tape, pts, cloud_offsets, spec.voxel);
    fwd.per_point = encoder::unet_forward(tape, grid, policy.unet);
  } else {
    Tape::Id pts = tape.constant(std::move(features));
    fwd.per_point = tape.elu(mlp_forward(tape, policy.pointwise, pts));
  }

  Tape::Id robot_node = tape.constant(std::move(robot));
  Tape::Id pooled = encoder::aggregate_head(tape, fwd.per_point, point_seg, b, robot_node, policy.lift);
  fwd.mean_raw = mlp_forward(tape, policy.actor, pooled);
  fwd.mean_scaled = policy.scaler.scale_node(tape, fwd.mean_raw);
  return fwd;
}

Mat student_act(const StudentPolicy& policy, const std::vector<const percept::Observation*>& batch) {
  Tape tape;
  const StudentForward fwd = student_forward(tape, policy, batch);
  return tape.val(fwd.mean_scaled);
}

}  // namespace partbench::learn
