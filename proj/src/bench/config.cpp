#include "partbench/bench/config.hpp"

#include <fstream>

namespace partbench::bench {

using nlohmann::json;
using nlohmann::ordered_json;

sim::TaskSpec ExperimentConfig::task_spec() const {
  sim::TaskSpec spec = sim::make_task_spec(task);
  spec.episode_length = episode_length;
  return spec;
}

Splits ExperimentConfig::resolve_splits() const {
  if (!split_manifest.empty()) {
    Splits s = load_splits(split_manifest);
    if (s.task != task) throw ConfigError("split manifest task does not match the config task");
    return s;
  }
  std::vector<std::string> cats = categories.empty() ? sim::categories_for_task(task) : categories;
  return make_splits(cats, task, split_seed, counts);
}

ExperimentConfig default_config(sim::TaskClass task) {
  ExperimentConfig cfg;
  cfg.task = task;
  // per-task loop sizes from the training recipe tables
  switch (task) {
    case sim::TaskClass::OpenDoor:
    case sim::TaskClass::CloseDoor:
    case sim::TaskClass::PressButton:
      cfg.ppo.minibatches = 2;
      cfg.ppo.nsteps = 20;
      break;
    case sim::TaskClass::OpenDrawer:
    case sim::TaskClass::CloseDrawer:
      cfg.ppo.minibatches = 3;
      cfg.ppo.nsteps = 20;
      break;
    case sim::TaskClass::GraspHandle:
      cfg.ppo.minibatches = 2;
      cfg.ppo.nsteps = 40;
      break;
  }
  cfg.ppo.env_count = 30;  // divisible by both 2 and 3 minibatches
  return cfg;
}

static void overlay(double& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<double>();
}
static void overlay(int& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<int>();
}
static void overlay(uint64_t& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<uint64_t>();
}
static void overlay(bool& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<bool>();
}
static void overlay(std::string& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<std::string>();
}
static void overlay(std::vector<int>& field, const json& j, const char* key) {
  if (j.contains(key)) field = j.at(key).get<std::vector<int>>();
}
static void overlay_vec3(Vec3& field, const json& j, const char* key) {
  if (j.contains(key)) field = Vec3(j.at(key).at(0), j.at(key).at(1), j.at(key).at(2));
}

ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["format"] = "partbench-config";
  j["version"] = 1;
  j["task"] = sim::task_class_name(cfg.task);
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  j["workers"] = cfg.workers;
  j["toggles"] = {{"canonicalize", cfg.canonicalize},
                  {"train_student", cfg.train_student},
                  {"pretrain", cfg.pretrain},
                  {"augment", cfg.augment},
                  {"domadv", cfg.domadv}};
  j["split"] = {{"manifest", cfg.split_manifest},
                {"categories", cfg.categories},
                {"train", cfg.counts.train},
                {"val_intra", cfg.counts.val_intra},
                {"val_inter", cfg.counts.val_inter},
                {"seed", cfg.split_seed}};
  const sim::SimParams& sp = cfg.sim_params;
  j["sim"] = {{"dt", sp.dt},
              {"max_step_translation", sp.max_step_translation},
              {"max_step_rotation", sp.max_step_rotation},
              {"max_step_finger", sp.max_step_finger},
              {"max_step_joint", sp.max_step_joint},
              {"attach_margin", sp.attach_margin},
              {"grasp_margin", sp.grasp_margin},
              {"finger_max_width", sp.finger_max_width},
              {"tip_forward_offset", sp.tip_forward_offset},
              {"tip_radius", sp.tip_radius},
              {"n_q", sp.n_q}};
  j["episode_length"] = cfg.episode_length;
  const learn::PPOConfig& pc = cfg.ppo;
  j["ppo"] = {{"learning_rate", pc.learning_rate},
              {"gamma", pc.gamma},
              {"gae_lambda", pc.gae_lambda},
              {"desired_kl", pc.desired_kl},
              {"clip_range", pc.clip_range},
              {"entropy_coef", pc.entropy_coef},
              {"value_coef", pc.value_coef},
              {"init_noise_std", pc.init_noise_std},
              {"epochs", pc.epochs},
              {"minibatches", pc.minibatches},
              {"nsteps", pc.nsteps},
              {"env_count", pc.env_count},
              {"hidden", pc.hidden},
              {"normalize_advantages", pc.normalize_advantages},
              {"max_env_steps", pc.max_env_steps},
              {"target_success_stop", pc.target_success_stop},
              {"eval_interval", pc.eval_interval},
              {"eval_episodes_per_object", pc.eval_episodes_per_object}};
  const learn::DistillConfig& dc = cfg.distill;
  j["distill"] = {{"lambda_da", dc.lambda_da},
                  {"lambda_adv", dc.lambda_adv},
                  {"jitter_distance", dc.augmentation.jitter_distance},
                  {"color_replace", dc.augmentation.color_replace},
                  {"pretrain_epochs", dc.pretrain_epochs},
                  {"pretrain_batch", dc.pretrain_batch},
                  {"pretrain_lr", dc.pretrain_lr},
                  {"dagger_lr", dc.dagger_lr},
                  {"epochs", dc.epochs},
                  {"minibatches", dc.minibatches},
                  {"nsteps", dc.nsteps},
                  {"env_count", dc.env_count},
                  {"max_updates", dc.max_updates},
                  {"eval_interval", dc.eval_interval},
                  {"eval_episodes_per_object", dc.eval_episodes_per_object},
                  {"target_success_stop", dc.target_success_stop},
                  {"milestone", dc.milestone},
                  {"demo_buffer_size", cfg.demo_buffer_size}};
  const learn::StudentSpec& st = cfg.student;
  j["student"] = {{"encoder", st.encoder == learn::EncoderKind::Sparse ? "sparse" : "pointwise"},
                  {"unet_depth", st.unet.depth},
                  {"unet_channels", st.unet.channels},
                  {"unet_out", st.unet.out_dim},
                  {"voxel_lo", {st.voxel.lo.x(), st.voxel.lo.y(), st.voxel.lo.z()}},
                  {"voxel_hi", {st.voxel.hi.x(), st.voxel.hi.y(), st.voxel.hi.z()}},
                  {"voxel_resolution", st.voxel.resolution},
                  {"enc_points", st.enc_points},
                  {"pointwise_hidden", st.pointwise_hidden},
                  {"pointwise_out", st.pointwise_out},
                  {"lift_hidden", st.lift_hidden},
                  {"lift_out", st.lift_out},
                  {"actor_hidden", st.actor_hidden}};
  const percept::PerceptConfig& pp = cfg.percept;
  j["percept"] = {{"cameras", pp.n_cameras},
                  {"resolution", pp.resolution},
                  {"points", pp.n_points},
                  {"sampling", pp.method == percept::SampleMethod::Fps ? "fps" : "random"},
                  {"rig_radius", pp.rig_radius},
                  {"rig_center", {pp.rig_center.x(), pp.rig_center.y(), pp.rig_center.z()}}};
  j["eval_episodes_per_object"] = cfg.eval_episodes_per_object;
  return j;
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  ExperimentConfig cfg = base;
  if (j.contains("task")) {
    cfg = default_config(sim::task_class_from_name(j.at("task")));
    cfg.seeds = base.seeds;
    cfg.out_dir = base.out_dir;
    cfg.workers = base.workers;
  }
  if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
  overlay(cfg.out_dir, j, "out_dir");
  overlay(cfg.workers, j, "workers");
  if (j.contains("toggles")) {
    const json& t = j.at("toggles");
    overlay(cfg.canonicalize, t, "canonicalize");
    overlay(cfg.train_student, t, "train_student");
    overlay(cfg.pretrain, t, "pretrain");
    overlay(cfg.augment, t, "augment");
    overlay(cfg.domadv, t, "domadv");
  }
  if (j.contains("split")) {
    const json& s = j.at("split");
    overlay(cfg.split_manifest, s, "manifest");
    if (s.contains("categories")) cfg.categories = s.at("categories").get<std::vector<std::string>>();
    overlay(cfg.counts.train, s, "train");
    overlay(cfg.counts.val_intra, s, "val_intra");
    overlay(cfg.counts.val_inter, s, "val_inter");
    overlay(cfg.split_seed, s, "seed");
  }
  if (j.contains("sim")) {
    const json& s = j.at("sim");
    overlay(cfg.sim_params.dt, s, "dt");
    overlay(cfg.sim_params.max_step_translation, s, "max_step_translation");
    overlay(cfg.sim_params.max_step_rotation, s, "max_step_rotation");
    overlay(cfg.sim_params.max_step_finger, s, "max_step_finger");
    overlay(cfg.sim_params.max_step_joint, s, "max_step_joint");
    overlay(cfg.sim_params.attach_margin, s, "attach_margin");
    overlay(cfg.sim_params.grasp_margin, s, "grasp_margin");
    overlay(cfg.sim_params.finger_max_width, s, "finger_max_width");
    overlay(cfg.sim_params.tip_forward_offset, s, "tip_forward_offset");
    overlay(cfg.sim_params.tip_radius, s, "tip_radius");
    overlay(cfg.sim_params.n_q, s, "n_q");
  }
  overlay(cfg.episode_length, j, "episode_length");
  if (j.contains("ppo")) {
    const json& p = j.at("ppo");
    overlay(cfg.ppo.learning_rate, p, "learning_rate");
    overlay(cfg.ppo.gamma, p, "gamma");
    overlay(cfg.ppo.gae_lambda, p, "gae_lambda");
    overlay(cfg.ppo.desired_kl, p, "desired_kl");
    overlay(cfg.ppo.clip_range, p, "clip_range");
    overlay(cfg.ppo.entropy_coef, p, "entropy_coef");
    overlay(cfg.ppo.value_coef, p, "value_coef");
    overlay(cfg.ppo.init_noise_std, p, "init_noise_std");
    overlay(cfg.ppo.epochs, p, "epochs");
    overlay(cfg.ppo.minibatches, p, "minibatches");
    overlay(cfg.ppo.nsteps, p, "nsteps");
    overlay(cfg.ppo.env_count, p, "env_count");
    overlay(cfg.ppo.hidden, p, "hidden");
    overlay(cfg.ppo.normalize_advantages, p, "normalize_advantages");
    overlay(cfg.ppo.max_env_steps, p, "max_env_steps");
    overlay(cfg.ppo.target_success_stop, p, "target_success_stop");
    overlay(cfg.ppo.eval_interval, p, "eval_interval");
    overlay(cfg.ppo.eval_episodes_per_object, p, "eval_episodes_per_object");
  }
  if (j.contains("distill")) {
    const json& d = j.at("distill");
    overlay(cfg.distill.lambda_da, d, "lambda_da");
    overlay(cfg.distill.lambda_adv, d, "lambda_adv");
    overlay(cfg.distill.augmentation.jitter_distance, d, "jitter_distance");
    overlay(cfg.distill.augmentation.color_replace, d, "color_replace");
    overlay(cfg.distill.pretrain_epochs, d, "pretrain_epochs");
    overlay(cfg.distill.pretrain_batch, d, "pretrain_batch");
    overlay(cfg.distill.pretrain_lr, d, "pretrain_lr");
    overlay(cfg.distill.dagger_lr, d, "dagger_lr");
    overlay(cfg.distill.epochs, d, "epochs");
    overlay(cfg.distill.minibatches, d, "minibatches");
    overlay(cfg.distill.nsteps, d, "nsteps");
    overlay(cfg.distill.env_count, d, "env_count");
    overlay(cfg.distill.max_updates, d, "max_updates");
    overlay(cfg.distill.eval_interval, d, "eval_interval");
    overlay(cfg.distill.eval_episodes_per_object, d, "eval_episodes_per_object");
    overlay(cfg.distill.target_success_stop, d, "target_success_stop");
    overlay(cfg.distill.milestone, d, "milestone");
    overlay(cfg.demo_buffer_size, d, "demo_buffer_size");
  }
  if (j.contains("student")) {
    const json& s = j.at("student");
    if (s.contains("encoder"))
      cfg.student.encoder = s.at("encoder") == "sparse" ? learn::EncoderKind::Sparse
                                                        : learn::EncoderKind::Pointwise;
    overlay(cfg.student.unet.depth, s, "unet_depth");
    overlay(cfg.student.unet.channels, s, "unet_channels");
    overlay(cfg.student.unet.out_dim, s, "unet_out");
    overlay_vec3(cfg.student.voxel.lo, s, "voxel_lo");
    overlay_vec3(cfg.student.voxel.hi, s, "voxel_hi");
    overlay(cfg.student.voxel.resolution, s, "voxel_resolution");
    overlay(cfg.student.enc_points, s, "enc_points");
    overlay(cfg.student.pointwise_hidden, s, "pointwise_hidden");
    overlay(cfg.student.pointwise_out, s, "pointwise_out");
    overlay(cfg.student.lift_hidden, s, "lift_hidden");
    overlay(cfg.student.lift_out, s, "lift_out");
    overlay(cfg.student.actor_hidden, s, "actor_hidden");
  }
  if (j.contains("percept")) {
    const json& p = j.at("percept");
    overlay(cfg.percept.n_cameras, p, "cameras");
    overlay(cfg.percept.resolution, p, "resolution");
    overlay(cfg.percept.n_points, p, "points");
    if (p.contains("sampling"))
      cfg.percept.method = p.at("sampling") == "fps" ? percept::SampleMethod::Fps
                                                     : percept::SampleMethod::Random;
    overlay(cfg.percept.rig_radius, p, "rig_radius");
    overlay_vec3(cfg.percept.rig_center, p, "rig_center");
  }
  overlay(cfg.eval_episodes_per_object, j, "eval_episodes_per_object");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config: " + path);
  const json j = json::parse(f);
  const sim::TaskClass task =
      j.contains("task") ? sim::task_class_from_name(j.at("task")) : sim::TaskClass::OpenDrawer;
  return config_from_json(j, default_config(task));
}

}  // namespace partbench::bench
