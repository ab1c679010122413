#pragma once

#include "partbench/learn/demos.hpp"

namespace partbench::learn {

struct AugmentSettings {
  bool enabled = true;
  double jitter_distance = 0.1;  // bound on the per-point displacement norm
  bool color_replace = true;
};

// Point-cloud augmentation: per-point uniform jitter (per-axis range
// jitter/sqrt(3), so the displacement norm stays within jitter_distance) and
// a per-episode replacement color painted over every GAPart point. The
// replacement color is a pure function of (aug_seed, episode id): frames of
// one episode share it, different episodes draw fresh ones. Point count,
// robot state and indicator are untouched; disabled augmentation returns the
// observation bit-exactly.
percept::Observation augment(const percept::Observation& obs, const AugmentSettings& settings,
                             uint64_t aug_seed, Rng& jitter_rng);

struct DistillConfig {
  double lambda_da = 1.0;
  double lambda_adv = 0.1;
  bool domadv = true;
  AugmentSettings augmentation;
  int pretrain_epochs = 10;
  int pretrain_batch = 64;
  double pretrain_lr = 1e-3;
  double dagger_lr = 1e-3;
  int epochs = 3;       // E
  int minibatches = 2;  // B
  int nsteps = 20;
  int env_count = 8;
  int max_updates = 40;
  int eval_interval = 2;
  int eval_episodes_per_object = 1;
  double target_success_stop = -1.0;  // absolute rate; early stop when reached
  double milestone = 0.5;

  void validate() const;
};

// Mean over the batch of the L2 distance between scaled mean actions.
double dagger_loss(const diff::Mat& expert_scaled, const diff::Mat& student_scaled);
diff::Tape::Id dagger_loss_node(diff::Tape& tape, diff::Tape::Id student_scaled,
                                const diff::Mat& expert_scaled);

struct BcResult {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  int gradient_steps = 0;
};

// Behavior cloning on the demo buffer: mean squared L2 between the student's
// scaled mean action and the stored expert action; updates the vision
// backbone and actor only.
BcResult bc_pretrain(StudentPolicy& student, const DemoBuffer& demos, int epochs, int batch_size,
                     double lr, uint64_t seed);

struct StudentTrainResult {
  double best_success = 0.0;
  int best_update = -1;
  int updates = 0;
  uint64_t env_steps = 0;
  // first update whose eval pass reached the milestone rate; censored at
  // max_updates + 1 when never reached
  int first_update_at_milestone = 0;
};

// Mean-action student episode with rendering; early-exits on success.
bool run_student_episode(sim::Env& env, const StudentPolicy& student,
                         const std::vector<percept::CameraSpec>& rig,
                         const percept::PerceptConfig& percept_cfg, uint64_t episode_seed,
                         int category_id);

// DAgger with the joint adversarial loss: roll the student, label the
// visited states with the frozen expert, and for E epochs x B minibatches
// minimize lambda_da * L_DA + lambda_adv * L_adv (cross-entropy through the
// GRL on per-point features of masked GAPart points). Updates the backbone,
// actor and domain classifier; keeps and restores the best checkpoint.
StudentTrainResult train_student(StudentPolicy& student, const ExpertPolicy& expert,
                                 const std::vector<const sim::ArticulatedObject*>& objects,
                                 const std::vector<int>& category_ids,
                                 const sim::TaskSpec& task, const sim::SimParams& params,
                                 const percept::PerceptConfig& percept_cfg,
                                 const DistillConfig& cfg, uint64_t seed,
                                 const std::string& metrics_csv = "");

}  // namespace partbench::learn
