#pragma once

#include "partbench/learn/rollout.hpp"

namespace partbench::learn {

struct PPOConfig {
  double learning_rate = 3e-4;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double desired_kl = 0.01;
  double clip_range = 0.1;
  double entropy_coef = 0.01;
  double value_coef = 1.0;
  double init_noise_std = 1.0;
  int epochs = 5;        // E
  int minibatches = 2;   // B
  int nsteps = 20;
  int env_count = 32;
  std::vector<int> hidden = {128, 128, 64};
  bool normalize_advantages = true;  // per rollout
  double lr_min = 1e-6, lr_max = 1e-2;
  uint64_t max_env_steps = 2'000'000;
  double target_success_stop = -1.0;  // early stop when eval success reaches this
  int eval_interval = 10;             // updates between eval passes
  int eval_episodes_per_object = 1;

  void validate(int) const;
};

struct PPOStats {
  double mean_kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double lr = 0.0;
};

// One PPO update: E epochs x B minibatches of clipped-surrogate ascent with
// value loss and entropy bonus; the learning rate adapts around desired_kl
// (halved when the measured KL exceeds twice the target, doubled below half
// of it, clamped to [lr_min, lr_max]). Leaves `lr` updated for the caller.
PPOStats ppo_update(ExpertPolicy& policy, const RolloutBatch& rollout, const PPOConfig& cfg,
                    double& lr, diff::AdamState& adam, Rng& shuffle_rng);

// Deterministic mean-action evaluation over object instances.
double eval_expert(const ExpertPolicy& policy, const std::vector<const sim::ArticulatedObject*>& objects,
                   const sim::TaskSpec& task, const sim::SimParams& params,
                   int episodes_per_object, uint64_t seed);

struct ExpertTrainResult {
  double best_success = 0.0;
  int best_update = -1;
  uint64_t env_steps = 0;
  int updates = 0;
  // first update index at which an eval pass reached the given success level
  int first_update_at_half = -1;
};

// PPO training loop (sample -> canonicalize -> update), tracking evaluation
// success and keeping the highest-scoring checkpoint, which is restored into
// `policy` before returning. Appends one CSV row per update to metrics_csv
// when non-empty.
ExpertTrainResult train_expert(ExpertPolicy& policy,
                               const std::vector<const sim::ArticulatedObject*>& objects,
                               const sim::TaskSpec& task, const sim::SimParams& params,
                               const PPOConfig& cfg, uint64_t seed,
                               const std::string& metrics_csv = "");

}  // namespace partbench::learn
