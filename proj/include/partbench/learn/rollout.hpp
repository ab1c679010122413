#pragma once

#include "partbench/canon/reward.hpp"
#include "partbench/learn/policy.hpp"

namespace partbench::learn {

// Fixed pool of environments, one object per slot (round-robin over the
// instance list, order shuffled by seed). Episodes run the full horizon;
// success is latched, not terminal. Each slot owns an independent episode
// seed stream, so stepping order across slots never changes trajectories.
class EnvPool {
 public:
  EnvPool(std::vector<const sim::ArticulatedObject*> objects, sim::TaskSpec task,
          sim::SimParams params, int n_envs, uint64_t seed);

  int size() const { return int(envs_.size()); }
  sim::Env& env(int i) { return *envs_[size_t(i)]; }
  const canon::TaskGoal& goal(int i) const { return goals_[size_t(i)]; }
  int object_index(int i) const { return object_of_[size_t(i)]; }

  void reset_all();
  // Steps slot i; on episode end records the success latch and starts the
  // next episode. Returns (reward, done).
  std::pair<double, bool> step(int i, const sim::Action& action);

  // episode accounting
  int64_t episodes_finished() const { return episodes_done_; }
  double recent_success_rate(int window = 64) const;

 private:
  void reset_env(int i);

  std::vector<std::unique_ptr<sim::Env>> envs_;
  std::vector<const sim::ArticulatedObject*> objects_;
  std::vector<canon::TaskGoal> goals_;
  std::vector<int> object_of_;
  std::vector<int64_t> episode_counter_;
  uint64_t seed_ = 0;
  int64_t episodes_done_ = 0;
  std::vector<char> recent_;  // ring of episode outcomes
  size_t recent_pos_ = 0;
};

struct RolloutBatch {
  diff::Mat states;       // (T*E) x ds, row index t*E + e
  diff::Mat actions_raw;  // (T*E) x 7
  diff::Mat means_old;    // (T*E) x 7
  Eigen::VectorXd log_probs_old;  // T*E
  Eigen::RowVectorXd log_std_old;
  Eigen::MatrixXd rewards, dones, values;  // T x E
  Eigen::MatrixXd advantages, returns;     // filled by compute_gae
  int t_steps = 0, n_envs = 0;

  Eigen::Index flat(int t, int e) const { return Eigen::Index(t) * n_envs + e; }
  Eigen::VectorXd advantages_flat() const;
  Eigen::VectorXd returns_flat() const;
};

// Samples nsteps from every environment with the stochastic policy and fills
// advantages/returns via GAE.
RolloutBatch collect_rollout(EnvPool& pool, const ExpertPolicy& policy, int nsteps,
                             double gamma, double gae_lambda, Rng& rng);

// Mean-action episode on one env; returns the success latch. Episodes end
// early once success is reached.
bool run_expert_episode(sim::Env& env, const ExpertPolicy& policy, uint64_t episode_seed);

}  // namespace partbench::learn
