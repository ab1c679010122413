#include "partbench/learn/rollout.hpp"

#include "partbench/learn/gae.hpp"

namespace partbench::learn {

EnvPool::EnvPool(std::vector<const sim::ArticulatedObject*> objects, sim::TaskSpec task,
                 sim::SimParams params, int n_envs, uint64_t seed)
    : objects_(std::move(objects)), seed_(seed) {
  if (objects_.empty()) throw ConfigError("EnvPool needs at least one object");
  Rng rng(mix_seed(seed, 0x9001));
  std::vector<int> order(objects_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[size_t(rng.uniform_int(0, int64_t(i) - 1))]);

  for (int e = 0; e < n_envs; ++e) {
    const int oi = order[size_t(e) % order.size()];
    object_of_.push_back(oi);
    envs_.push_back(std::make_unique<sim::Env>(objects_[size_t(oi)], task, params));
    goals_.push_back(canon::task_goal(*objects_[size_t(oi)], task));
    episode_counter_.push_back(0);
  }
  recent_.assign(256, -1);
  reset_all();
}

void EnvPool::reset_env(int i) {
  const uint64_t ep_seed = mix_seed(seed_, uint64_t(i), uint64_t(episode_counter_[size_t(i)]));
  envs_[size_t(i)]->reset(ep_seed);
  episode_counter_[size_t(i)]++;
}

void EnvPool::reset_all() {
  for (int i = 0; i < size(); ++i) reset_env(i);
}

std::pair<double, bool> EnvPool::step(int i, const sim::Action& action) {
  sim::Env& env = *envs_[size_t(i)];
  env.step(action);
  const double reward = canon::total_reward(env.state(), env.prev_state(), env.gripper(),
                                            env.task(), env.target_joint_index(), goals_[size_t(i)]);
  const bool done = env.done();
  if (done) {
    recent_[recent_pos_ % recent_.size()] = env.success_ever() ? 1 : 0;
    recent_pos_++;
    episodes_done_++;
    reset_env(i);
  }
  return {reward, done};
}

double EnvPool::recent_success_rate(int window) const {
  const size_t n = std::min<size_t>({size_t(window), recent_pos_, recent_.size()});
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (size_t k = 0; k < n; ++k)
    acc += recent_[(recent_pos_ - 1 - k) % recent_.size()] > 0 ? 1.0 : 0.0;
  return acc / double(n);
}

Eigen::VectorXd RolloutBatch::advantages_flat() const {
  Eigen::VectorXd v(Eigen::Index(t_steps) * n_envs);
  for (int t = 0; t < t_steps; ++t)
    for (int e = 0; e < n_envs; ++e) v[flat(t, e)] = advantages(t, e);
  return v;
}

Eigen::VectorXd RolloutBatch::returns_flat() const {
  Eigen::VectorXd v(Eigen::Index(t_steps) * n_envs);
  for (int t = 0; t < t_steps; ++t)
    for (int e = 0; e < n_envs; ++e) v[flat(t, e)] = returns(t, e);
  return v;
}

RolloutBatch collect_rollout(EnvPool& pool, const ExpertPolicy& policy, int nsteps,
                             double gamma, double gae_lambda, Rng& rng) {
  const int n = pool.size();
  RolloutBatch batch;
  batch.t_steps = nsteps;
  batch.n_envs = n;
  batch.states.resize(Eigen::Index(nsteps) * n, policy.input_dim);
  batch.actions_raw.resize(Eigen::Index(nsteps) * n, sim::Action::kDim);
  batch.means_old.resize(Eigen::Index(nsteps) * n, sim::Action::kDim);
  batch.log_probs_old.resize(Eigen::Index(nsteps) * n);
  batch.log_std_old = policy.log_std();
  batch.rewards.resize(nsteps, n);
  batch.dones.resize(nsteps, n);
  batch.values.resize(nsteps, n);

  diff::Mat step_states(n, policy.input_dim);
  for (int t = 0; t < nsteps; ++t) {
    for (int e = 0; e < n; ++e)
      step_states.row(e) = policy_state(pool.env(e).state(), policy.canonicalized).transpose();
    const diff::Mat means = policy.act_mean(step_states);
    const Eigen::VectorXd vals = policy.values(step_states);
    const diff::GaussianSample sample = diff::sample_gaussian(means, policy.log_std(), rng);
    const diff::Mat scaled = policy.scaler.scale(sample.actions);

    for (int e = 0; e < n; ++e) {
      sim::Env& env = pool.env(e);
      const sim::Action act = compose_action(env.state().x, env.state().r, scaled.row(e).transpose());
      const auto [reward, done] = pool.step(e, act);
      batch.states.row(batch.flat(t, e)) = step_states.row(e);
      batch.actions_raw.row(batch.flat(t, e)) = sample.actions.row(e);
      batch.means_old.row(batch.flat(t, e)) = means.row(e);
      batch.log_probs_old[batch.flat(t, e)] = sample.log_prob[e];
      batch.rewards(t, e) = reward;
      batch.dones(t, e) = done ? 1.0 : 0.0;
      batch.values(t, e) = vals[e];
    }
  }

  diff::Mat last_states(n, policy.input_dim);
  for (int e = 0; e < n; ++e)
    last_states.row(e) = policy_state(pool.env(e).state(), policy.canonicalized).transpose();
  const Eigen::RowVectorXd bootstrap = policy.values(last_states).transpose();
  gae(batch.rewards, batch.values, batch.dones, bootstrap, gamma, gae_lambda,
      batch.advantages, batch.returns);
  return batch;
}

bool run_expert_episode(sim::Env& env, const ExpertPolicy& policy, uint64_t episode_seed) {
  env.reset(episode_seed);
  while (!env.done()) {
    const Eigen::VectorXd scaled = policy.act_scaled(policy_state(env.state(), policy.canonicalized));
    env.step(compose_action(env.state().x, env.state().r, scaled));
    if (env.success_ever()) return true;
  }
  return env.success_ever();
}

}  // namespace partbench::learn
