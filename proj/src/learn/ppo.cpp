#include "partbench/learn/ppo.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

namespace partbench::learn {

using diff::Mat;
using diff::Tape;

void PPOConfig::validate(int) const {
  if (!(gamma > 0.0 && gamma <= 1.0) || !(gae_lambda > 0.0 && gae_lambda <= 1.0))
    throw ConfigError("gamma and gae_lambda must lie in (0, 1]");
  if (!(clip_range > 0.0)) throw ConfigError("clip_range must be positive");
  if (epochs <= 0 || minibatches <= 0 || nsteps <= 0 || env_count <= 0)
    throw ConfigError("PPO loop sizes must be positive");
  if ((int64_t(env_count) * nsteps) % minibatches != 0)
    throw ConfigError("env_count * nsteps must divide into the minibatch count");
}

PPOStats ppo_update(ExpertPolicy& policy, const RolloutBatch& rollout, const PPOConfig& cfg,
                    double& lr, diff::AdamState& adam, Rng& shuffle_rng) {
  const Eigen::Index total = rollout.states.rows();
  Eigen::VectorXd adv = rollout.advantages_flat();
  const Eigen::VectorXd ret = rollout.returns_flat();
  if (cfg.normalize_advantages) {
    const double mean = adv.mean();
    const double std = std::sqrt((adv.array() - mean).square().sum() / double(adv.size()));
    adv = (adv.array() - mean) / (std + 1e-8);
  }

  PPOStats stats;
  int n_minibatches = 0;
  std::vector<int> order(static_cast<size_t>(total), 0);
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index mb_size = total / cfg.minibatches;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[size_t(shuffle_rng.uniform_int(0, int64_t(i) - 1))]);
    for (int mb = 0; mb < cfg.minibatches; ++mb) {
      Mat s(mb_size, rollout.states.cols());
      Mat a(mb_size, sim::Action::kDim);
      Mat mean_old(mb_size, sim::Action::kDim);
      Eigen::VectorXd lp_old(mb_size), adv_mb(mb_size), ret_mb(mb_size);
      for (Eigen::Index r = 0; r < mb_size; ++r) {
        const int src = order[size_t(mb) * size_t(mb_size) + size_t(r)];
        s.row(r) = rollout.states.row(src);
        a.row(r) = rollout.actions_raw.row(src);
        mean_old.row(r) = rollout.means_old.row(src);
        lp_old[r] = rollout.log_probs_old[src];
        adv_mb[r] = adv[src];
        ret_mb[r] = ret[src];
      }

      Tape tape;
      Tape::Id s_node = tape.constant(s);
      Tape::Id mean = mlp_forward(tape, policy.actor, s_node);
      Tape::Id log_std = tape.leaf(*policy.head.log_std);
      Tape::Id logp = diff::gaussian_log_prob_node(tape, mean, log_std, a);
      Tape::Id ratio = tape.exp(tape.sub(logp, tape.constant(lp_old)));
      Tape::Id adv_node = tape.constant(adv_mb);
      Tape::Id surr = tape.minimum(
          tape.mul(ratio, adv_node),
          tape.mul(tape.clamp(ratio, 1.0 - cfg.clip_range, 1.0 + cfg.clip_range), adv_node));
      Tape::Id policy_loss = tape.scale(tape.mean(surr), -1.0);

      Tape::Id value = mlp_forward(tape, policy.critic, s_node);
      Tape::Id value_loss = tape.mean(tape.square(tape.sub(value, tape.constant(ret_mb))));
      Tape::Id entropy = diff::gaussian_entropy_node(tape, log_std);

      Tape::Id loss = tape.add(policy_loss, tape.scale(value_loss, cfg.value_coef));
      loss = tape.sub(loss, tape.scale(entropy, cfg.entropy_coef));

      const double loss_val = tape.val(loss)(0, 0);
      if (!std::isfinite(loss_val))
        throw TrainingError("non-finite PPO loss (policy=" + std::to_string(tape.val(policy_loss)(0, 0)) +
                            " value=" + std::to_string(tape.val(value_loss)(0, 0)) + ")");

      // KL between the rollout policy and the current one on this minibatch
      // drives the adaptive learning rate
      const double kl = diff::gaussian_kl(mean_old, rollout.log_std_old, tape.val(mean), policy.log_std());
      if (cfg.desired_kl > 0.0) {
        if (kl > 2.0 * cfg.desired_kl) lr = std::max(cfg.lr_min, lr * 0.5);
        else if (kl < 0.5 * cfg.desired_kl && kl >= 0.0) lr = std::min(cfg.lr_max, lr * 2.0);
      }

      policy.store.zero_grads();
      tape.backward(loss);
      diff::adam_step(policy.store, adam, lr);

      stats.mean_kl += kl;
      stats.policy_loss += tape.val(policy_loss)(0, 0);
      stats.value_loss += tape.val(value_loss)(0, 0);
      stats.entropy = tape.val(entropy)(0, 0);
      ++n_minibatches;
    }
  }
  stats.mean_kl /= n_minibatches;
  stats.policy_loss /= n_minibatches;
  stats.value_loss /= n_minibatches;
  stats.lr = lr;
  return stats;
}

double eval_expert(const ExpertPolicy& policy, const std::vector<const sim::ArticulatedObject*>& objects,
                   const sim::TaskSpec& task, const sim::SimParams& params,
                   int episodes_per_object, uint64_t seed) {
  int successes = 0, episodes = 0;
  for (size_t oi = 0; oi < objects.size(); ++oi) {
    sim::Env env(objects[oi], task, params);
    for (int ep = 0; ep < episodes_per_object; ++ep) {
      const uint64_t ep_seed = mix_seed(seed, oi, uint64_t(ep), 0xea1);
      successes += run_expert_episode(env, policy, ep_seed) ? 1 : 0;
      ++episodes;
    }
  }
  return episodes > 0 ? double(successes) / double(episodes) : 0.0;
}

ExpertTrainResult train_expert(ExpertPolicy& policy,
                               const std::vector<const sim::ArticulatedObject*>& objects,
                               const sim::TaskSpec& task, const sim::SimParams& params,
                               const PPOConfig& cfg, uint64_t seed,
                               const std::string& metrics_csv) {
  cfg.validate(0);
  if (objects.empty()) throw ConfigError("train_expert: empty training split");
  policy.head.log_std->value.setConstant(std::log(cfg.init_noise_std));

  EnvPool pool(objects, task, params, cfg.env_count, mix_seed(seed, 0xe0));
  Rng sample_rng(mix_seed(seed, 0x5a3));
  Rng shuffle_rng(mix_seed(seed, 0x5a4));
  diff::AdamState adam;
  double lr = cfg.learning_rate;

  std::ofstream csv;
  if (!metrics_csv.empty()) {
    csv.open(metrics_csv);
    if (!csv) throw IoError("cannot write " + metrics_csv);
    csv << "update,env_steps,mean_reward,success_rate,kl,policy_loss,value_loss,lr\n";
  }

  ExpertTrainResult result;
  diff::ParamStore best;
  bool have_best = false;

  const uint64_t steps_per_update = uint64_t(cfg.env_count) * uint64_t(cfg.nsteps);
  for (int update = 0; result.env_steps + steps_per_update <= cfg.max_env_steps; ++update) {
    RolloutBatch rollout = collect_rollout(pool, policy, cfg.nsteps, cfg.gamma, cfg.gae_lambda, sample_rng);
    result.env_steps += steps_per_update;
    const PPOStats stats = ppo_update(policy, rollout, cfg, lr, adam, shuffle_rng);
    result.updates = update + 1;

    double eval_success = -1.0;
    if (cfg.eval_interval > 0 && (update + 1) % cfg.eval_interval == 0) {
      eval_success = eval_expert(policy, objects, task, params, cfg.eval_episodes_per_object,
                                 mix_seed(seed, 0xe7a1));
      if (eval_success >= 0.5 && result.first_update_at_half < 0)
        result.first_update_at_half = update + 1;
      if (!have_best || eval_success > result.best_success) {
        if (!have_best) {
          for (const diff::Param* p : std::as_const(policy.store).all())
            best.add(p->name, p->value.rows(), p->value.cols());
          have_best = true;
        }
        best.copy_values_from(policy.store);
        result.best_success = eval_success;
        result.best_update = update + 1;
      }
    }

    if (csv.is_open()) {
      csv << (update + 1) << ',' << result.env_steps << ',' << rollout.rewards.mean() << ','
          << (eval_success >= 0.0 ? eval_success : pool.recent_success_rate()) << ','
          << stats.mean_kl << ',' << stats.policy_loss << ',' << stats.value_loss << ','
          << stats.lr << '\n';
    }

    if (cfg.target_success_stop >= 0.0 && eval_success >= cfg.target_success_stop) break;
  }

  if (have_best) policy.store.copy_values_from(best);
  return result;
}

}  // namespace partbench::learn
