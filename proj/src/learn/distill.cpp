#include "partbench/learn/distill.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

namespace partbench::learn {

using diff::Mat;
using diff::Tape;

void DistillConfig::validate() const {
  if (!(lambda_da > 0.0)) throw ConfigError("lambda_da must be positive");
  if (lambda_adv < 0.0) throw ConfigError("lambda_adv must be non-negative");
  if (epochs <= 0 || minibatches <= 0 || nsteps <= 0 || env_count <= 0 || max_updates <= 0)
    throw ConfigError("distillation loop sizes must be positive");
}

percept::Observation augment(const percept::Observation& obs, const AugmentSettings& settings,
                             uint64_t aug_seed, Rng& jitter_rng) {
  percept::Observation out = obs;
  if (!settings.enabled) return out;
  if (settings.color_replace) {
    Rng color_rng(mix_seed(aug_seed, obs.episode_id, 0xc001));
    const Vec3 color(color_rng.uniform(), color_rng.uniform(), color_rng.uniform());
    for (Eigen::Index i = 0; i < out.cloud.rows(); ++i)
      if (!out.part_mask.empty() && out.part_mask[size_t(i)] != percept::kTagNone)
        out.cloud.row(i).segment<3>(3) = color.transpose();
  }
  if (settings.jitter_distance > 0.0) {
    const double a = settings.jitter_distance / std::sqrt(3.0);
    for (Eigen::Index i = 0; i < out.cloud.rows(); ++i)
      for (int j = 0; j < 3; ++j) out.cloud(i, j) += jitter_rng.uniform(-a, a);
  }
  return out;
}

double dagger_loss(const Mat& expert_scaled, const Mat& student_scaled) {
  if (expert_scaled.rows() != student_scaled.rows() || expert_scaled.cols() != student_scaled.cols())
    throw ShapeError("dagger_loss: shape mismatch");
  return (expert_scaled - student_scaled).rowwise().norm().mean();
}

diff::Tape::Id dagger_loss_node(Tape& tape, Tape::Id student_scaled, const Mat& expert_scaled) {
  Tape::Id d = tape.sub(student_scaled, tape.constant(expert_scaled));
  Tape::Id sq = tape.rowwise_sum(tape.square(d));
  // epsilon keeps the sqrt differentiable at exact matches
  return tape.mean(tape.sqrt(tape.add_scalar(sq, 1e-12)));
}

BcResult bc_pretrain(StudentPolicy& student, const DemoBuffer& demos, int epochs, int batch_size,
                     double lr, uint64_t seed) {
  std::vector<const DemoStep*> steps;
  for (const auto& traj : demos.trajs)
    for (const auto& s : traj.steps) steps.push_back(&s);
  if (steps.empty()) throw InputError("bc_pretrain: empty demo buffer");

  Rng rng(mix_seed(seed, 0xbc));
  diff::AdamState adam;
  std::vector<diff::Param*> params = student.policy_params();
  BcResult result;

  auto batch_loss = [&](const std::vector<const DemoStep*>& mb, bool update) {
    std::vector<const percept::Observation*> obs;
    Mat targets(Eigen::Index(mb.size()), sim::Action::kDim);
    for (size_t i = 0; i < mb.size(); ++i) {
      obs.push_back(&mb[i]->obs);
      targets.row(Eigen::Index(i)) = mb[i]->action.transpose();
    }
    Tape tape;
    const StudentForward fwd = student_forward(tape, student, obs);
    Tape::Id diff_node = tape.sub(fwd.mean_scaled, tape.constant(targets));
    Tape::Id loss = tape.mean(tape.rowwise_sum(tape.square(diff_node)));
    const double value = tape.val(loss)(0, 0);
    if (update) {
      if (!std::isfinite(value)) throw TrainingError("non-finite BC loss");
      for (diff::Param* p : params) p->zero_grad();
      tape.backward(loss);
      diff::adam_step(params, adam, lr);
      ++result.gradient_steps;
    }
    return value;
  };

  result.initial_loss = batch_loss(steps, false);
  std::vector<size_t> order(steps.size());
  std::iota(order.begin(), order.end(), size_t(0));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[size_t(rng.uniform_int(0, int64_t(i) - 1))]);
    for (size_t at = 0; at < order.size(); at += size_t(batch_size)) {
      std::vector<const DemoStep*> mb;
      for (size_t k = at; k < std::min(order.size(), at + size_t(batch_size)); ++k)
        mb.push_back(steps[order[k]]);
      batch_loss(mb, true);
    }
  }
  result.final_loss = batch_loss(steps, false);
  return result;
}

bool run_student_episode(sim::Env& env, const StudentPolicy& student,
                         const std::vector<percept::CameraSpec>& rig,
                         const percept::PerceptConfig& percept_cfg, uint64_t episode_seed,
                         int category_id) {
  env.reset(episode_seed);
  while (!env.done()) {
    percept::Observation obs = percept::make_observation(env, rig, percept_cfg);
    obs.category_id = category_id;
    const Mat scaled = student_act(student, {&obs});
    env.step(compose_action(env.state().x, env.state().r, scaled.row(0).transpose()));
    if (env.success_ever()) return true;
  }
  return env.success_ever();
}

namespace {

struct DaggerFrame {
  percept::Observation obs;
  Eigen::VectorXd expert_action;
};

double eval_student(const StudentPolicy& student,
                    const std::vector<const sim::ArticulatedObject*>& objects,
                    const std::vector<int>& category_ids, const sim::TaskSpec& task,
                    const sim::SimParams& params, const std::vector<percept::CameraSpec>& rig,
                    const percept::PerceptConfig& percept_cfg, int episodes_per_object,
                    uint64_t seed) {
  int successes = 0, episodes = 0;
  for (size_t oi = 0; oi < objects.size(); ++oi) {
    sim::Env env(objects[oi], task, params);
    for (int ep = 0; ep < episodes_per_object; ++ep) {
      const uint64_t ep_seed = mix_seed(seed, oi, uint64_t(ep), 0xea2);
      successes += run_student_episode(env, student, rig, percept_cfg, ep_seed, category_ids[oi]) ? 1 : 0;
      ++episodes;
    }
  }
  return episodes > 0 ? double(successes) / double(episodes) : 0.0;
}

}  // namespace

StudentTrainResult train_student(StudentPolicy& student, const ExpertPolicy& expert,
                                 const std::vector<const sim::ArticulatedObject*>& objects,
                                 const std::vector<int>& category_ids,
                                 const sim::TaskSpec& task, const sim::SimParams& params,
                                 const percept::PerceptConfig& percept_cfg,
                                 const DistillConfig& cfg, uint64_t seed,
                                 const std::string& metrics_csv) {
  cfg.validate();
  if (objects.size() != category_ids.size())
    throw ConfigError("train_student: category id per object required");

  const auto rig = percept::make_rig(percept_cfg);
  EnvPool pool(objects, task, params, cfg.env_count, mix_seed(seed, 0xd0));
  Rng jitter_rng(mix_seed(seed, 0xd1));
  Rng shuffle_rng(mix_seed(seed, 0xd2));
  const uint64_t aug_seed = mix_seed(seed, 0xd3);
  diff::AdamState adam;

  std::vector<diff::Param*> trainable = student.policy_params();
  for (diff::Param* p : student.domain_params()) trainable.push_back(p);

  std::ofstream csv;
  if (!metrics_csv.empty()) {
    csv.open(metrics_csv);
    if (!csv) throw IoError("cannot write " + metrics_csv);
    csv << "update,env_steps,dagger_loss,adv_loss,success_rate,lr\n";
  }

  StudentTrainResult result;
  result.first_update_at_milestone = cfg.max_updates + 1;
  diff::ParamStore best;
  bool have_best = false;

  for (int update = 0; update < cfg.max_updates; ++update) {
    // on-policy collection with expert labels
    std::vector<DaggerFrame> frames;
    frames.reserve(size_t(cfg.nsteps) * size_t(pool.size()));
    for (int t = 0; t < cfg.nsteps; ++t) {
      std::vector<percept::Observation> step_obs(size_t(pool.size()));
      std::vector<const percept::Observation*> ptrs;
      for (int e = 0; e < pool.size(); ++e) {
        step_obs[size_t(e)] = percept::make_observation(pool.env(e), rig, percept_cfg);
        step_obs[size_t(e)].category_id = category_ids[size_t(pool.object_index(e))];
        ptrs.push_back(&step_obs[size_t(e)]);
      }
      const Mat acts = student_act(student, ptrs);
      for (int e = 0; e < pool.size(); ++e) {
        DaggerFrame frame;
        frame.expert_action =
            expert.act_scaled(policy_state(pool.env(e).state(), expert.canonicalized));
        frame.obs = std::move(step_obs[size_t(e)]);
        frames.push_back(std::move(frame));
        sim::Env& env = pool.env(e);
        pool.step(e, compose_action(env.state().x, env.state().r, acts.row(e).transpose()));
        ++result.env_steps;
      }
    }

    // E epochs x B minibatches of joint loss
    double da_acc = 0.0, adv_acc = 0.0;
    int n_mb = 0;
    std::vector<size_t> order(frames.size());
    std::iota(order.begin(), order.end(), size_t(0));
    const size_t mb_size = frames.size() / size_t(cfg.minibatches);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[size_t(shuffle_rng.uniform_int(0, int64_t(i) - 1))]);
      for (int mb = 0; mb < cfg.minibatches; ++mb) {
        std::vector<percept::Observation> aug_obs;
        std::vector<const percept::Observation*> ptrs;
        Mat targets(Eigen::Index(mb_size), sim::Action::kDim);
        aug_obs.reserve(mb_size);
        for (size_t k = 0; k < mb_size; ++k) {
          const DaggerFrame& frame = frames[order[size_t(mb) * mb_size + k]];
          aug_obs.push_back(augment(frame.obs, cfg.augmentation, aug_seed, jitter_rng));
          targets.row(Eigen::Index(k)) = frame.expert_action.transpose();
        }
        for (const auto& o : aug_obs) ptrs.push_back(&o);

        Tape tape;
        const StudentForward fwd = student_forward(tape, student, ptrs);
        Tape::Id loss = tape.scale(dagger_loss_node(tape, fwd.mean_scaled, targets), cfg.lambda_da);
        da_acc += tape.val(loss)(0, 0) / cfg.lambda_da;

        if (cfg.domadv && cfg.lambda_adv > 0.0 && student.spec.n_categories > 0) {
          // keep only samples whose mask survived the encoder downsample
          std::vector<char> has_mask(ptrs.size(), 0);
          for (int s : fwd.mask_seg) has_mask[size_t(s)] = 1;
          std::vector<int> remap(ptrs.size(), -1);
          std::vector<int> labels;
          int compact = 0;
          for (size_t s = 0; s < ptrs.size(); ++s)
            if (has_mask[s]) {
              remap[s] = compact++;
              labels.push_back(fwd.labels[s]);
            }
          if (compact > 0) {
            std::vector<int> seg;
            seg.reserve(fwd.mask_seg.size());
            for (int s : fwd.mask_seg) seg.push_back(remap[size_t(s)]);
            Tape::Id logits = encoder::domain_logits(tape, fwd.per_point, fwd.mask_rows, seg,
                                                     compact, 1.0, student.domain);
            Tape::Id ce = tape.softmax_xent_mean(logits, labels);
            adv_acc += tape.val(ce)(0, 0);
            loss = tape.add(loss, tape.scale(ce, cfg.lambda_adv));
          }
        }

        if (!std::isfinite(tape.val(loss)(0, 0))) throw TrainingError("non-finite distillation loss");
        for (diff::Param* p : trainable) p->zero_grad();
        tape.backward(loss);
        diff::adam_step(trainable, adam, cfg.dagger_lr);
        ++n_mb;
      }
    }
    result.updates = update + 1;

    double eval_success = -1.0;
    if (cfg.eval_interval > 0 && (update + 1) % cfg.eval_interval == 0) {
      eval_success = eval_student(student, objects, category_ids, task, params, rig, percept_cfg,
                                  cfg.eval_episodes_per_object, mix_seed(seed, 0xea3));
      if (eval_success >= cfg.milestone && result.first_update_at_milestone > cfg.max_updates)
        result.first_update_at_milestone = update + 1;
      if (!have_best || eval_success > result.best_success) {
        if (!have_best) {
          for (const diff::Param* p : std::as_const(student.store).all())
            best.add(p->name, p->value.rows(), p->value.cols());
          have_best = true;
        }
        best.copy_values_from(student.store);
        result.best_success = eval_success;
        result.best_update = update + 1;
      }
    }

    if (csv.is_open())
      csv << (update + 1) << ',' << result.env_steps << ',' << da_acc / n_mb << ','
          << (n_mb ? adv_acc / n_mb : 0.0) << ','
          << (eval_success >= 0.0 ? eval_success : -1.0) << ',' << cfg.dagger_lr << '\n';

    if (cfg.target_success_stop >= 0.0 && eval_success >= cfg.target_success_stop) break;
  }

  if (have_best) student.store.copy_values_from(best);
  return result;
}

}  // namespace partbench::learn
