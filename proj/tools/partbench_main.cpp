#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "partbench/bench/experiment.hpp"
#include "partbench/bench/selftest.hpp"
#include "partbench/sim/manifest.hpp"

namespace fs = std::filesystem;
using namespace partbench;

namespace {

struct CommonOpts {
  std::string config_path;
  int64_t seed = -1;
  std::string out;
  int workers = 0;
  bool no_canon = false, no_augment = false, no_pretrain = false, no_domadv = false;
  std::string encoder;
  int cameras = 0;
  bool dump_defaults = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "experiment config file (JSON)");
  cmd->add_option("--seed", opts.seed, "override the run seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--workers", opts.workers, "worker threads for rollouts/evaluation");
  cmd->add_flag("--no-canon", opts.no_canon, "disable part canonicalization");
  cmd->add_flag("--no-augment", opts.no_augment, "disable point-cloud augmentation");
  cmd->add_flag("--no-pretrain", opts.no_pretrain, "disable behavior-cloning pretraining");
  cmd->add_flag("--no-domadv", opts.no_domadv, "disable domain-adversarial training");
  cmd->add_option("--encoder", opts.encoder, "student encoder: sparse|pointwise")
      ->check(CLI::IsMember({"sparse", "pointwise"}));
  cmd->add_option("--cameras", opts.cameras, "camera count: 1 or 3")->check(CLI::IsMember({1, 3}));
  cmd->add_flag("--dump-defaults", opts.dump_defaults, "print the default config and exit");
}

bench::ExperimentConfig resolve_config(const CommonOpts& opts) {
  bench::ExperimentConfig cfg = opts.config_path.empty()
                                    ? bench::default_config(sim::TaskClass::OpenDrawer)
                                    : bench::load_config(opts.config_path);
  if (!opts.out.empty()) cfg.out_dir = opts.out;
  if (opts.workers > 0) cfg.workers = opts.workers;
  if (opts.seed >= 0) cfg.seeds = {uint64_t(opts.seed)};
  if (opts.no_canon) cfg.canonicalize = false;
  if (opts.no_augment) cfg.augment = false;
  if (opts.no_pretrain) cfg.pretrain = false;
  if (opts.no_domadv) cfg.domadv = false;
  if (opts.encoder == "sparse") cfg.student.encoder = learn::EncoderKind::Sparse;
  if (opts.encoder == "pointwise") cfg.student.encoder = learn::EncoderKind::Pointwise;
  if (opts.cameras > 0) cfg.percept.n_cameras = opts.cameras;
  return cfg;
}

bool handle_dump(const CommonOpts& opts) {
  if (!opts.dump_defaults) return false;
  std::cout << bench::config_to_json(resolve_config(opts)).dump(2) << "\n";
  return true;
}

std::vector<const sim::ArticulatedObject*> ptrs(const std::vector<sim::ArticulatedObject>& v) {
  std::vector<const sim::ArticulatedObject*> out;
  for (const auto& o : v) out.push_back(&o);
  return out;
}

int cmd_gen_assets(const CommonOpts& opts) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  fs::create_directories(cfg.out_dir);
  const bench::Splits splits = cfg.resolve_splits();
  bench::save_splits(cfg.out_dir + "/splits.json", splits);

  auto dump_group = [&](const std::string& name, const std::vector<bench::InstanceRef>& refs) {
    const std::string dir = cfg.out_dir + "/assets/" + name;
    fs::create_directories(dir);
    for (size_t i = 0; i < refs.size(); ++i) {
      const sim::ArticulatedObject obj = sim::generate_object(refs[i].seed, refs[i].category, cfg.task);
      sim::save_object(dir + "/" + refs[i].category + "_" + std::to_string(refs[i].seed) + ".json", obj);
    }
  };
  dump_group("train", splits.train);
  dump_group("val_intra", splits.val_intra);
  dump_group("val_inter", splits.val_inter);

  // sample observation cloud of the first training instance, in the
  // documented binary format
  const sim::ArticulatedObject obj =
      sim::generate_object(splits.train[0].seed, splits.train[0].category, cfg.task);
  sim::Env env(&obj, cfg.task_spec(), cfg.sim_params);
  env.reset(0);
  const auto rig = percept::make_rig(cfg.percept);
  const percept::Observation obs = percept::make_observation(env, rig, cfg.percept);
  percept::save_cloud(cfg.out_dir + "/sample_cloud.bin", obs.cloud, rig);

  std::cout << "assets written to " << cfg.out_dir << " (train " << splits.train.size()
            << ", val-intra " << splits.val_intra.size() << ", val-inter " << splits.val_inter.size()
            << ")\n";
  return 0;
}

int cmd_train_expert(const CommonOpts& opts) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  const uint64_t seed = cfg.seeds.front();
  const bench::Splits splits = cfg.resolve_splits();
  const auto train_objs = bench::generate_instances(splits.train, cfg.task);
  const std::string dir = cfg.out_dir + "/seed_" + std::to_string(seed);
  fs::create_directories(dir);

  sim::Env probe(&train_objs[0], cfg.task_spec(), cfg.sim_params);
  probe.reset(0);
  learn::ExpertPolicy expert =
      learn::make_expert_policy(int(learn::flatten_state(probe.state()).size()), cfg.ppo.hidden,
                                cfg.sim_params.finger_max_width, cfg.canonicalize, seed);
  const learn::ExpertTrainResult res = learn::train_expert(
      expert, ptrs(train_objs), cfg.task_spec(), cfg.sim_params, cfg.ppo, seed, dir + "/expert_metrics.csv");
  learn::save_expert(dir + "/expert.ckpt", expert,
                     {{"seed", seed}, {"task", sim::task_class_name(cfg.task)}});
  std::cout << "expert trained: best eval success " << res.best_success << " at update "
            << res.best_update << " (" << res.env_steps << " env steps)\n"
            << "checkpoint: " << dir << "/expert.ckpt\n";
  return 0;
}

int cmd_collect_demos(const CommonOpts& opts, const std::string& expert_path) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  const uint64_t seed = cfg.seeds.front();
  const std::string dir = cfg.out_dir + "/seed_" + std::to_string(seed);
  const std::string ckpt = expert_path.empty() ? dir + "/expert.ckpt" : expert_path;
  learn::ExpertPolicy expert = learn::load_expert(ckpt);

  const bench::Splits splits = cfg.resolve_splits();
  const auto train_objs = bench::generate_instances(splits.train, cfg.task);
  std::map<std::string, int> ids;
  for (size_t i = 0; i < splits.train_categories.size(); ++i) ids[splits.train_categories[i]] = int(i);
  std::vector<int> cat_ids;
  for (const auto& o : train_objs) cat_ids.push_back(ids.count(o.category) ? ids[o.category] : -1);

  const learn::DemoBuffer demos =
      learn::collect_demos(expert, ptrs(train_objs), cat_ids, cfg.task_spec(), cfg.sim_params,
                           cfg.percept, cfg.demo_buffer_size, mix_seed(seed, 0xde01));
  fs::create_directories(dir);
  learn::save_demos(dir + "/demos.bin", demos);
  std::cout << "collected " << demos.trajs.size() << " successful trajectories ("
            << demos.total_steps() << " steps) -> " << dir << "/demos.bin\n";
  return 0;
}

int cmd_train_student(const CommonOpts& opts, const std::string& expert_path,
                      const std::string& demo_path) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  const uint64_t seed = cfg.seeds.front();
  const std::string dir = cfg.out_dir + "/seed_" + std::to_string(seed);
  learn::ExpertPolicy expert =
      learn::load_expert(expert_path.empty() ? dir + "/expert.ckpt" : expert_path);

  const bench::Splits splits = cfg.resolve_splits();
  const auto train_objs = bench::generate_instances(splits.train, cfg.task);
  std::map<std::string, int> ids;
  for (size_t i = 0; i < splits.train_categories.size(); ++i) ids[splits.train_categories[i]] = int(i);
  std::vector<int> cat_ids;
  for (const auto& o : train_objs) cat_ids.push_back(ids.count(o.category) ? ids[o.category] : -1);

  learn::StudentSpec spec = cfg.student;
  spec.n_q = cfg.sim_params.n_q;
  spec.n_categories = cfg.domadv ? int(splits.train_categories.size()) : 0;
  spec.finger_max_width = cfg.sim_params.finger_max_width;
  learn::StudentPolicy student = learn::make_student_policy(spec, mix_seed(seed, 0x57));

  if (cfg.pretrain) {
    const learn::DemoBuffer demos =
        learn::load_demos(demo_path.empty() ? dir + "/demos.bin" : demo_path);
    const learn::BcResult bc = learn::bc_pretrain(student, demos, cfg.distill.pretrain_epochs,
                                                  cfg.distill.pretrain_batch, cfg.distill.pretrain_lr, seed);
    std::cout << "BC pretraining: loss " << bc.initial_loss << " -> " << bc.final_loss << "\n";
  }
  learn::DistillConfig dc = cfg.distill;
  dc.augmentation.enabled = cfg.augment;
  dc.domadv = cfg.domadv;
  const learn::StudentTrainResult res =
      learn::train_student(student, expert, ptrs(train_objs), cat_ids, cfg.task_spec(),
                           cfg.sim_params, cfg.percept, dc, seed, dir + "/student_metrics.csv");
  learn::save_student(dir + "/student.ckpt", student,
                      {{"seed", seed}, {"task", sim::task_class_name(cfg.task)}});
  std::cout << "student trained: best eval success " << res.best_success << " at update "
            << res.best_update << "\ncheckpoint: " << dir << "/student.ckpt\n";
  return 0;
}

int cmd_eval(const CommonOpts& opts, const std::string& ckpt, const std::string& agent_kind,
             const std::string& split_name) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  const bench::Splits splits = cfg.resolve_splits();
  std::map<std::string, int> ids;
  for (size_t i = 0; i < splits.train_categories.size(); ++i) ids[splits.train_categories[i]] = int(i);

  learn::ExpertPolicy expert;
  learn::StudentPolicy student;
  bench::AgentFactory factory;
  if (agent_kind == "oracle") {
    factory = []() { return std::make_unique<bench::OracleAgent>(); };
  } else if (agent_kind == "zero") {
    const double w = cfg.sim_params.finger_max_width;
    factory = [w]() { return std::make_unique<bench::ZeroAgent>(w); };
  } else {
    if (ckpt.empty()) throw ConfigError("--ckpt is required unless --agent oracle|zero");
    const nlohmann::json meta = diff::read_checkpoint_metadata(ckpt);
    if (meta.at("kind") == "expert") {
      expert = learn::load_expert(ckpt);
      factory = [&expert]() { return std::make_unique<bench::ExpertAgent>(&expert); };
    } else {
      student = learn::load_student(ckpt);
      factory = [&]() { return std::make_unique<bench::StudentAgent>(&student, cfg.percept, ids); };
    }
  }

  nlohmann::ordered_json out;
  auto run_split = [&](const std::string& name, const std::vector<bench::InstanceRef>& refs) {
    const auto objs = bench::generate_instances(refs, cfg.task);
    const bench::EvalResult res =
        bench::evaluate(factory, ptrs(objs), cfg.task_spec(), cfg.sim_params,
                        cfg.eval_episodes_per_object, mix_seed(cfg.seeds.front(), 0xe5eed), cfg.workers);
    std::cout << name << ": " << 100.0 * res.rate() << "% (" << res.successes << "/" << res.episodes
              << ")\n";
    out[name] = {{"rate", res.rate()}, {"successes", res.successes}, {"episodes", res.episodes}};
  };
  if (split_name == "train" || split_name == "all") run_split("train", splits.train);
  if (split_name == "val-intra" || split_name == "all") run_split("val_intra", splits.val_intra);
  if (split_name == "val-inter" || split_name == "all") run_split("val_inter", splits.val_inter);

  fs::create_directories(cfg.out_dir);
  std::ofstream f(cfg.out_dir + "/eval.json");
  f << out.dump(2) << "\n";
  return 0;
}

int cmd_report(const CommonOpts& opts) {
  const bench::ExperimentConfig cfg = resolve_config(opts);
  const auto t0 = std::chrono::steady_clock::now();
  const bench::EvalReport report = bench::run_experiment(cfg);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bench::write_report_files(cfg.out_dir, report, cfg, wall);
  std::cout << bench::report_to_text(report);
  std::cout << "report written to " << cfg.out_dir << "/report.json\n";
  return 0;
}

int cmd_selftest(const CommonOpts& opts) {
  const uint64_t seed = opts.seed >= 0 ? uint64_t(opts.seed) : 17;
  const auto results = bench::run_selftest(seed);
  bool all = true;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.seconds << "s)";
    if (!r.pass) std::cout << "  " << r.detail;
    std::cout << "\n";
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cross-category part-manipulation policy learning benchmark"};
  app.require_subcommand(1);

  CommonOpts gen_opts, tre_opts, dem_opts, stu_opts, eval_opts, rep_opts, self_opts;
  std::string expert_path, demo_path, ckpt_path, agent_kind = "checkpoint", split_name = "all";

  add_common(app.add_subcommand("gen-assets", "generate split manifest and asset files"), gen_opts);
  add_common(app.add_subcommand("train-expert", "train the state-based PPO expert"), tre_opts);
  auto* dem = app.add_subcommand("collect-demos", "collect successful expert demonstrations");
  add_common(dem, dem_opts);
  dem->add_option("--expert", expert_path, "expert checkpoint path");
  auto* stu = app.add_subcommand("train-student", "BC-pretrain and DAgger-distill the student");
  add_common(stu, stu_opts);
  stu->add_option("--expert", expert_path, "expert checkpoint path");
  stu->add_option("--demos", demo_path, "demo buffer path");
  auto* ev = app.add_subcommand("eval", "evaluate a checkpoint or scripted agent on the splits");
  add_common(ev, eval_opts);
  ev->add_option("--ckpt", ckpt_path, "checkpoint to evaluate");
  ev->add_option("--agent", agent_kind, "checkpoint|oracle|zero")
      ->check(CLI::IsMember({"checkpoint", "oracle", "zero"}));
  ev->add_option("--split", split_name, "train|val-intra|val-inter|all")
      ->check(CLI::IsMember({"train", "val-intra", "val-inter", "all"}));
  add_common(app.add_subcommand("report", "run the full multi-seed experiment and write reports"),
             rep_opts);
  add_common(app.add_subcommand("selftest", "run the invariant suite"), self_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("gen-assets"))
      return handle_dump(gen_opts) ? 0 : cmd_gen_assets(gen_opts);
    if (app.got_subcommand("train-expert"))
      return handle_dump(tre_opts) ? 0 : cmd_train_expert(tre_opts);
    if (app.got_subcommand("collect-demos"))
      return handle_dump(dem_opts) ? 0 : cmd_collect_demos(dem_opts, expert_path);
    if (app.got_subcommand("train-student"))
      return handle_dump(stu_opts) ? 0 : cmd_train_student(stu_opts, expert_path, demo_path);
    if (app.got_subcommand("eval"))
      return handle_dump(eval_opts) ? 0 : cmd_eval(eval_opts, ckpt_path, agent_kind, split_name);
    if (app.got_subcommand("report")) return handle_dump(rep_opts) ? 0 : cmd_report(rep_opts);
    if (app.got_subcommand("selftest")) return cmd_selftest(self_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
