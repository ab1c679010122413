#include "partbench/bench/experiment.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace partbench::bench {

namespace fs = std::filesystem;

Aggregate aggregate(const std::vector<double>& values) {
  Aggregate a;
  a.n = int(values.size());
  if (values.empty()) return a;
  for (double v : values) a.mean += v;
  a.mean /= double(values.size());
  double var = 0.0;
  for (double v : values) var += (v - a.mean) * (v - a.mean);
  a.stddev = std::sqrt(var / double(values.size()));
  return a;
}

namespace {

std::vector<const sim::ArticulatedObject*> ptrs(const std::vector<sim::ArticulatedObject>& v) {
  std::vector<const sim::ArticulatedObject*> out;
  out.reserve(v.size());
  for (const auto& o : v) out.push_back(&o);
  return out;
}

std::map<std::string, int> category_id_map(const Splits& splits) {
  std::map<std::string, int> ids;
  for (size_t i = 0; i < splits.train_categories.size(); ++i)
    ids[splits.train_categories[i]] = int(i);
  return ids;
}

std::vector<int> ids_for(const std::vector<sim::ArticulatedObject>& objs,
                         const std::map<std::string, int>& ids) {
  std::vector<int> out;
  for (const auto& o : objs) {
    auto it = ids.find(o.category);
    out.push_back(it == ids.end() ? -1 : it->second);
  }
  return out;
}

}  // namespace

EvalReport run_experiment(const ExperimentConfig& cfg) {
  EvalReport report;
  report.task = cfg.task;
  report.budget_max_env_steps = cfg.ppo.max_env_steps;
  report.budget_max_student_updates = cfg.distill.max_updates;

  fs::create_directories(cfg.out_dir);
  const Splits splits = cfg.resolve_splits();
  save_splits(cfg.out_dir + "/splits.json", splits);

  const sim::TaskSpec task_spec = cfg.task_spec();
  const auto cat_ids = category_id_map(splits);

  std::vector<sim::ArticulatedObject> train_objs = generate_instances(splits.train, cfg.task);
  std::vector<sim::ArticulatedObject> vi_objs = generate_instances(splits.val_intra, cfg.task);
  std::vector<sim::ArticulatedObject> vx_objs = generate_instances(splits.val_inter, cfg.task);
  const auto train_ptrs = ptrs(train_objs), vi_ptrs = ptrs(vi_objs), vx_ptrs = ptrs(vx_objs);

  int failures = 0;
  for (uint64_t seed : cfg.seeds) {
    SeedOutcome outcome;
    outcome.seed = seed;
    const std::string seed_dir = cfg.out_dir + "/seed_" + std::to_string(seed);
    fs::create_directories(seed_dir);
    try {
      // expert
      sim::Env probe(train_ptrs[0], task_spec, cfg.sim_params);
      probe.reset(0);
      const int in_dim = int(learn::flatten_state(probe.state()).size());
      learn::ExpertPolicy expert = learn::make_expert_policy(
          in_dim, cfg.ppo.hidden, cfg.sim_params.finger_max_width, cfg.canonicalize, seed);
      const learn::ExpertTrainResult etr =
          learn::train_expert(expert, train_ptrs, task_spec, cfg.sim_params, cfg.ppo, seed,
                              seed_dir + "/expert_metrics.csv");
      outcome.expert_env_steps = etr.env_steps;
      outcome.expert_updates = etr.updates;
      outcome.expert_best_eval = etr.best_success;
      save_expert(seed_dir + "/expert.ckpt", expert,
                  {{"seed", seed}, {"task", sim::task_class_name(cfg.task)}});

      const AgentFactory expert_agent = [&expert]() { return std::make_unique<ExpertAgent>(&expert); };
      const uint64_t eval_seed = mix_seed(seed, 0xe5eed);
      EvalResult etrain = evaluate(expert_agent, train_ptrs, task_spec, cfg.sim_params,
                                   cfg.eval_episodes_per_object, eval_seed, cfg.workers);
      outcome.expert.train = 100.0 * etrain.rate();
      outcome.per_object_train = etrain.per_object;
      outcome.expert.val_intra = 100.0 * evaluate(expert_agent, vi_ptrs, task_spec, cfg.sim_params,
                                                  cfg.eval_episodes_per_object, eval_seed, cfg.workers)
                                             .rate();
      outcome.expert.val_inter = 100.0 * evaluate(expert_agent, vx_ptrs, task_spec, cfg.sim_params,
                                                  cfg.eval_episodes_per_object, eval_seed, cfg.workers)
                                             .rate();

      if (cfg.train_student) {
        const std::vector<int> train_ids = ids_for(train_objs, cat_ids);
        learn::DemoBuffer demos;
        if (cfg.pretrain) {
          demos = learn::collect_demos(expert, train_ptrs, train_ids, task_spec, cfg.sim_params,
                                       cfg.percept, cfg.demo_buffer_size, mix_seed(seed, 0xde01));
          learn::save_demos(seed_dir + "/demos.bin", demos);
        }
        learn::StudentSpec sspec = cfg.student;
        sspec.n_q = cfg.sim_params.n_q;
        sspec.n_categories = cfg.domadv ? int(splits.train_categories.size()) : 0;
        sspec.finger_max_width = cfg.sim_params.finger_max_width;
        learn::StudentPolicy student = learn::make_student_policy(sspec, mix_seed(seed, 0x57));
        if (cfg.pretrain)
          learn::bc_pretrain(student, demos, cfg.distill.pretrain_epochs, cfg.distill.pretrain_batch,
                             cfg.distill.pretrain_lr, seed);
        learn::DistillConfig dc = cfg.distill;
        dc.augmentation.enabled = cfg.augment;
        dc.domadv = cfg.domadv;
        const learn::StudentTrainResult str =
            learn::train_student(student, expert, train_ptrs, train_ids, task_spec, cfg.sim_params,
                                 cfg.percept, dc, seed, seed_dir + "/student_metrics.csv");
        outcome.student_env_steps = str.env_steps;
        outcome.student_updates = str.updates;
        outcome.student_best_eval = str.best_success;
        save_student(seed_dir + "/student.ckpt", student,
                     {{"seed", seed}, {"task", sim::task_class_name(cfg.task)}});

        const AgentFactory student_agent = [&]() {
          return std::make_unique<StudentAgent>(&student, cfg.percept, cat_ids);
        };
        outcome.student.train = 100.0 * evaluate(student_agent, train_ptrs, task_spec, cfg.sim_params,
                                                 cfg.eval_episodes_per_object, eval_seed, cfg.workers)
                                            .rate();
        outcome.student.val_intra =
            100.0 * evaluate(student_agent, vi_ptrs, task_spec, cfg.sim_params,
                             cfg.eval_episodes_per_object, eval_seed, cfg.workers)
                        .rate();
        outcome.student.val_inter =
            100.0 * evaluate(student_agent, vx_ptrs, task_spec, cfg.sim_params,
                             cfg.eval_episodes_per_object, eval_seed, cfg.workers)
                        .rate();
        outcome.has_student = true;
      }
      outcome.ok = true;
    } catch (const std::exception& e) {
      outcome.ok = false;
      outcome.error = e.what();
      ++failures;
      std::cerr << "seed " << seed << " failed: " << e.what() << "\n";
    }
    report.seeds.push_back(std::move(outcome));
  }

  if (failures == int(cfg.seeds.size()))
    throw TrainingError("run_experiment: every seed failed");

  std::vector<double> et, evi, evx, st, svi, svx;
  for (const auto& s : report.seeds) {
    if (!s.ok) continue;
    et.push_back(s.expert.train);
    evi.push_back(s.expert.val_intra);
    evx.push_back(s.expert.val_inter);
    if (s.has_student) {
      st.push_back(s.student.train);
      svi.push_back(s.student.val_intra);
      svx.push_back(s.student.val_inter);
    }
  }
  report.expert_train = aggregate(et);
  report.expert_val_intra = aggregate(evi);
  report.expert_val_inter = aggregate(evx);
  report.student_train = aggregate(st);
  report.student_val_intra = aggregate(svi);
  report.student_val_inter = aggregate(svx);
  return report;
}

static nlohmann::ordered_json agg_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"std", a.stddev}, {"n", a.n}};
}

nlohmann::ordered_json report_to_json(const EvalReport& report, const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "partbench-report";
  j["version"] = 1;
  j["task"] = sim::task_class_name(report.task);
  j["std_convention"] = "population";
  j["config"] = config_to_json(cfg);
  j["budgets"] = {{"max_env_steps", report.budget_max_env_steps},
                  {"max_student_updates", report.budget_max_student_updates}};
  j["aggregate"] = {{"expert",
                     {{"train", agg_json(report.expert_train)},
                      {"val_intra", agg_json(report.expert_val_intra)},
                      {"val_inter", agg_json(report.expert_val_inter)}}},
                    {"student",
                     {{"train", agg_json(report.student_train)},
                      {"val_intra", agg_json(report.student_val_intra)},
                      {"val_inter", agg_json(report.student_val_inter)}}}};
  j["seeds"] = nlohmann::ordered_json::array();
  for (const auto& s : report.seeds) {
    nlohmann::ordered_json sj;
    sj["seed"] = s.seed;
    sj["ok"] = s.ok;
    if (!s.ok) sj["error"] = s.error;
    sj["expert"] = {{"train", s.expert.train},
                    {"val_intra", s.expert.val_intra},
                    {"val_inter", s.expert.val_inter},
                    {"env_steps", s.expert_env_steps},
                    {"updates", s.expert_updates},
                    {"best_eval", s.expert_best_eval}};
    if (s.has_student)
      sj["student"] = {{"train", s.student.train},
                       {"val_intra", s.student.val_intra},
                       {"val_inter", s.student.val_inter},
                       {"env_steps", s.student_env_steps},
                       {"updates", s.student_updates},
                       {"best_eval", s.student_best_eval}};
    nlohmann::ordered_json po = nlohmann::ordered_json::array();
    for (const auto& oc : s.per_object_train)
      po.push_back({{"category", oc.category},
                    {"seed", oc.seed},
                    {"successes", oc.successes},
                    {"episodes", oc.episodes}});
    sj["per_object_train"] = po;
    j["seeds"].push_back(sj);
  }
  return j;
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << "task: " << sim::task_class_name(report.task) << "\n";
  out << "success rate (%), mean +- population std over seeds\n\n";
  auto row = [&](const std::string& name, const Aggregate& tr, const Aggregate& vi, const Aggregate& vx) {
    out << std::left << std::setw(10) << name << std::right << std::fixed << std::setprecision(1);
    out << std::setw(8) << tr.mean << " +-" << std::setw(5) << tr.stddev;
    out << std::setw(8) << vi.mean << " +-" << std::setw(5) << vi.stddev;
    out << std::setw(8) << vx.mean << " +-" << std::setw(5) << vx.stddev << "\n";
  };
  out << std::left << std::setw(10) << "" << std::right << std::setw(15) << "train"
      << std::setw(15) << "val-intra" << std::setw(15) << "val-inter\n";
  row("expert", report.expert_train, report.expert_val_intra, report.expert_val_inter);
  if (report.student_train.n > 0)
    row("student", report.student_train, report.student_val_intra, report.student_val_inter);
  out << "\nseeds:";
  for (const auto& s : report.seeds) out << " " << s.seed << (s.ok ? "" : "(failed)");
  out << "\n";
  return out.str();
}

void write_report_files(const std::string& dir, const EvalReport& report,
                        const ExperimentConfig& cfg, double wall_seconds) {
  fs::create_directories(dir);
  {
    std::ofstream f(dir + "/report.json");
    if (!f) throw IoError("cannot write report.json");
    f << report_to_json(report, cfg).dump(2) << "\n";
  }
  {
    std::ofstream f(dir + "/report.txt");
    f << report_to_text(report);
  }
  {
    // measured wall-clock is non-deterministic by nature; it lives in a
    // sidecar so report.json stays byte-reproducible
    std::ofstream f(dir + "/report_timing.json");
    f << nlohmann::ordered_json{{"wall_seconds", wall_seconds}}.dump(2) << "\n";
  }
}

}  // namespace partbench::bench
