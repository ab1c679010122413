#pragma once

#include "partbench/bench/splits.hpp"
#include "partbench/learn/distill.hpp"
#include "partbench/learn/ppo.hpp"

namespace partbench::bench {

// Full experiment description. The JSON schema mirrors the struct layout;
// any subset of keys may appear in a config file and overlays the defaults
// (print them with `partbench <cmd> --dump-defaults`).
struct ExperimentConfig {
  sim::TaskClass task = sim::TaskClass::OpenDrawer;
  std::vector<uint64_t> seeds = {0, 1, 2};
  std::string out_dir = "out";
  int workers = 1;

  // ablation toggles; any combination is valid
  bool canonicalize = true;
  bool train_student = true;
  bool pretrain = true;
  bool augment = true;
  bool domadv = true;

  // splits
  std::string split_manifest;  // optional path; empty -> procedural splits
  std::vector<std::string> categories;  // empty -> registry list for the task
  SplitCounts counts;
  uint64_t split_seed = 7;

  sim::SimParams sim_params;
  int episode_length = 200;
  learn::PPOConfig ppo;
  learn::DistillConfig distill;
  learn::StudentSpec student;
  percept::PerceptConfig percept;
  int demo_buffer_size = 8;
  int eval_episodes_per_object = 2;

  sim::TaskSpec task_spec() const;
  Splits resolve_splits() const;
};

ExperimentConfig default_config(sim::TaskClass task);

nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
// Overlays `j` on top of `base`.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base);
ExperimentConfig load_config(const std::string& path);

}  // namespace partbench::bench
