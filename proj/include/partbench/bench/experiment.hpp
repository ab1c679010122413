#pragma once

#include "partbench/bench/config.hpp"
#include "partbench/bench/evaluate.hpp"

namespace partbench::bench {

struct SplitScores {
  double train = 0.0, val_intra = 0.0, val_inter = 0.0;
};

struct SeedOutcome {
  uint64_t seed = 0;
  bool ok = false;
  std::string error;
  SplitScores expert;
  SplitScores student;
  bool has_student = false;
  uint64_t expert_env_steps = 0;
  uint64_t student_env_steps = 0;
  int expert_updates = 0;
  int student_updates = 0;
  double expert_best_eval = 0.0;
  double student_best_eval = 0.0;
  std::vector<ObjectCount> per_object_train;
};

struct Aggregate {
  double mean = 0.0;
  double stddev = 0.0;  // population convention
  int n = 0;
};

// Per-split success statistics over seeds plus per-seed detail. Success
// rates are percentages. Measured wall-clock lives in a separate timing
// sidecar so the report itself is byte-reproducible.
struct EvalReport {
  sim::TaskClass task = sim::TaskClass::OpenDrawer;
  std::vector<SeedOutcome> seeds;
  Aggregate expert_train, expert_val_intra, expert_val_inter;
  Aggregate student_train, student_val_intra, student_val_inter;
  uint64_t budget_max_env_steps = 0;
  int budget_max_student_updates = 0;
};

Aggregate aggregate(const std::vector<double>& values);

// Runs every seed through train (expert, optionally demos -> pretrain ->
// student) and the three-split evaluation; aborts a seed on error and
// records it; throws when every seed fails. Writes checkpoints, metrics and
// reports under cfg.out_dir.
EvalReport run_experiment(const ExperimentConfig& cfg);

nlohmann::ordered_json report_to_json(const EvalReport& report, const ExperimentConfig& cfg);
std::string report_to_text(const EvalReport& report);
void write_report_files(const std::string& dir, const EvalReport& report,
                        const ExperimentConfig& cfg, double wall_seconds);

}  // namespace partbench::bench
