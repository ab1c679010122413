#pragma once

#include "partbench/learn/rollout.hpp"

namespace partbench::learn {

struct DemoStep {
  Eigen::VectorXd state_flat;   // raw (world-frame) flattened oracle state
  percept::Observation obs;
  Eigen::VectorXd action;       // scaled body-frame offset the expert emitted
};

struct DemoTraj {
  std::string category;
  uint64_t object_seed = 0;
  uint64_t episode_seed = 0;
  int object_index = -1;
  int category_id = -1;
  std::vector<DemoStep> steps;  // last step's state passes check_success
};

struct DemoBuffer {
  sim::TaskClass task = sim::TaskClass::OpenDrawer;
  int n_q = 11;
  std::vector<DemoTraj> trajs;

  size_t total_steps() const;
};

// Rolls the expert (mean actions) until `buffer_size` successful
// trajectories are stored; failures are discarded without rendering.
// Trajectories are truncated at the first success step. Deterministic given
// the seed. Throws TrainingError when the retry budget is exhausted.
DemoBuffer collect_demos(const ExpertPolicy& expert,
                         const std::vector<const sim::ArticulatedObject*>& objects,
                         const std::vector<int>& category_ids,
                         const sim::TaskSpec& task, const sim::SimParams& params,
                         const percept::PerceptConfig& percept_cfg,
                         int buffer_size, uint64_t seed);

// Versioned binary container: JSON header (task, trajectory table, dims),
// then per-step records with the cloud in the binary cloud format.
void save_demos(const std::string& path, const DemoBuffer& buffer);
DemoBuffer load_demos(const std::string& path);

}  // namespace partbench::learn
