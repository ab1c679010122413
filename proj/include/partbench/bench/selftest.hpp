#pragma once

#include <string>
#include <vector>

namespace partbench::bench {

// Invariant checks shared by the CLI `selftest` subcommand and the
// acceptance suite. Each returns an empty string on pass, else a failure
// description. Counts scale the work; the acceptance suite runs the full
// sizes, selftest a quick subset.
std::string check_canonicalization_invariance(int n_scenes, uint64_t seed);
std::string check_reward_units();
std::string check_gae_oracle(int n_trajectories, uint64_t seed);
std::string check_gradients(int trials, uint64_t seed);
std::string check_grl_exactness(uint64_t seed);
std::string check_voxelization_equivalence(int n_batches, uint64_t seed);
// batched wall-clock <= looped wall-clock at the given batch size
std::string check_voxelization_speed(int batch, int reps, uint64_t seed, double* batched_s = nullptr,
                                     double* looped_s = nullptr);
std::string check_sparse_dense_oracle(int n_grids, uint64_t seed);
std::string check_success_boundaries();
std::string check_split_disjointness(uint64_t seed);
// oracle scripted policy on procedurally generated instances; instances_per_task
// counts the generated objects per split bucket of each task class
std::string check_solvability(int instances_per_task, uint64_t seed);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Quick invariant battery for `partbench selftest`.
std::vector<CheckResult> run_selftest(uint64_t seed);

}  // namespace partbench::bench
