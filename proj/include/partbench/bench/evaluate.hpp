#pragma once

#include "partbench/bench/agents.hpp"
#include "partbench/bench/splits.hpp"

namespace partbench::bench {

struct ObjectCount {
  std::string category;
  uint64_t seed = 0;
  int successes = 0;
  int episodes = 0;
};

struct EvalResult {
  int successes = 0;
  int episodes = 0;
  std::vector<ObjectCount> per_object;

  double rate() const { return episodes > 0 ? double(successes) / double(episodes) : 0.0; }
};

// Deterministic evaluation: fixed episode seeds per (object, episode) slot,
// success when check_success holds at any step within the horizon (episodes
// stop early at success). Worker count only affects wall-clock, not results.
// Observation failures count the episode as failed.
EvalResult evaluate(const AgentFactory& make_agent,
                    const std::vector<const sim::ArticulatedObject*>& objects,
                    const sim::TaskSpec& task, const sim::SimParams& params,
                    int episodes_per_object, uint64_t seed, int workers = 1);

}  // namespace partbench::bench
