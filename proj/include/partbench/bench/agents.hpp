#pragma once

#include <functional>
#include <map>
#include <memory>

#include "partbench/learn/distill.hpp"
#include "partbench/learn/ppo.hpp"

namespace partbench::bench {

// One agent instance drives one episode at a time; evaluation workers each
// construct their own through the factory.
struct Agent {
  virtual ~Agent() = default;
  virtual void begin_episode(sim::Env&) {}
  virtual sim::Action act(sim::Env& env) = 0;
};

using AgentFactory = std::function<std::unique_ptr<Agent>()>;

// Emits the squashed zero raw action every step (hold pose, half-open
// fingers).
struct ZeroAgent : Agent {
  diff::ActionScaler scaler;
  explicit ZeroAgent(double finger_max_width);
  sim::Action act(sim::Env& env) override;
};

struct ExpertAgent : Agent {
  const learn::ExpertPolicy* policy;
  explicit ExpertAgent(const learn::ExpertPolicy* p) : policy(p) {}
  sim::Action act(sim::Env& env) override;
};

struct StudentAgent : Agent {
  const learn::StudentPolicy* policy;
  std::vector<percept::CameraSpec> rig;
  percept::PerceptConfig percept_cfg;
  std::map<std::string, int> category_ids;

  StudentAgent(const learn::StudentPolicy* p, const percept::PerceptConfig& cfg,
               std::map<std::string, int> ids);
  sim::Action act(sim::Env& env) override;
};

// Scripted oracle built on oracle state: approach the grasp point along the
// part normal, close onto the handle, then drive the joint along its motion
// direction (buttons are pressed with closed tips). Used as the procedural
// solvability check.
struct OracleAgent : Agent {
  sim::Action act(sim::Env& env) override;
};

}  // namespace partbench::bench
