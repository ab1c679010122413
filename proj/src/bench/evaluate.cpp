#include "partbench/bench/evaluate.hpp"

namespace partbench::bench {

EvalResult evaluate(const AgentFactory& make_agent,
                    const std::vector<const sim::ArticulatedObject*>& objects,
                    const sim::TaskSpec& task, const sim::SimParams& params,
                    int episodes_per_object, uint64_t seed, int workers) {
  EvalResult result;
  result.per_object.resize(objects.size());
  const int64_t total = int64_t(objects.size()) * episodes_per_object;
  std::vector<char> outcome(size_t(total), 0);

  const int n_workers = std::max(1, std::min<int>(workers, int(total)));
  std::vector<std::unique_ptr<Agent>> agents;
  for (int w = 0; w < n_workers; ++w) agents.push_back(make_agent());

  parallel_for(n_workers, n_workers, [&](int64_t w) {
    Agent& agent = *agents[size_t(w)];
    for (int64_t slot = w; slot < total; slot += n_workers) {
      const size_t oi = size_t(slot) / size_t(episodes_per_object);
      const int ep = int(slot % episodes_per_object);
      sim::Env env(objects[oi], task, params);
      env.reset(mix_seed(seed, oi, uint64_t(ep), 0xe9a1));
      agent.begin_episode(env);
      bool success = env.success();
      try {
        while (!env.done() && !success) {
          env.step(agent.act(env));
          success = env.success_ever();
        }
      } catch (const InputError&) {
        success = false;  // observation failure fails the episode
      }
      outcome[size_t(slot)] = success ? 1 : 0;
    }
  });

  for (size_t oi = 0; oi < objects.size(); ++oi) {
    ObjectCount& oc = result.per_object[oi];
    oc.category = objects[oi]->category;
    oc.seed = objects[oi]->seed;
    for (int ep = 0; ep < episodes_per_object; ++ep) {
      const bool s = outcome[oi * size_t(episodes_per_object) + size_t(ep)] != 0;
      oc.episodes++;
      oc.successes += s ? 1 : 0;
      result.episodes++;
      result.successes += s ? 1 : 0;
    }
  }
  return result;
}

}  // namespace partbench::bench
