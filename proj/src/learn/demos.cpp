#include "partbench/learn/demos.hpp"

#include <fstream>

#include "json.hpp"

namespace partbench::learn {

size_t DemoBuffer::total_steps() const {
  size_t n = 0;
  for (const auto& t : trajs) n += t.steps.size();
  return n;
}

DemoBuffer collect_demos(const ExpertPolicy& expert,
                         const std::vector<const sim::ArticulatedObject*>& objects,
                         const std::vector<int>& category_ids,
                         const sim::TaskSpec& task, const sim::SimParams& params,
                         const percept::PerceptConfig& percept_cfg,
                         int buffer_size, uint64_t seed) {
  if (objects.empty()) throw ConfigError("collect_demos: no objects");
  if (category_ids.size() != objects.size())
    throw ConfigError("collect_demos: category id per object required");

  const auto rig = percept::make_rig(percept_cfg);
  DemoBuffer buffer;
  buffer.task = task.task_class;
  buffer.n_q = params.n_q;

  const int max_attempts = std::max(50 * buffer_size, 50);
  int successes = 0;
  for (int attempt = 0; attempt < max_attempts && int(buffer.trajs.size()) < buffer_size; ++attempt) {
    const size_t oi = size_t(attempt) % objects.size();
    const uint64_t ep_seed = mix_seed(seed, uint64_t(attempt), 0xde30);
    sim::Env env(objects[oi], task, params);

    // cheap pass: simulate without rendering, keep the action tape
    env.reset(ep_seed);
    std::vector<Eigen::VectorXd> actions;
    bool success = env.success();
    while (!env.done() && !success) {
      const Eigen::VectorXd scaled = expert.act_scaled(policy_state(env.state(), expert.canonicalized));
      actions.push_back(scaled);
      env.step(compose_action(env.state().x, env.state().r, scaled));
      success = env.success();
    }
    if (!success) continue;
    ++successes;

    // replay with rendering; record (s, o, a) up to and including the
    // success state
    DemoTraj traj;
    traj.category = objects[oi]->category;
    traj.object_seed = objects[oi]->seed;
    traj.episode_seed = ep_seed;
    traj.object_index = int(oi);
    traj.category_id = category_ids[oi];
    env.reset(ep_seed);
    for (size_t t = 0;; ++t) {
      DemoStep step;
      step.state_flat = flatten_state(env.state());
      step.obs = percept::make_observation(env, rig, percept_cfg);
      step.obs.category_id = traj.category_id;
      step.action = expert.act_scaled(policy_state(env.state(), expert.canonicalized));
      traj.steps.push_back(std::move(step));
      if (env.success() || t >= actions.size()) break;
      env.step(compose_action(env.state().x, env.state().r, actions[t]));
    }
    buffer.trajs.push_back(std::move(traj));
  }

  if (successes == 0)
    throw TrainingError("demo collection: expert never succeeded within the retry budget");
  if (int(buffer.trajs.size()) < buffer_size)
    throw TrainingError("demo collection: retry budget exhausted at " +
                        std::to_string(buffer.trajs.size()) + "/" + std::to_string(buffer_size));
  return buffer;
}

static void write_vec(std::ofstream& f, const Eigen::VectorXd& v) {
  f.write(reinterpret_cast<const char*>(v.data()), std::streamsize(sizeof(double) * size_t(v.size())));
}
static Eigen::VectorXd read_vec(std::ifstream& f, Eigen::Index n) {
  Eigen::VectorXd v(n);
  f.read(reinterpret_cast<char*>(v.data()), std::streamsize(sizeof(double) * size_t(n)));
  return v;
}

void save_demos(const std::string& path, const DemoBuffer& buffer) {
  nlohmann::ordered_json meta;
  meta["format"] = "partbench-demos";
  meta["version"] = 1;
  meta["task"] = sim::task_class_name(buffer.task);
  meta["n_q"] = buffer.n_q;
  meta["trajs"] = nlohmann::ordered_json::array();
  for (const auto& t : buffer.trajs) {
    meta["trajs"].push_back({{"category", t.category},
                             {"object_seed", t.object_seed},
                             {"episode_seed", t.episode_seed},
                             {"object_index", t.object_index},
                             {"category_id", t.category_id},
                             {"steps", t.steps.size()}});
  }
  const std::string meta_str = meta.dump();

  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path);
  f.write("PBDEMO01", 8);
  const uint64_t len = meta_str.size();
  f.write(reinterpret_cast<const char*>(&len), sizeof(len));
  f.write(meta_str.data(), std::streamsize(len));

  for (const auto& traj : buffer.trajs) {
    for (const auto& s : traj.steps) {
      const uint32_t sd = uint32_t(s.state_flat.size());
      f.write(reinterpret_cast<const char*>(&sd), sizeof(sd));
      write_vec(f, s.state_flat);
      write_vec(f, s.obs.robot.qp);
      write_vec(f, s.obs.robot.qv);
      write_vec(f, Eigen::VectorXd(s.obs.robot.x));
      write_vec(f, Eigen::Map<const Eigen::VectorXd>(s.obs.robot.r.data(), 9));
      write_vec(f, Eigen::VectorXd(s.obs.indicator));
      write_vec(f, s.action);
      const int32_t t32 = s.obs.t;
      f.write(reinterpret_cast<const char*>(&t32), sizeof(t32));
      const uint32_t count = uint32_t(s.obs.cloud.rows());
      f.write(reinterpret_cast<const char*>(&count), sizeof(count));
      for (Eigen::Index i = 0; i < s.obs.cloud.rows(); ++i) {
        float rec[6];
        for (int j = 0; j < 6; ++j) rec[j] = float(s.obs.cloud(i, j));
        f.write(reinterpret_cast<const char*>(rec), sizeof(rec));
      }
      f.write(reinterpret_cast<const char*>(s.obs.part_mask.data()),
              std::streamsize(s.obs.part_mask.size()));
    }
  }
  if (!f) throw IoError("write failed: " + path);
}

DemoBuffer load_demos(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::string(magic, 8) != "PBDEMO01") throw IoError("bad demo file magic: " + path);
  uint64_t len = 0;
  f.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string meta_str(len, '\0');
  f.read(meta_str.data(), std::streamsize(len));
  const nlohmann::json meta = nlohmann::json::parse(meta_str);
  if (meta.at("version") != 1) throw IoError("unsupported demo file version");

  DemoBuffer buffer;
  buffer.task = sim::task_class_from_name(meta.at("task"));
  buffer.n_q = meta.at("n_q");
  for (const auto& tj : meta.at("trajs")) {
    DemoTraj traj;
    traj.category = tj.at("category");
    traj.object_seed = tj.at("object_seed");
    traj.episode_seed = tj.at("episode_seed");
    traj.object_index = tj.at("object_index");
    traj.category_id = tj.at("category_id");
    const size_t n_steps = tj.at("steps");
    for (size_t k = 0; k < n_steps; ++k) {
      DemoStep s;
      uint32_t sd = 0;
      f.read(reinterpret_cast<char*>(&sd), sizeof(sd));
      s.state_flat = read_vec(f, sd);
      s.obs.robot.qp = read_vec(f, buffer.n_q);
      s.obs.robot.qv = read_vec(f, buffer.n_q);
      s.obs.robot.x = read_vec(f, 3);
      const Eigen::VectorXd r9 = read_vec(f, 9);
      s.obs.robot.r = Eigen::Map<const Mat3>(r9.data());
      s.obs.indicator = read_vec(f, 3);
      s.action = read_vec(f, sim::Action::kDim);
      int32_t t32 = 0;
      f.read(reinterpret_cast<char*>(&t32), sizeof(t32));
      s.obs.t = t32;
      s.obs.episode_id = traj.episode_seed;
      s.obs.category_id = traj.category_id;
      uint32_t count = 0;
      f.read(reinterpret_cast<char*>(&count), sizeof(count));
      s.obs.cloud.resize(count, 6);
      for (uint32_t i = 0; i < count; ++i) {
        float rec[6];
        f.read(reinterpret_cast<char*>(rec), sizeof(rec));
        for (int j = 0; j < 6; ++j) s.obs.cloud(Eigen::Index(i), j) = rec[j];
      }
      s.obs.part_mask.resize(count);
      f.read(reinterpret_cast<char*>(s.obs.part_mask.data()), std::streamsize(count));
      traj.steps.push_back(std::move(s));
    }
    buffer.trajs.push_back(std::move(traj));
  }
  if (!f) throw IoError("truncated demo file: " + path);
  return buffer;
}

}  // namespace partbench::learn
