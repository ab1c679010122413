#include "partbench/bench/splits.hpp"

#include <fstream>

namespace partbench::bench {

Splits make_splits(const std::vector<std::string>& categories, sim::TaskClass task,
                   uint64_t seed, const SplitCounts& counts) {
  if (categories.size() < 3)
    throw ConfigError("make_splits needs at least 3 categories, got " +
                      std::to_string(categories.size()));
  for (const auto& c : categories)
    if (!sim::category_supports(c, task))
      throw ConfigError("category " + c + " does not support " + sim::task_class_name(task));

  Splits splits;
  splits.task = task;
  splits.train_categories.assign(categories.begin(), categories.end() - 1);
  splits.val_inter_categories = {categories.back()};

  for (int i = 0; i < counts.train; ++i)
    splits.train.push_back({splits.train_categories[size_t(i) % splits.train_categories.size()],
                            mix_seed(seed, 1, uint64_t(i))});
  for (int i = 0; i < counts.val_intra; ++i)
    splits.val_intra.push_back({splits.train_categories[size_t(i) % splits.train_categories.size()],
                                mix_seed(seed, 2, uint64_t(i))});
  for (int i = 0; i < counts.val_inter; ++i)
    splits.val_inter.push_back({splits.val_inter_categories[size_t(i) % splits.val_inter_categories.size()],
                                mix_seed(seed, 3, uint64_t(i))});
  return splits;
}

nlohmann::ordered_json splits_to_json(const Splits& splits) {
  nlohmann::ordered_json j;
  j["format"] = "partbench-splits";
  j["version"] = 1;
  j["task_class"] = sim::task_class_name(splits.task);
  j["categories"] = {{"train", splits.train_categories}, {"val_inter", splits.val_inter_categories}};
  auto refs = [](const std::vector<InstanceRef>& v) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : v) out.push_back({{"category", r.category}, {"seed", r.seed}});
    return out;
  };
  j["instances"] = {{"train", refs(splits.train)},
                    {"val_intra", refs(splits.val_intra)},
                    {"val_inter", refs(splits.val_inter)}};
  return j;
}

Splits splits_from_json(const nlohmann::json& j) {
  if (j.at("format") != "partbench-splits") throw IoError("not a split manifest");
  Splits splits;
  splits.task = sim::task_class_from_name(j.at("task_class"));
  splits.train_categories = j.at("categories").at("train").get<std::vector<std::string>>();
  splits.val_inter_categories = j.at("categories").at("val_inter").get<std::vector<std::string>>();
  auto refs = [](const nlohmann::json& arr) {
    std::vector<InstanceRef> out;
    for (const auto& r : arr) out.push_back({r.at("category"), r.at("seed")});
    return out;
  };
  splits.train = refs(j.at("instances").at("train"));
  splits.val_intra = refs(j.at("instances").at("val_intra"));
  splits.val_inter = refs(j.at("instances").at("val_inter"));
  return splits;
}

void save_splits(const std::string& path, const Splits& splits) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << splits_to_json(splits).dump(2) << "\n";
}

Splits load_splits(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  return splits_from_json(nlohmann::json::parse(f));
}

std::vector<sim::ArticulatedObject> generate_instances(const std::vector<InstanceRef>& refs,
                                                       sim::TaskClass task) {
  std::vector<sim::ArticulatedObject> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(sim::generate_object(r.seed, r.category, task));
  return out;
}

}  // namespace partbench::bench
