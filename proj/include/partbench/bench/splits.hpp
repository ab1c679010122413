#pragma once

#include "json.hpp"
#include "partbench/sim/procgen.hpp"

namespace partbench::bench {

struct InstanceRef {
  std::string category;
  uint64_t seed = 0;
};

struct SplitCounts {
  int train = 8;
  int val_intra = 4;
  int val_inter = 4;
};

// Evaluation splits: train and val-intra share categories but never
// instances; val-inter holds instances of categories disjoint from training.
struct Splits {
  sim::TaskClass task = sim::TaskClass::OpenDrawer;
  std::vector<std::string> train_categories;
  std::vector<std::string> val_inter_categories;
  std::vector<InstanceRef> train, val_intra, val_inter;
};

// The last category of the list is held out for val-inter (registry lists
// are ordered with the distribution-shifted category last); the rest are
// shared by train and val-intra with disjoint instance seeds.
Splits make_splits(const std::vector<std::string>& categories, sim::TaskClass task,
                   uint64_t seed, const SplitCounts& counts);

nlohmann::ordered_json splits_to_json(const Splits& splits);
Splits splits_from_json(const nlohmann::json& j);
void save_splits(const std::string& path, const Splits& splits);
Splits load_splits(const std::string& path);

// Generates every instance of a split list.
std::vector<sim::ArticulatedObject> generate_instances(const std::vector<InstanceRef>& refs,
                                                       sim::TaskClass task);

}  // namespace partbench::bench
