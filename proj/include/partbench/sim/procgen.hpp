#pragma once

#include "partbench/sim/object.hpp"

namespace partbench::sim {

// A procedural category: one archetype with seeded dimension, placement and
// color randomization. Categories within a task family differ in gross
// geometry and placement distribution, which is what the cross-category
// evaluation splits lean on.
struct CategoryInfo {
  std::string name;
  std::vector<TaskClass> tasks;
};

const std::vector<CategoryInfo>& category_registry();
std::vector<std::string> categories_for_task(TaskClass t);
bool category_supports(const std::string& category, TaskClass t);

// Deterministic in (seed, category, task_class): the same inputs yield
// bit-identical objects. Unknown or incompatible categories are errors.
ArticulatedObject generate_object(uint64_t seed, const std::string& category, TaskClass task);

}  // namespace partbench::sim
