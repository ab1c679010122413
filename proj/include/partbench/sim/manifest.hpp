#pragma once

#include "json.hpp"
#include "partbench/sim/object.hpp"

namespace partbench::sim {

// Asset manifest: a lossless JSON description of links, joints, parts and
// colors. Doubles are serialized with shortest-round-trip formatting, so
// save/load reproduces the object bit-for-bit.
nlohmann::ordered_json object_to_json(const ArticulatedObject& obj);
ArticulatedObject object_from_json(const nlohmann::json& j);

void save_object(const std::string& path, const ArticulatedObject& obj);
ArticulatedObject load_object(const std::string& path);

}  // namespace partbench::sim
