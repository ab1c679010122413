#pragma once

#include <string>

#include "json.hpp"
#include "partbench/diff/tape.hpp"

namespace partbench::diff {

// Versioned checkpoint container: an 8-byte magic, a JSON metadata block
// (net topology, seeds, training step, and the tensor table with shapes and
// offsets), then the raw little-endian float64 payload.
//
//   "PBCKPT01" | u64 meta_len | meta json | payload
//
// Loading restores values into a store built from the same topology; shape
// or name mismatches are errors.
void save_checkpoint(const std::string& path, const ParamStore& store, const nlohmann::json& metadata);

// Returns the metadata block; fills param values in `store`.
nlohmann::json load_checkpoint(const std::string& path, ParamStore& store);

// Reads only the metadata (to decide how to build the store first).
nlohmann::json read_checkpoint_metadata(const std::string& path);

}  // namespace partbench::diff
