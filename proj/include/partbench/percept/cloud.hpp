#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "partbench/percept/render.hpp"

namespace partbench::percept {

// Colored point cloud: rows are (x, y, z, r, g, b); tags parallel the rows.
struct Cloud {
  Eigen::MatrixXd points;     // N x 6
  std::vector<int8_t> tags;   // N

  Eigen::Index size() const { return points.rows(); }
};

// Back-projects every valid pixel of each image into world space and
// concatenates the clouds (camera order, row-major pixel order). Zero valid
// pixels across all images is an input error.
Cloud backproject_merge(const std::vector<DepthColorImage>& images,
                        const std::vector<CameraSpec>& cameras);

enum class SampleMethod { Random, Fps };

// Exactly n output points. Random: seeded partial shuffle (a permutation
// when |cloud| == n). FPS: greedy farthest-point selection from a seeded
// start. Clouds smaller than n are padded by resampling with replacement.
std::vector<int> sample_indices(const Eigen::MatrixXd& xyz, int n, SampleMethod method, uint64_t seed);
Cloud sample_to_n(const Cloud& cloud, int n, SampleMethod method, uint64_t seed);

// Binary dump: uint32 little-endian count, then count records of
// (x, y, z, r, g, b) as float32. A JSON sidecar at <path>.json carries the
// camera specs.
void save_cloud(const std::string& path, const Eigen::MatrixXd& points,
                const std::vector<CameraSpec>& cameras);
Eigen::MatrixXd load_cloud(const std::string& path);

}  // namespace partbench::percept
