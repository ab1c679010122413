#pragma once

#include "partbench/diff/tape.hpp"
#include "partbench/geometry.hpp"

namespace partbench::encoder {

struct VoxelGridSpec {
  Vec3 lo = Vec3(-1.5, -1.5, -0.1);
  Vec3 hi = Vec3(1.5, 1.5, 1.9);
  int resolution = 100;

  Vec3 cell() const { return (hi - lo) / double(resolution); }
};

// Sparse voxel grid over a batch of clouds. Active voxel coordinates
// (b, i, j, k) are unique and sorted lexicographically; `features` is an
// M x C tape node whose row order matches `coords`. Every input point maps to
// exactly one voxel through `point_to_voxel` (indices into the concatenated
// point rows). Points outside the bounds are clamped to boundary voxels and
// counted in `clamped`.
struct SparseVoxelGrid {
  std::vector<std::array<int, 4>> coords;
  diff::Tape::Id features = -1;
  std::vector<int> point_to_voxel;
  std::vector<int> cloud_offsets;  // size B+1, ranges into the point rows
  std::vector<int> voxel_counts;
  int batch_size = 0;
  int clamped = 0;

  int num_voxels() const { return int(coords.size()); }
};

// Voxelizes a batch. Each cloud is an N_i x C matrix whose first three
// columns are xyz; the per-voxel feature is the mean over member points of
// [ (p - voxel_center) / cell , remaining C-3 columns ]. The batched result
// is identical (bit-exact) to concatenating per-cloud voxelizations.
SparseVoxelGrid voxelize_batch(diff::Tape& tape,
                               const std::vector<const Eigen::MatrixXd*>& clouds,
                               const VoxelGridSpec& spec);

// Same, but the point features come from an existing tape node holding the
// concatenated rows (for gradient flow into upstream features); `xyz` must
// equal the first three columns of that node's value.
SparseVoxelGrid voxelize_batch_node(diff::Tape& tape, diff::Tape::Id point_features,
                                    const std::vector<int>& cloud_offsets,
                                    const VoxelGridSpec& spec);

}  // namespace partbench::encoder
