#include "partbench/encoder/voxelize.hpp"

#include <algorithm>
#include <map>

namespace partbench::encoder {

using diff::Tape;

static SparseVoxelGrid voxelize_impl(Tape& tape, Tape::Id point_features,
                                     const std::vector<int>& cloud_offsets,
                                     const VoxelGridSpec& spec) {
  const Eigen::MatrixXd& pts = tape.val(point_features);
  const int total = int(pts.rows());
  const int batch = int(cloud_offsets.size()) - 1;
  if (batch <= 0) throw InputError("voxelize_batch: empty batch");
  for (int b = 0; b < batch; ++b)
    if (cloud_offsets[size_t(b) + 1] <= cloud_offsets[size_t(b)])
      throw InputError("voxelize_batch: empty cloud in batch");
  if (pts.cols() < 3) throw ShapeError("voxelize_batch: points need at least xyz columns");

  const Vec3 cell = spec.cell();
  SparseVoxelGrid grid;
  grid.batch_size = batch;
  grid.cloud_offsets = cloud_offsets;
  grid.point_to_voxel.resize(size_t(total));

  // voxel index per point
  std::vector<std::array<int, 4>> keys(static_cast<size_t>(total), {0, 0, 0, 0});
  for (int b = 0; b < batch; ++b) {
    for (int i = cloud_offsets[size_t(b)]; i < cloud_offsets[size_t(b) + 1]; ++i) {
      std::array<int, 4> key{b, 0, 0, 0};
      for (int a = 0; a < 3; ++a) {
        int c = int(std::floor((pts(i, a) - spec.lo[a]) / cell[a]));
        if (c < 0 || c >= spec.resolution) {
          c = std::clamp(c, 0, spec.resolution - 1);
          ++grid.clamped;
        }
        key[size_t(a) + 1] = c;
      }
      keys[size_t(i)] = key;
    }
  }

  // unique sorted keys -> rows (std::map keeps them lexicographically sorted)
  std::map<std::array<int, 4>, int> rows;
  for (const auto& k : keys) rows.emplace(k, 0);
  grid.coords.reserve(rows.size());
  int next = 0;
  for (auto& [k, idx] : rows) {
    idx = next++;
    grid.coords.push_back(k);
  }
  for (int i = 0; i < total; ++i) grid.point_to_voxel[size_t(i)] = rows.at(keys[size_t(i)]);
  grid.voxel_counts.assign(rows.size(), 0);
  for (int v : grid.point_to_voxel) grid.voxel_counts[size_t(v)]++;

  // per-point input features: offset-in-voxel for xyz, passthrough extras
  Eigen::MatrixXd neg_center(total, 3);
  for (int i = 0; i < total; ++i) {
    const auto& k = keys[size_t(i)];
    for (int a = 0; a < 3; ++a)
      neg_center(i, a) = -(spec.lo[a] + (double(k[size_t(a) + 1]) + 0.5) * cell[a]) / cell[a];
  }
  Eigen::RowVectorXd inv_cell(3);
  inv_cell << 1.0 / cell.x(), 1.0 / cell.y(), 1.0 / cell.z();

  Tape::Id xyz = tape.slice_cols(point_features, 0, 3);
  Tape::Id offsets = tape.add(tape.mul_rowvec(xyz, tape.constant(inv_cell)), tape.constant(neg_center));
  Tape::Id feat = offsets;
  if (pts.cols() > 3)
    feat = tape.concat_cols(offsets, tape.slice_cols(point_features, 3, int(pts.cols()) - 3));
  grid.features = tape.segment_mean(feat, grid.point_to_voxel, int(grid.coords.size()));
  return grid;
}

SparseVoxelGrid voxelize_batch(Tape& tape, const std::vector<const Eigen::MatrixXd*>& clouds,
                               const VoxelGridSpec& spec) {
  if (clouds.empty()) throw InputError("voxelize_batch: empty batch");
  Eigen::Index total = 0, cols = clouds.front()->cols();
  std::vector<int> offsets{0};
  for (const auto* c : clouds) {
    if (c->cols() != cols) throw ShapeError("voxelize_batch: inconsistent feature widths");
    total += c->rows();
    offsets.push_back(int(total));
  }
  Eigen::MatrixXd merged(total, cols);
  Eigen::Index row = 0;
  for (const auto* c : clouds) {
    merged.middleRows(row, c->rows()) = *c;
    row += c->rows();
  }
  return voxelize_impl(tape, tape.constant(std::move(merged)), offsets, spec);
}

SparseVoxelGrid voxelize_batch_node(Tape& tape, Tape::Id point_features,
                                    const std::vector<int>& cloud_offsets,
                                    const VoxelGridSpec& spec) {
  return voxelize_impl(tape, point_features, cloud_offsets, spec);
}

}  // namespace partbench::encoder
