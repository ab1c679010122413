#pragma once

#include "partbench/encoder/voxelize.hpp"

namespace partbench::encoder {

// Kernel taps for a sparse 3D convolution: one Cin x Cout matrix per
// neighborhood offset plus a bias row.
struct SparseConvParams {
  std::vector<diff::Param*> taps;
  diff::Param* bias = nullptr;

  int in_channels() const { return int(taps.front()->value.rows()); }
  int out_channels() const { return int(taps.front()->value.cols()); }
};

SparseConvParams make_sparse_conv(diff::ParamStore& store, const std::string& prefix,
                                  int in_channels, int out_channels, int n_taps, Rng& rng);

// Gather/scatter pair lists per kernel offset for a fixed coordinate set.
// Built once per grid and reused by every submanifold convolution on it.
struct ConvTopology {
  // per offset: (source rows, destination rows); the center offset is
  // implicit (identity mapping over all rows)
  std::vector<std::pair<std::vector<int>, std::vector<int>>> neighbors;  // 26 entries
  int num_sites = 0;
};

ConvTopology build_submanifold_topology(const std::vector<std::array<int, 4>>& coords);

// Submanifold sparse convolution: the output lives on exactly the input's
// active sites; the value at a site sums tap * feature over active
// neighbors. Kernel is 3x3x3 (27 taps: center first, then the 26 offsets in
// topology order).
diff::Tape::Id sparse_conv(diff::Tape& tape, diff::Tape::Id features,
                           const ConvTopology& topo, const SparseConvParams& conv);

// Strided (factor 2) downsampling convolution: output sites are the unique
// halved coordinates; 8 taps, one per child offset.
struct DownsampleMap {
  std::vector<std::array<int, 4>> coords;   // coarse coordinates, sorted
  std::vector<int> parent_of_input;          // fine row -> coarse row
  // per child offset: (fine rows, coarse rows)
  std::vector<std::pair<std::vector<int>, std::vector<int>>> taps;  // 8 entries
};

DownsampleMap build_downsample_map(const std::vector<std::array<int, 4>>& coords);

diff::Tape::Id downsample_conv(diff::Tape& tape, diff::Tape::Id features,
                               const DownsampleMap& map, const SparseConvParams& conv);

// Transposed counterpart: copies each coarse feature to the fine sites that
// mapped to it.
diff::Tape::Id unpool(diff::Tape& tape, diff::Tape::Id coarse_features, const DownsampleMap& map);

}  // namespace partbench::encoder
