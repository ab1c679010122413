#pragma once

#include "partbench/diff/mlp.hpp"
#include "partbench/encoder/sparse_conv.hpp"

namespace partbench::encoder {

// Sparse UNet layout. channels has depth+1 entries: channels[0] at the full
// resolution, channels[l] after the l-th stride-2 stage. The default is the
// desk-scale configuration; the full-scale variant (depth 6, channels
// [16, 32, 48, 64, 80, 96, 112], K = 16) is reachable through config.
struct UNetSpec {
  int depth = 2;
  std::vector<int> channels = {8, 16, 32};
  int out_dim = 16;   // per-point feature width K
  int in_dim = 9;     // xyz offset + rgb + indicator-relative offset
  diff::Activation act = diff::Activation::Elu;

  void validate() const;
};

struct UNetParams {
  UNetSpec spec;
  SparseConvParams in_conv;                  // in_dim -> channels[0]
  std::vector<SparseConvParams> down;        // stride-2, channels[l] -> channels[l+1]
  std::vector<SparseConvParams> enc;         // submanifold at each coarse level
  std::vector<SparseConvParams> dec;         // after unpool+skip concat
  diff::Param* out_w = nullptr;              // channels[0] -> out_dim
  diff::Param* out_b = nullptr;
};

UNetParams make_unet(diff::ParamStore& store, const std::string& prefix, const UNetSpec& spec, Rng& rng);
UNetParams bind_unet(diff::ParamStore& store, const std::string& prefix, const UNetSpec& spec);

// Encoder/decoder pass over the grid; returns per-point features (N x K)
// scattered back through the grid's point map.
diff::Tape::Id unet_forward(diff::Tape& tape, const SparseVoxelGrid& grid, const UNetParams& params);

}  // namespace partbench::encoder
