#include "partbench/encoder/unet.hpp"

namespace partbench::encoder {

using diff::Activation;
using diff::Tape;

void UNetSpec::validate() const {
  if (int(channels.size()) != depth + 1)
    throw ConfigError("UNet channel list must have depth+1 entries");
  if (out_dim <= 0 || in_dim <= 0 || depth < 1) throw ConfigError("bad UNet spec");
}

static diff::Param& linear_param(diff::ParamStore& store, const std::string& name, int in, int out, Rng& rng) {
  diff::Param& w = store.add(name, in, out);
  const double limit = std::sqrt(6.0 / double(in + out));
  for (Eigen::Index i = 0; i < w.value.rows(); ++i)
    for (Eigen::Index j = 0; j < w.value.cols(); ++j) w.value(i, j) = rng.uniform(-limit, limit);
  return w;
}

UNetParams make_unet(diff::ParamStore& store, const std::string& prefix, const UNetSpec& spec, Rng& rng) {
  spec.validate();
  UNetParams p;
  p.spec = spec;
  p.in_conv = make_sparse_conv(store, prefix + ".in", spec.in_dim, spec.channels[0], 27, rng);
  for (int l = 0; l < spec.depth; ++l) {
    p.down.push_back(make_sparse_conv(store, prefix + ".down" + std::to_string(l),
                                      spec.channels[size_t(l)], spec.channels[size_t(l) + 1], 8, rng));
    p.enc.push_back(make_sparse_conv(store, prefix + ".enc" + std::to_string(l),
                                     spec.channels[size_t(l) + 1], spec.channels[size_t(l) + 1], 27, rng));
  }
  for (int l = 0; l < spec.depth; ++l) {
    const int in_ch = spec.channels[size_t(l) + 1] + spec.channels[size_t(l)];
    p.dec.push_back(make_sparse_conv(store, prefix + ".dec" + std::to_string(l),
                                     in_ch, spec.channels[size_t(l)], 27, rng));
  }
  p.out_w = &linear_param(store, prefix + ".out.w", spec.channels[0], spec.out_dim, rng);
  p.out_b = &store.add(prefix + ".out.b", 1, spec.out_dim);
  return p;
}

static SparseConvParams bind_conv(diff::ParamStore& store, const std::string& prefix, int n_taps) {
  SparseConvParams conv;
  for (int t = 0; t < n_taps; ++t) {
    diff::Param* w = store.find(prefix + ".k" + std::to_string(t));
    if (!w) throw ConfigError("missing conv param " + prefix);
    conv.taps.push_back(w);
  }
  conv.bias = store.find(prefix + ".b");
  if (!conv.bias) throw ConfigError("missing conv bias " + prefix);
  return conv;
}

UNetParams bind_unet(diff::ParamStore& store, const std::string& prefix, const UNetSpec& spec) {
  spec.validate();
  UNetParams p;
  p.spec = spec;
  p.in_conv = bind_conv(store, prefix + ".in", 27);
  for (int l = 0; l < spec.depth; ++l) {
    p.down.push_back(bind_conv(store, prefix + ".down" + std::to_string(l), 8));
    p.enc.push_back(bind_conv(store, prefix + ".enc" + std::to_string(l), 27));
    p.dec.push_back(bind_conv(store, prefix + ".dec" + std::to_string(l), 27));
  }
  p.out_w = store.find(prefix + ".out.w");
  p.out_b = store.find(prefix + ".out.b");
  if (!p.out_w || !p.out_b) throw ConfigError("missing UNet output projection");
  return p;
}

static Tape::Id act(Tape& t, Activation a, Tape::Id x) {
  switch (a) {
    case Activation::Elu: return t.elu(x);
    case Activation::Tanh: return t.tanh(x);
    case Activation::Relu: return t.relu(x);
    case Activation::Identity: return x;
  }
  return x;
}

diff::Tape::Id unet_forward(Tape& tape, const SparseVoxelGrid& grid, const UNetParams& params) {
  const UNetSpec& spec = params.spec;

  std::vector<std::vector<std::array<int, 4>>> coords{grid.coords};
  std::vector<ConvTopology> topo;
  std::vector<DownsampleMap> maps;
  topo.push_back(build_submanifold_topology(coords[0]));
  for (int l = 0; l < spec.depth; ++l) {
    maps.push_back(build_downsample_map(coords[size_t(l)]));
    coords.push_back(maps.back().coords);
    topo.push_back(build_submanifold_topology(coords.back()));
  }

  std::vector<Tape::Id> skip;
  Tape::Id h = act(tape, spec.act, sparse_conv(tape, grid.features, topo[0], params.in_conv));
  skip.push_back(h);
  for (int l = 0; l < spec.depth; ++l) {
    h = act(tape, spec.act, downsample_conv(tape, h, maps[size_t(l)], params.down[size_t(l)]));
    h = act(tape, spec.act, sparse_conv(tape, h, topo[size_t(l) + 1], params.enc[size_t(l)]));
    if (l + 1 < spec.depth) skip.push_back(h);
  }
  for (int l = spec.depth - 1; l >= 0; --l) {
    Tape::Id up = unpool(tape, h, maps[size_t(l)]);
    Tape::Id cat = tape.concat_cols(up, skip[size_t(l)]);
    h = act(tape, spec.act, sparse_conv(tape, cat, topo[size_t(l)], params.dec[size_t(l)]));
  }
  Tape::Id voxel_out = tape.add_rowvec(tape.matmul(h, tape.leaf(*params.out_w)), tape.leaf(*params.out_b));
  return tape.gather_rows(voxel_out, grid.point_to_voxel);
}

}  // namespace partbench::encoder
