#include "partbench/encoder/sparse_conv.hpp"

#include <cmath>
#include <map>
#include <unordered_map>

namespace partbench::encoder {

using diff::Tape;

static uint64_t pack_key(const std::array<int, 4>& c) {
  // batch | i | j | k, 16 bits each; coordinates are grid indices >= 0
  return (uint64_t(uint16_t(c[0])) << 48) | (uint64_t(uint16_t(c[1])) << 32) |
         (uint64_t(uint16_t(c[2])) << 16) | uint64_t(uint16_t(c[3]));
}

SparseConvParams make_sparse_conv(diff::ParamStore& store, const std::string& prefix,
                                  int in_channels, int out_channels, int n_taps, Rng& rng) {
  SparseConvParams conv;
  const double limit = std::sqrt(6.0 / double(in_channels * n_taps + out_channels));
  for (int t = 0; t < n_taps; ++t) {
    diff::Param& w = store.add(prefix + ".k" + std::to_string(t), in_channels, out_channels);
    for (Eigen::Index i = 0; i < w.value.rows(); ++i)
      for (Eigen::Index j = 0; j < w.value.cols(); ++j) w.value(i, j) = rng.uniform(-limit, limit);
    conv.taps.push_back(&w);
  }
  conv.bias = &store.add(prefix + ".b", 1, out_channels);
  return conv;
}

ConvTopology build_submanifold_topology(const std::vector<std::array<int, 4>>& coords) {
  ConvTopology topo;
  topo.num_sites = int(coords.size());
  std::unordered_map<uint64_t, int> lookup;
  lookup.reserve(coords.size() * 2);
  for (size_t i = 0; i < coords.size(); ++i) lookup.emplace(pack_key(coords[i]), int(i));

  topo.neighbors.reserve(26);
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        std::pair<std::vector<int>, std::vector<int>> pairs;
        for (size_t i = 0; i < coords.size(); ++i) {
          const std::array<int, 4> n{coords[i][0], coords[i][1] + dx, coords[i][2] + dy,
                                     coords[i][3] + dz};
          auto it = lookup.find(pack_key(n));
          if (it != lookup.end()) {
            pairs.first.push_back(it->second);  // source: the neighbor
            pairs.second.push_back(int(i));     // destination: this site
          }
        }
        topo.neighbors.push_back(std::move(pairs));
      }
  return topo;
}

Tape::Id sparse_conv(Tape& tape, Tape::Id features, const ConvTopology& topo,
                     const SparseConvParams& conv) {
  if (int(conv.taps.size()) != 27) throw ShapeError("sparse_conv expects 27 kernel taps");
  if (tape.cols(features) != conv.in_channels()) throw ShapeError("sparse_conv channel mismatch");
  const int m = topo.num_sites;

  // center tap applies everywhere
  Tape::Id out = tape.matmul(features, tape.leaf(*conv.taps[0]));
  out = tape.add_rowvec(out, tape.leaf(*conv.bias));
  for (size_t o = 0; o < topo.neighbors.size(); ++o) {
    const auto& [src, dst] = topo.neighbors[o];
    if (src.empty()) continue;
    Tape::Id gathered = tape.gather_rows(features, src);
    Tape::Id mixed = tape.matmul(gathered, tape.leaf(*conv.taps[o + 1]));
    out = tape.add(out, tape.scatter_sum_rows(mixed, dst, m));
  }
  return out;
}

DownsampleMap build_downsample_map(const std::vector<std::array<int, 4>>& coords) {
  DownsampleMap map;
  std::map<std::array<int, 4>, int> coarse;
  std::vector<std::array<int, 4>> halved(coords.size());
  for (size_t i = 0; i < coords.size(); ++i) {
    halved[i] = {coords[i][0], coords[i][1] / 2, coords[i][2] / 2, coords[i][3] / 2};
    coarse.emplace(halved[i], 0);
  }
  int next = 0;
  for (auto& [k, idx] : coarse) {
    idx = next++;
    map.coords.push_back(k);
  }
  map.parent_of_input.resize(coords.size());
  map.taps.assign(8, {});
  for (size_t i = 0; i < coords.size(); ++i) {
    const int row = coarse.at(halved[i]);
    map.parent_of_input[i] = row;
    const int child = (coords[i][1] & 1) | ((coords[i][2] & 1) << 1) | ((coords[i][3] & 1) << 2);
    map.taps[size_t(child)].first.push_back(int(i));
    map.taps[size_t(child)].second.push_back(row);
  }
  return map;
}

Tape::Id downsample_conv(Tape& tape, Tape::Id features, const DownsampleMap& map,
                         const SparseConvParams& conv) {
  if (int(conv.taps.size()) != 8) throw ShapeError("downsample_conv expects 8 kernel taps");
  const int m = int(map.coords.size());
  Tape::Id out = -1;
  for (size_t t = 0; t < 8; ++t) {
    const auto& [src, dst] = map.taps[t];
    if (src.empty()) continue;
    Tape::Id mixed = tape.matmul(tape.gather_rows(features, src), tape.leaf(*conv.taps[t]));
    Tape::Id scattered = tape.scatter_sum_rows(mixed, dst, m);
    out = (out < 0) ? scattered : tape.add(out, scattered);
  }
  return tape.add_rowvec(out, tape.leaf(*conv.bias));
}

Tape::Id unpool(Tape& tape, Tape::Id coarse_features, const DownsampleMap& map) {
  return tape.gather_rows(coarse_features, map.parent_of_input);
}

}  // namespace partbench::encoder
