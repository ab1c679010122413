#pragma once

#include "partbench/diff/tape.hpp"

namespace partbench::diff {

enum class Activation { Elu, Tanh, Relu, Identity };

// Affine stack: hidden layers with the chosen activation, linear output.
// Weight layout is row-major in the data sense: x (N x in) * W (in x out).
struct Mlp {
  std::vector<Param*> weights;
  std::vector<Param*> biases;
  Activation act = Activation::Elu;

  int in_dim() const { return int(weights.front()->value.rows()); }
  int out_dim() const { return int(weights.back()->value.cols()); }
};

// Registers parameters under `prefix` in `store` with seeded Xavier-uniform
// weights and zero biases.
Mlp make_mlp(ParamStore& store, const std::string& prefix, int in_dim,
             const std::vector<int>& hidden, int out_dim, Activation act, Rng& rng);

// Rebuilds the handle from an existing store (after loading a checkpoint).
Mlp bind_mlp(ParamStore& store, const std::string& prefix, Activation act);

// Recorded forward pass (for training).
Tape::Id mlp_forward(Tape& tape, const Mlp& mlp, Tape::Id input);

// Plain forward pass (for rollouts / evaluation); no recording.
Mat mlp_eval(const Mlp& mlp, const Mat& input);

}  // namespace partbench::diff
