#include "partbench/diff/mlp.hpp"

#include <cmath>

namespace partbench::diff {

static void xavier_fill(Mat& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform(-limit, limit);
}

Mlp make_mlp(ParamStore& store, const std::string& prefix, int in_dim,
             const std::vector<int>& hidden, int out_dim, Activation act, Rng& rng) {
  Mlp mlp;
  mlp.act = act;
  int prev = in_dim;
  std::vector<int> dims = hidden;
  dims.push_back(out_dim);
  for (size_t l = 0; l < dims.size(); ++l) {
    Param& w = store.add(prefix + ".w" + std::to_string(l), prev, dims[l]);
    Param& b = store.add(prefix + ".b" + std::to_string(l), 1, dims[l]);
    xavier_fill(w.value, rng);
    mlp.weights.push_back(&w);
    mlp.biases.push_back(&b);
    prev = dims[l];
  }
  return mlp;
}

Mlp bind_mlp(ParamStore& store, const std::string& prefix, Activation act) {
  Mlp mlp;
  mlp.act = act;
  for (size_t l = 0;; ++l) {
    Param* w = store.find(prefix + ".w" + std::to_string(l));
    Param* b = store.find(prefix + ".b" + std::to_string(l));
    if (!w || !b) break;
    mlp.weights.push_back(w);
    mlp.biases.push_back(b);
  }
  if (mlp.weights.empty()) throw ConfigError("no MLP params under prefix " + prefix);
  return mlp;
}

static Tape::Id apply_act(Tape& t, Activation act, Tape::Id x) {
  switch (act) {
    case Activation::Elu: return t.elu(x);
    case Activation::Tanh: return t.tanh(x);
    case Activation::Relu: return t.relu(x);
    case Activation::Identity: return x;
  }
  return x;
}

Tape::Id mlp_forward(Tape& tape, const Mlp& mlp, Tape::Id input) {
  if (tape.cols(input) != mlp.weights.front()->value.rows())
    throw ShapeError("mlp_forward: input dim " + std::to_string(tape.cols(input)) +
                     " != " + std::to_string(mlp.weights.front()->value.rows()));
  Tape::Id h = input;
  for (size_t l = 0; l < mlp.weights.size(); ++l) {
    h = tape.add_rowvec(tape.matmul(h, tape.leaf(*mlp.weights[l])), tape.leaf(*mlp.biases[l]));
    if (l + 1 < mlp.weights.size()) h = apply_act(tape, mlp.act, h);
  }
  return h;
}

Mat mlp_eval(const Mlp& mlp, const Mat& input) {
  if (input.cols() != mlp.weights.front()->value.rows())
    throw ShapeError("mlp_eval: input dim mismatch");
  Mat h = input;
  for (size_t l = 0; l < mlp.weights.size(); ++l) {
    h = (h * mlp.weights[l]->value).rowwise() + mlp.biases[l]->value.row(0);
    if (l + 1 < mlp.weights.size()) {
      switch (mlp.act) {
        case Activation::Elu: h = h.unaryExpr([](double x) { return x > 0 ? x : std::expm1(x); }); break;
        case Activation::Tanh: h = h.array().tanh().matrix(); break;
        case Activation::Relu: h = h.cwiseMax(0.0); break;
        case Activation::Identity: break;
      }
    }
  }
  return h;
}

}  // namespace partbench::diff
