#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "partbench/common.hpp"

namespace partbench::diff {

using Mat = Eigen::MatrixXd;

// A named trainable tensor: 64-bit float values, a gradient buffer of the
// same shape, and Adam moment buffers.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat m, v;  // Adam moments

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Owns parameters; iteration order is insertion order, which makes gradient
// accumulation and optimizer sweeps deterministic.
class ParamStore {
 public:
  Param& add(const std::string& name, Eigen::Index rows, Eigen::Index cols);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;

  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  size_t size() const { return params_.size(); }
  void zero_grads();

  // Deep copy (values only; grads/moments reset).
  void copy_values_from(const ParamStore& other);

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

// Adam step over every param in the store, in insertion order.
struct AdamState {
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  int64_t t = 0;
};
void adam_step(ParamStore& store, AdamState& state, double lr);
void adam_step(const std::vector<Param*>& params, AdamState& state, double lr);

// Reverse-mode tape over dense matrices. A tape is built per update step and
// discarded afterward; no persistent graphs. All values are 64-bit floats.
class Tape {
 public:
  using Id = int32_t;

  Id constant(Mat v);
  Id leaf(Param& p);  // gradient accumulates into p.grad on backward()

  const Mat& val(Id id) const { return nodes_[id].value; }
  const Mat& grad(Id id) const { return nodes_[id].grad; }
  Eigen::Index rows(Id id) const { return nodes_[id].value.rows(); }
  Eigen::Index cols(Id id) const { return nodes_[id].value.cols(); }
  size_t num_nodes() const { return nodes_.size(); }

  // Runs reverse-mode accumulation from a 1x1 loss node. Calling backward on
  // a tape with no recorded forward computation is a usage error.
  void backward(Id loss);

  // --- recorded operations ---
  Id matmul(Id a, Id b);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise
  Id add_rowvec(Id m, Id v);
  Id mul_rowvec(Id m, Id v);
  Id scale(Id a, double s);
  Id add_scalar(Id a, double s);
  Id tanh(Id a);
  Id elu(Id a);
  Id relu(Id a);
  Id exp(Id a);
  Id log(Id a);
  Id square(Id a);
  Id sqrt(Id a);
  Id sum(Id a);              // 1x1
  Id mean(Id a);             // 1x1
  Id rowwise_sum(Id a);      // r x 1
  Id colwise_sum(Id a);      // 1 x c
  Id minimum(Id a, Id b);    // elementwise; ties route gradient to a
  Id clamp(Id a, double lo, double hi);
  Id concat_cols(Id a, Id b);
  Id slice_cols(Id a, int start, int len);
  Id gather_rows(Id a, std::vector<int> idx);
  // out[idx[i], :] += a[i, :]; out has out_rows rows.
  Id scatter_sum_rows(Id a, std::vector<int> idx, int out_rows);
  // per-segment mean / max over rows; seg[i] in [0, n_seg)
  Id segment_mean(Id a, std::vector<int> seg, int n_seg);
  Id segment_max(Id a, std::vector<int> seg, int n_seg);
  // gradient reversal: identity forward, grad_in = -lambda * grad_out
  Id grl(Id a, double lambda);
  // mean over rows of softmax cross-entropy against integer labels (1x1)
  Id softmax_xent_mean(Id logits, std::vector<int> labels);

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
  };
  Id push(Mat v, bool needs_grad);
  void ensure_grad(Id id);
  Mat& g(Id id) { return nodes_[id].grad; }

  std::vector<Node> nodes_;
  std::vector<std::function<void()>> back_;
  std::vector<std::pair<Id, Param*>> leaves_;
  bool ran_backward_ = false;
};

}  // namespace partbench::diff
