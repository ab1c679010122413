#include "partbench/diff/tape.hpp"

#include <cmath>

namespace partbench::diff {

Param& ParamStore::add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
  if (find(name)) throw ConfigError("duplicate param name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value.setZero(rows, cols);
  p->grad.setZero(rows, cols);
  p->m.setZero(rows, cols);
  p->v.setZero(rows, cols);
  params_.push_back(std::move(p));
  return *params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}
const Param* ParamStore::find(const std::string& name) const {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}
std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->zero_grad();
}

void ParamStore::copy_values_from(const ParamStore& other) {
  if (other.params_.size() != params_.size()) throw ShapeError("param store size mismatch");
  for (size_t i = 0; i < params_.size(); ++i) {
    if (params_[i]->name != other.params_[i]->name ||
        params_[i]->value.rows() != other.params_[i]->value.rows() ||
        params_[i]->value.cols() != other.params_[i]->value.cols())
      throw ShapeError("param mismatch at " + params_[i]->name);
    params_[i]->value = other.params_[i]->value;
    params_[i]->zero_grad();
    params_[i]->m.setZero();
    params_[i]->v.setZero();
  }
}

void adam_step(const std::vector<Param*>& params, AdamState& st, double lr) {
  st.t += 1;
  const double bc1 = 1.0 - std::pow(st.beta1, double(st.t));
  const double bc2 = 1.0 - std::pow(st.beta2, double(st.t));
  for (Param* p : params) {
    p->m = st.beta1 * p->m + (1.0 - st.beta1) * p->grad;
    p->v = st.beta2 * p->v + (1.0 - st.beta2) * p->grad.array().square().matrix();
    p->value.array() -= lr * (p->m.array() / bc1) / ((p->v.array() / bc2).sqrt() + st.eps);
  }
}

void adam_step(ParamStore& store, AdamState& st, double lr) {
  auto all = store.all();
  adam_step(all, st, lr);
}

Tape::Id Tape::push(Mat v, bool needs_grad) {
  Node n;
  n.value = std::move(v);
  n.needs_grad = needs_grad;
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

void Tape::ensure_grad(Id id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
}

Tape::Id Tape::constant(Mat v) { return push(std::move(v), false); }

Tape::Id Tape::leaf(Param& p) {
  Id id = push(p.value, true);
  leaves_.emplace_back(id, &p);
  return id;
}

void Tape::backward(Id loss) {
  if (back_.empty() && leaves_.empty())
    throw TrainingError("backward called on a tape with no recorded computation");
  if (nodes_[loss].value.rows() != 1 || nodes_[loss].value.cols() != 1)
    throw ShapeError("backward expects a 1x1 loss node");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  ensure_grad(loss);
  nodes_[loss].grad(0, 0) = 1.0;
  for (auto it = back_.rbegin(); it != back_.rend(); ++it) (*it)();
  for (auto& [id, p] : leaves_) {
    if (nodes_[id].grad.size() != 0) p->grad += nodes_[id].grad;
  }
  ran_backward_ = true;
}

// Helper macro: pushes the result node and registers the pullback only when
// some input needs a gradient.
#define PB_BINARY_PROLOGUE(a, b, value_expr)                        \
  const bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;     \
  Id out = push((value_expr), ng);                                  \
  if (ng)

#define PB_UNARY_PROLOGUE(a, value_expr)            \
  const bool ng = nodes_[a].needs_grad;             \
  Id out = push((value_expr), ng);                  \
  if (ng)

Tape::Id Tape::matmul(Id a, Id b) {
  if (cols(a) != rows(b)) throw ShapeError("matmul shape mismatch");
  PB_BINARY_PROLOGUE(a, b, nodes_[a].value * nodes_[b].value) {
    back_.push_back([this, a, b, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[a].needs_grad) {
        ensure_grad(a);
        g(a) += nodes_[out].grad * nodes_[b].value.transpose();
      }
      if (nodes_[b].needs_grad) {
        ensure_grad(b);
        g(b) += nodes_[a].value.transpose() * nodes_[out].grad;
      }
    });
  }
  return out;
}

Tape::Id Tape::add(Id a, Id b) {
  if (rows(a) != rows(b) || cols(a) != cols(b)) throw ShapeError("add shape mismatch");
  PB_BINARY_PROLOGUE(a, b, nodes_[a].value + nodes_[b].value) {
    back_.push_back([this, a, b, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[a].needs_grad) { ensure_grad(a); g(a) += nodes_[out].grad; }
      if (nodes_[b].needs_grad) { ensure_grad(b); g(b) += nodes_[out].grad; }
    });
  }
  return out;
}

Tape::Id Tape::sub(Id a, Id b) {
  if (rows(a) != rows(b) || cols(a) != cols(b)) throw ShapeError("sub shape mismatch");
  PB_BINARY_PROLOGUE(a, b, nodes_[a].value - nodes_[b].value) {
    back_.push_back([this, a, b, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[a].needs_grad) { ensure_grad(a); g(a) += nodes_[out].grad; }
      if (nodes_[b].needs_grad) { ensure_grad(b); g(b) -= nodes_[out].grad; }
    });
  }
  return out;
}

Tape::Id Tape::mul(Id a, Id b) {
  if (rows(a) != rows(b) || cols(a) != cols(b)) throw ShapeError("mul shape mismatch");
  PB_BINARY_PROLOGUE(a, b, nodes_[a].value.cwiseProduct(nodes_[b].value)) {
    back_.push_back([this, a, b, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[a].needs_grad) { ensure_grad(a); g(a) += nodes_[out].grad.cwiseProduct(nodes_[b].value); }
      if (nodes_[b].needs_grad) { ensure_grad(b); g(b) += nodes_[out].grad.cwiseProduct(nodes_[a].value); }
    });
  }
  return out;
}

Tape::Id Tape::add_rowvec(Id m, Id v) {
  if (cols(m) != cols(v) || rows(v) != 1) throw ShapeError("add_rowvec shape mismatch");
  PB_BINARY_PROLOGUE(m, v, nodes_[m].value.rowwise() + nodes_[v].value.row(0)) {
    back_.push_back([this, m, v, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[m].needs_grad) { ensure_grad(m); g(m) += nodes_[out].grad; }
      if (nodes_[v].needs_grad) { ensure_grad(v); g(v) += nodes_[out].grad.colwise().sum(); }
    });
  }
  return out;
}

Tape::Id Tape::mul_rowvec(Id m, Id v) {
  if (cols(m) != cols(v) || rows(v) != 1) throw ShapeError("mul_rowvec shape mismatch");
  PB_BINARY_PROLOGUE(m, v, nodes_[m].value.array().rowwise() * nodes_[v].value.row(0).array()) {
    back_.push_back([this, m, v, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[m].needs_grad) {
        ensure_grad(m);
        g(m).array() += nodes_[out].grad.array().rowwise() * nodes_[v].value.row(0).array();
      }
      if (nodes_[v].needs_grad) {
        ensure_grad(v);
        g(v) += (nodes_[out].grad.cwiseProduct(nodes_[m].value)).colwise().sum();
      }
    });
  }
  return out;
}

Tape::Id Tape::scale(Id a, double s) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value * s) {
    back_.push_back([this, a, s, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a) += nodes_[out].grad * s;
    });
  }
  return out;
}

Tape::Id Tape::add_scalar(Id a, double s) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array() + s) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a) += nodes_[out].grad;
    });
  }
  return out;
}

Tape::Id Tape::tanh(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array().tanh()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() * (1.0 - nodes_[out].value.array().square());
    });
  }
  return out;
}

Tape::Id Tape::elu(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.unaryExpr([](double x) { return x > 0 ? x : std::expm1(x); })) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() *
                      nodes_[a].value.unaryExpr([](double x) { return x > 0 ? 1.0 : std::exp(x); }).array();
    });
  }
  return out;
}

Tape::Id Tape::relu(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.cwiseMax(0.0)) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() * (nodes_[a].value.array() > 0.0).cast<double>();
    });
  }
  return out;
}

Tape::Id Tape::exp(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array().exp()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() * nodes_[out].value.array();
    });
  }
  return out;
}

Tape::Id Tape::log(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array().log()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() / nodes_[a].value.array();
    });
  }
  return out;
}

Tape::Id Tape::square(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array().square()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() * 2.0 * nodes_[a].value.array();
    });
  }
  return out;
}

Tape::Id Tape::sqrt(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.array().sqrt()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad.array() * 0.5 / nodes_[out].value.array();
    });
  }
  return out;
}

Tape::Id Tape::sum(Id a) {
  PB_UNARY_PROLOGUE(a, Mat::Constant(1, 1, nodes_[a].value.sum())) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad(0, 0);
    });
  }
  return out;
}

Tape::Id Tape::mean(Id a) {
  const double inv = 1.0 / double(nodes_[a].value.size());
  PB_UNARY_PROLOGUE(a, Mat::Constant(1, 1, nodes_[a].value.sum() * inv)) {
    back_.push_back([this, a, inv, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).array() += nodes_[out].grad(0, 0) * inv;
    });
  }
  return out;
}

Tape::Id Tape::rowwise_sum(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.rowwise().sum()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).colwise() += nodes_[out].grad.col(0);
    });
  }
  return out;
}

Tape::Id Tape::colwise_sum(Id a) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.colwise().sum()) {
    back_.push_back([this, a, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).rowwise() += nodes_[out].grad.row(0);
    });
  }
  return out;
}

Tape::Id Tape::minimum(Id a, Id b) {
  if (rows(a) != rows(b) || cols(a) != cols(b)) throw ShapeError("minimum shape mismatch");
  PB_BINARY_PROLOGUE(a, b, nodes_[a].value.cwiseMin(nodes_[b].value)) {
    back_.push_back([this, a, b, out]() {
      if (nodes_[out].grad.size() == 0) return;
      const auto take_a = (nodes_[a].value.array() <= nodes_[b].value.array()).cast<double>();
      if (nodes_[a].needs_grad) { ensure_grad(a); g(a).array() += nodes_[out].grad.array() * take_a; }
      if (nodes_[b].needs_grad) { ensure_grad(b); g(b).array() += nodes_[out].grad.array() * (1.0 - take_a); }
    });
  }
  return out;
}

Tape::Id Tape::clamp(Id a, double lo, double hi) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value.cwiseMax(lo).cwiseMin(hi)) {
    back_.push_back([this, a, lo, hi, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      const auto inside = ((nodes_[a].value.array() >= lo) && (nodes_[a].value.array() <= hi)).cast<double>();
      g(a).array() += nodes_[out].grad.array() * inside;
    });
  }
  return out;
}

Tape::Id Tape::concat_cols(Id a, Id b) {
  if (rows(a) != rows(b)) throw ShapeError("concat_cols row mismatch");
  Mat v(rows(a), cols(a) + cols(b));
  v << nodes_[a].value, nodes_[b].value;
  const Eigen::Index ca = cols(a), cb = cols(b);
  PB_BINARY_PROLOGUE(a, b, std::move(v)) {
    back_.push_back([this, a, b, ca, cb, out]() {
      if (nodes_[out].grad.size() == 0) return;
      if (nodes_[a].needs_grad) { ensure_grad(a); g(a) += nodes_[out].grad.leftCols(ca); }
      if (nodes_[b].needs_grad) { ensure_grad(b); g(b) += nodes_[out].grad.rightCols(cb); }
    });
  }
  return out;
}

Tape::Id Tape::slice_cols(Id a, int start, int len) {
  if (start < 0 || start + len > cols(a)) throw ShapeError("slice_cols out of range");
  PB_UNARY_PROLOGUE(a, nodes_[a].value.middleCols(start, len)) {
    back_.push_back([this, a, start, len, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a).middleCols(start, len) += nodes_[out].grad;
    });
  }
  return out;
}

Tape::Id Tape::gather_rows(Id a, std::vector<int> idx) {
  Mat v(Eigen::Index(idx.size()), cols(a));
  for (size_t i = 0; i < idx.size(); ++i) v.row(Eigen::Index(i)) = nodes_[a].value.row(idx[i]);
  PB_UNARY_PROLOGUE(a, std::move(v)) {
    back_.push_back([this, a, idx = std::move(idx), out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      for (size_t i = 0; i < idx.size(); ++i) g(a).row(idx[i]) += nodes_[out].grad.row(Eigen::Index(i));
    });
  }
  return out;
}

Tape::Id Tape::scatter_sum_rows(Id a, std::vector<int> idx, int out_rows) {
  if (Eigen::Index(idx.size()) != rows(a)) throw ShapeError("scatter_sum_rows index size mismatch");
  Mat v = Mat::Zero(out_rows, cols(a));
  for (size_t i = 0; i < idx.size(); ++i) v.row(idx[i]) += nodes_[a].value.row(Eigen::Index(i));
  PB_UNARY_PROLOGUE(a, std::move(v)) {
    back_.push_back([this, a, idx = std::move(idx), out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      for (size_t i = 0; i < idx.size(); ++i) g(a).row(Eigen::Index(i)) += nodes_[out].grad.row(idx[i]);
    });
  }
  return out;
}

Tape::Id Tape::segment_mean(Id a, std::vector<int> seg, int n_seg) {
  if (Eigen::Index(seg.size()) != rows(a)) throw ShapeError("segment_mean index size mismatch");
  std::vector<double> count(size_t(n_seg), 0.0);
  for (int s : seg) count[size_t(s)] += 1.0;
  Mat v = Mat::Zero(n_seg, cols(a));
  for (size_t i = 0; i < seg.size(); ++i) v.row(seg[i]) += nodes_[a].value.row(Eigen::Index(i));
  for (int s = 0; s < n_seg; ++s)
    if (count[size_t(s)] > 0) v.row(s) /= count[size_t(s)];
  PB_UNARY_PROLOGUE(a, std::move(v)) {
    back_.push_back([this, a, seg = std::move(seg), count = std::move(count), out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      for (size_t i = 0; i < seg.size(); ++i)
        g(a).row(Eigen::Index(i)) += nodes_[out].grad.row(seg[i]) / count[size_t(seg[i])];
    });
  }
  return out;
}

Tape::Id Tape::segment_max(Id a, std::vector<int> seg, int n_seg) {
  if (Eigen::Index(seg.size()) != rows(a)) throw ShapeError("segment_max index size mismatch");
  const Eigen::Index c = cols(a);
  Mat v = Mat::Constant(n_seg, c, -std::numeric_limits<double>::infinity());
  // argmax row per (segment, column); first maximal row wins on ties
  std::vector<int> arg(size_t(n_seg) * size_t(c), -1);
  for (size_t i = 0; i < seg.size(); ++i) {
    const int s = seg[i];
    for (Eigen::Index j = 0; j < c; ++j) {
      const double x = nodes_[a].value(Eigen::Index(i), j);
      if (x > v(s, j)) {
        v(s, j) = x;
        arg[size_t(s) * size_t(c) + size_t(j)] = int(i);
      }
    }
  }
  for (int s = 0; s < n_seg; ++s)
    for (Eigen::Index j = 0; j < c; ++j)
      if (arg[size_t(s) * size_t(c) + size_t(j)] < 0)
        throw InputError("segment_max: empty segment " + std::to_string(s));
  PB_UNARY_PROLOGUE(a, std::move(v)) {
    back_.push_back([this, a, arg = std::move(arg), n_seg, c, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      for (int s = 0; s < n_seg; ++s)
        for (Eigen::Index j = 0; j < c; ++j)
          g(a)(arg[size_t(s) * size_t(c) + size_t(j)], j) += nodes_[out].grad(s, j);
    });
  }
  return out;
}

Tape::Id Tape::grl(Id a, double lambda) {
  PB_UNARY_PROLOGUE(a, nodes_[a].value) {
    back_.push_back([this, a, lambda, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(a);
      g(a) -= lambda * nodes_[out].grad;
    });
  }
  return out;
}

Tape::Id Tape::softmax_xent_mean(Id logits, std::vector<int> labels) {
  if (Eigen::Index(labels.size()) != rows(logits)) throw ShapeError("softmax_xent label count mismatch");
  const Eigen::Index r = rows(logits), c = cols(logits);
  Mat probs(r, c);
  double total = 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const double mx = nodes_[logits].value.row(i).maxCoeff();
    Eigen::ArrayXd e = (nodes_[logits].value.row(i).array() - mx).exp();
    const double z = e.sum();
    probs.row(i) = (e / z).matrix();
    total += -(nodes_[logits].value(i, labels[size_t(i)]) - mx - std::log(z));
  }
  const double inv = 1.0 / double(r);
  PB_UNARY_PROLOGUE(logits, Mat::Constant(1, 1, total * inv)) {
    back_.push_back([this, logits, labels = std::move(labels), probs = std::move(probs), inv, out]() {
      if (nodes_[out].grad.size() == 0) return;
      ensure_grad(logits);
      const double s = nodes_[out].grad(0, 0) * inv;
      Mat d = probs;
      for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, labels[size_t(i)]) -= 1.0;
      g(logits) += s * d;
    });
  }
  return out;
}

#undef PB_BINARY_PROLOGUE
#undef PB_UNARY_PROLOGUE

}  // namespace partbench::diff
