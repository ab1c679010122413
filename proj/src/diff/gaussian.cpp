#include "partbench/diff/gaussian.hpp"

#include <cmath>

namespace partbench::diff {

static constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

GaussianHead make_gaussian_head(ParamStore& store, const std::string& name, int action_dim) {
  GaussianHead head;
  head.log_std = &store.add(name + ".log_std", 1, action_dim);
  return head;  // zero log-std == unit std
}

GaussianSample sample_gaussian(const Mat& mean, const Eigen::RowVectorXd& log_std, Rng& rng) {
  GaussianSample out;
  const Eigen::Index n = mean.rows(), d = mean.cols();
  const Eigen::RowVectorXd std = log_std.array().exp();
  out.actions.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out.actions(i, j) = mean(i, j) + std(j) * rng.normal();
  out.log_prob = gaussian_log_prob(mean, log_std, out.actions);
  out.entropy = gaussian_entropy(log_std);
  return out;
}

Eigen::VectorXd gaussian_log_prob(const Mat& mean, const Eigen::RowVectorXd& log_std, const Mat& actions) {
  if (mean.rows() != actions.rows() || mean.cols() != actions.cols())
    throw ShapeError("gaussian_log_prob shape mismatch");
  const Eigen::Index d = mean.cols();
  const Eigen::ArrayXXd z = (actions - mean).array().rowwise() / log_std.array().exp();
  return (-0.5 * z.square().rowwise().sum() - log_std.sum() - 0.5 * double(d) * kLog2Pi).matrix();
}

Tape::Id gaussian_log_prob_node(Tape& t, Tape::Id mean, Tape::Id log_std, const Mat& actions) {
  const Eigen::Index d = actions.cols();
  Tape::Id a = t.constant(actions);
  Tape::Id inv_std = t.exp(t.scale(log_std, -1.0));          // 1 x d
  Tape::Id z = t.mul_rowvec(t.sub(a, mean), inv_std);        // N x d
  Tape::Id quad = t.scale(t.rowwise_sum(t.square(z)), -0.5); // N x 1
  const double log_std_sum_grad_free = 0.0;
  (void)log_std_sum_grad_free;
  // subtract sum(log_std) + d/2 ln(2pi); the sum must stay on the tape
  Tape::Id s = t.sum(log_std);  // 1 x 1
  // broadcast the (negative) scalar over rows via add_rowvec on a 1-col matrix
  Tape::Id neg_s = t.scale(s, -1.0);
  Tape::Id lp = t.add_rowvec(quad, neg_s);
  return t.add_scalar(lp, -0.5 * double(d) * kLog2Pi);
}

Tape::Id gaussian_entropy_node(Tape& t, Tape::Id log_std) {
  const double d = double(t.cols(log_std));
  return t.add_scalar(t.sum(log_std), 0.5 * d * (1.0 + kLog2Pi));
}

double gaussian_entropy(const Eigen::RowVectorXd& log_std) {
  return log_std.sum() + 0.5 * double(log_std.size()) * (1.0 + kLog2Pi);
}

double gaussian_kl(const Mat& mean_old, const Eigen::RowVectorXd& log_std_old,
                   const Mat& mean_new, const Eigen::RowVectorXd& log_std_new) {
  const Eigen::ArrayXd var_old = (2.0 * log_std_old.transpose().array()).exp();
  const Eigen::ArrayXd var_new = (2.0 * log_std_new.transpose().array()).exp();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < mean_old.rows(); ++i) {
    const Eigen::ArrayXd dm = (mean_new.row(i) - mean_old.row(i)).transpose().array();
    acc += ((log_std_new - log_std_old).sum() +
            ((var_old + dm.square()) / (2.0 * var_new)).sum() - 0.5 * double(mean_old.cols()));
  }
  return acc / double(mean_old.rows());
}

Mat ActionScaler::scale(const Mat& raw) const {
  if (raw.cols() != center.cols()) throw ShapeError("ActionScaler dim mismatch");
  return ((raw.array().tanh().rowwise() * half.array()).rowwise() + center.array()).matrix();
}

Tape::Id ActionScaler::scale_node(Tape& t, Tape::Id raw) const {
  Tape::Id squashed = t.tanh(raw);
  Tape::Id h = t.constant(half);
  Tape::Id c = t.constant(center);
  return t.add_rowvec(t.mul_rowvec(squashed, h), c);
}

}  // namespace partbench::diff
