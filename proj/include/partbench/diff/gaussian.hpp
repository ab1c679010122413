#pragma once

#include "partbench/diff/tape.hpp"

namespace partbench::diff {

// Diagonal Gaussian policy head. The mean comes from the actor network; the
// log-std is a state-independent parameter, zero-initialized so std = 1.
struct GaussianHead {
  Param* log_std = nullptr;  // 1 x action_dim
  int dim() const { return int(log_std->value.cols()); }
};

GaussianHead make_gaussian_head(ParamStore& store, const std::string& name, int action_dim);

struct GaussianSample {
  Mat actions;            // N x d, raw (pre-squash)
  Eigen::VectorXd log_prob;  // N
  double entropy = 0.0;      // per-sample entropy (identical across rows)
};

// Sample actions ~ N(mean, diag(std)). Deterministic given the rng state.
GaussianSample sample_gaussian(const Mat& mean, const Eigen::RowVectorXd& log_std, Rng& rng);

// Exact log-density of `actions` under N(mean, diag(exp(log_std))).
Eigen::VectorXd gaussian_log_prob(const Mat& mean, const Eigen::RowVectorXd& log_std, const Mat& actions);

// Recorded version: returns an N x 1 node of per-row log-probs.
Tape::Id gaussian_log_prob_node(Tape& t, Tape::Id mean, Tape::Id log_std, const Mat& actions);

// Recorded entropy (1x1 node): H = sum(log_std) + d/2 (1 + ln 2pi).
Tape::Id gaussian_entropy_node(Tape& t, Tape::Id log_std);
double gaussian_entropy(const Eigen::RowVectorXd& log_std);

// Closed-form KL(N(mu_old, std_old) || N(mu_new, std_new)), mean over rows.
double gaussian_kl(const Mat& mean_old, const Eigen::RowVectorXd& log_std_old,
                   const Mat& mean_new, const Eigen::RowVectorXd& log_std_new);

// Squash-and-scale from raw network outputs into bounded action coordinates:
// scaled = center + half .* tanh(raw), componentwise. Angular channels use
// center 0, half pi so every angle lands strictly inside (-pi, pi).
struct ActionScaler {
  Eigen::RowVectorXd center;
  Eigen::RowVectorXd half;

  Mat scale(const Mat& raw) const;
  Tape::Id scale_node(Tape& t, Tape::Id raw) const;
};

}  // namespace partbench::diff
