#include "partbench/learn/gae.hpp"

#include "partbench/common.hpp"

namespace partbench::learn {

void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, const Eigen::RowVectorXd& bootstrap,
         double gamma, double lambda,
         Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns) {
  const Eigen::Index t_max = rewards.rows(), n = rewards.cols();
  if (values.rows() != t_max || values.cols() != n || dones.rows() != t_max || dones.cols() != n ||
      bootstrap.cols() != n)
    throw ShapeError("gae: array shape mismatch");

  advantages.setZero(t_max, n);
  returns.setZero(t_max, n);
  Eigen::RowVectorXd next_adv = Eigen::RowVectorXd::Zero(n);
  Eigen::RowVectorXd next_val = bootstrap;
  for (Eigen::Index t = t_max - 1; t >= 0; --t) {
    const Eigen::ArrayXXd not_done = 1.0 - dones.row(t).array();
    const Eigen::ArrayXXd delta =
        rewards.row(t).array() + gamma * next_val.array() * not_done - values.row(t).array();
    advantages.row(t) = delta + gamma * lambda * not_done * next_adv.array();
    next_adv = advantages.row(t);
    next_val = values.row(t);
  }
  returns = advantages + values;
}

}  // namespace partbench::learn
