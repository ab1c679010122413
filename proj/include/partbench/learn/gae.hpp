#pragma once

#include <Eigen/Dense>

namespace partbench::learn {

// Generalized advantage estimation over column-per-environment arrays.
// delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t with V_{T} taken from
// `bootstrap`; A_t = delta_t + gamma * lambda * (1 - done_t) * A_{t+1};
// returns = A + V. Episode boundaries cut the recursion through `dones`.
void gae(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
         const Eigen::MatrixXd& dones, const Eigen::RowVectorXd& bootstrap,
         double gamma, double lambda,
         Eigen::MatrixXd& advantages, Eigen::MatrixXd& returns);

}  // namespace partbench::learn
