#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace lbtcoex {

// Stationary distribution of a row-stochastic matrix: least-squares solve of
// (M^T - I) pi = 0 with a normalization row appended. Throws if the result is
// not a probability vector satisfying pi M = pi to 1e-12.
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& M) {
  const auto n = M.rows();
  if (n == 0 || M.cols() != n) throw std::invalid_argument("stationary_distribution: matrix not square");
  if (((M.rowwise().sum().array() - 1.0).abs() > 1e-12).any())
    throw std::invalid_argument("stationary_distribution: rows do not sum to 1");
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = M.transpose() - Eigen::MatrixXd::Identity(n, n);
  A.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(rhs);
  double resid = (M.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (resid > 1e-12 || pi.minCoeff() < -1e-10)
    throw std::runtime_error("stationary_distribution: solve failed (residual " + std::to_string(resid) + ")");
  return pi.cwiseMax(0.0);
}

}  // namespace lbtcoex
