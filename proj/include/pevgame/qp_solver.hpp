#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pevgame {

/// Dense strictly convex QP:
///   min 0.5 x' G x + g0' x
///   s.t. CE x + ce0 = 0,  CI x + ci0 >= 0
/// Rows are stored as matrix rows. G must be symmetric positive definite
/// (callers regularize PSD objectives before building this form).
struct DenseQp {
  Eigen::MatrixXd G;
  Eigen::VectorXd g0;
  Eigen::MatrixXd CE;
  Eigen::VectorXd ce0;
  Eigen::MatrixXd CI;
  Eigen::VectorXd ci0;

  int num_vars() const { return static_cast<int>(G.rows()); }
  int num_eq() const { return static_cast<int>(CE.rows()); }
  int num_ineq() const { return static_cast<int>(CI.rows()); }
};

enum class QpStatus { Optimal, Infeasible, Failure };

/// One term of an infeasibility certificate: a weighted row in the stacked
/// [CE; CI] ordering. Inequality weights are nonnegative; the weighted
/// combination of rows has zero normal and a strictly negative constant,
/// proving the system inconsistent.
struct FarkasTerm {
  int row;
  double weight;
};

struct QpResult {
  QpStatus status = QpStatus::Failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd eq_mult;    // one per equality row
  Eigen::VectorXd ineq_mult;  // one per inequality row (zero when inactive)
  double primal_residual = 0.0;
  double stationarity_residual = 0.0;
  double complementarity = 0.0;
  std::vector<FarkasTerm> farkas;
  double farkas_value = 0.0;  // certified negative constant of the combination
  int iterations = 0;
  std::string message;
};

/// Goldfarb-Idnani dual active-set method with a final KKT re-solve on the
/// terminal active set. tol bounds the accepted primal violation and the
/// KKT residuals (rows should be roughly unit-scaled for it to be
/// meaningful).
QpResult solve_dense_qp(const DenseQp& qp, double tol);

}  // namespace pevgame
