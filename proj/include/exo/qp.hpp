#pragma once

#include <Eigen/Core>

namespace exo {

/// Separable convex QP
///
///   minimize    sum_i h_i x_i^2
///   subject to  A x = b,  lower <= x <= upper
///
/// with h_i > 0. Bounds may be infinite.
struct BoxQp {
  Eigen::VectorXd h;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index variables() const { return h.size(); }
  Eigen::Index constraints() const { return b.size(); }
};

struct QpOptions {
  int max_iterations = 200;
  double tolerance = 1e-11;
};

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;  // multipliers of A x = b
  double objective = 0;
  int iterations = 0;
  double balance_residual = 0;  // max |A x - b|
  double kkt_residual = 0;      // relative stationarity and multiplier-sign violation
};

/// Dual semismooth Newton method. The primal minimizer for fixed multipliers
/// is x(lambda) = clamp(A^T lambda / 2h, lower, upper); each Newton step
/// solves the equality problem of the current active pattern and is followed
/// by an exact line search on the concave dual. Internals run in extended
/// precision. If the dual iteration cannot settle, which happens when some
/// variables are almost unpenalized and others heavily, a primal active-set
/// method takes over from a feasible start built with the unbounded variables.
///
/// Throws DomainError for malformed problems and NumericError when neither
/// method meets the constraints.
QpSolution solve_box_qp(const BoxQp& problem, const QpOptions& options = {});

/// Stationarity and sign residual of a candidate point, for checking. Each
/// term is relative to the magnitude of the products that cancel in it.
double kkt_residual(const BoxQp& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& lambda);

}  // namespace exo
