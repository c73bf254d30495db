#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace mummi {

struct NnlsResult {
  Eigen::VectorXd x;
  /// Dual vector A^T (b - A x). At the optimum it is <= 0 where x is zero
  /// and ~0 where x is positive.
  Eigen::VectorXd dual;
  std::size_t iterations = 0;
  bool converged = false;
};

struct NnlsOptions {
  /// Dual feasibility tolerance, relative to max |A^T b|.
  double tolerance = 1e-10;
  /// Zero means 3 * number of columns.
  std::size_t max_iterations = 0;
};

/// Minimizes ||A x - b||^2 subject to x >= 0 by the Lawson-Hanson active-set
/// method. Columns of A should be comparably scaled.
NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                const NnlsOptions& options = {});

/// Largest KKT violation of x for the problem above, relative to
/// max(1, max |A^T b|): negative x, positive dual where x = 0, or nonzero
/// dual where x > 0.
double nnls_kkt_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x);

}  // namespace mummi
