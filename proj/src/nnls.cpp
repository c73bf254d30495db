#include "mummi/nnls.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mummi/error.hpp"

namespace mummi {

namespace {

// Unconstrained least squares on the passive columns.
Eigen::VectorXd solve_passive(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<Eigen::Index>& passive) {
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(passive.size()));
  for (std::size_t k = 0; k < passive.size(); ++k)
    sub.col(static_cast<Eigen::Index>(k)) = a.col(passive[k]);
  return sub.colPivHouseholderQr().solve(b);
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                const NnlsOptions& options) {
  if (a.rows() != b.size())
    throw Error(ErrorKind::dimension, "nnls: A has " + std::to_string(a.rows()) +
                                          " rows but b has " + std::to_string(b.size()));
  const Eigen::Index n = a.cols();
  NnlsResult r;
  r.x = Eigen::VectorXd::Zero(n);
  if (n == 0) {
    r.dual = Eigen::VectorXd::Zero(0);
    r.converged = true;
    return r;
  }

  const double scale = std::max(1.0, (a.transpose() * b).cwiseAbs().maxCoeff());
  const double tol = options.tolerance * scale;
  const std::size_t max_iter =
      options.max_iterations ? options.max_iterations : 3 * static_cast<std::size_t>(n) + 10;

  std::vector<bool> in_passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd w = a.transpose() * (b - a * r.x);

  while (r.iterations < max_iter) {
    // Most promising inactive coordinate.
    Eigen::Index t = -1;
    double best = tol;
    for (Eigen::Index j = 0; j < n; ++j)
      if (!in_passive[static_cast<std::size_t>(j)] && w(j) > best) {
        best = w(j);
        t = j;
      }
    if (t < 0) {
      r.converged = true;
      break;
    }
    in_passive[static_cast<std::size_t>(t)] = true;

    // Inner loop: step toward the passive-set solution until it is feasible.
    while (r.iterations < max_iter) {
      ++r.iterations;
      std::vector<Eigen::Index> passive;
      for (Eigen::Index j = 0; j < n; ++j)
        if (in_passive[static_cast<std::size_t>(j)]) passive.push_back(j);
      const Eigen::VectorXd s_p = solve_passive(a, b, passive);

      bool feasible = true;
      for (Eigen::Index k = 0; k < s_p.size(); ++k)
        if (!(s_p(k) > 0.0)) feasible = false;
      if (feasible) {
        r.x.setZero();
        for (std::size_t k = 0; k < passive.size(); ++k)
          r.x(passive[k]) = s_p(static_cast<Eigen::Index>(k));
        break;
      }

      double alpha = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const double sk = s_p(static_cast<Eigen::Index>(k));
        if (sk <= 0.0) {
          const double xk = r.x(passive[k]);
          const double denom = xk - sk;
          if (denom > 0.0) alpha = std::min(alpha, xk / denom);
        }
      }
      if (!std::isfinite(alpha)) alpha = 0.0;
      for (std::size_t k = 0; k < passive.size(); ++k) {
        const Eigen::Index j = passive[k];
        r.x(j) += alpha * (s_p(static_cast<Eigen::Index>(k)) - r.x(j));
      }
      const double zero_tol = 1e-14 * std::max(1.0, r.x.cwiseAbs().maxCoeff());
      for (const Eigen::Index j : passive)
        if (r.x(j) <= zero_tol) {
          r.x(j) = 0.0;
          in_passive[static_cast<std::size_t>(j)] = false;
        }
    }
    w = a.transpose() * (b - a * r.x);
  }

  r.dual = a.transpose() * (b - a * r.x);
  return r;
}

double nnls_kkt_violation(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x) {
  const double scale = std::max(1.0, (a.transpose() * b).cwiseAbs().maxCoeff());
  const Eigen::VectorXd w = a.transpose() * (b - a * x);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    if (x(j) < 0.0) worst = std::max(worst, -x(j));
    if (x(j) == 0.0)
      worst = std::max(worst, w(j) / scale);
    else
      worst = std::max(worst, std::abs(w(j)) / scale);
  }
  return worst;
}

}  // namespace mummi
