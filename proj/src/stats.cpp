#include "mummi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mummi/error.hpp"

namespace mummi::stats {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j; their average is (i + 1 + j) / 2.
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::dimension, "correlation inputs differ in length");
  const std::size_t n = x.size();
  if (n == 0) return std::nullopt;
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error(ErrorKind::dimension, "spearman inputs differ in length (" +
                                          std::to_string(x.size()) + " vs " +
                                          std::to_string(y.size()) + ")");
  if (x.size() < 3)
    throw Error(ErrorKind::dimension, "spearman needs at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

std::size_t CorrelationMatrix::index_of(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    throw Error(ErrorKind::name, "unknown column in correlation matrix: " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

double CorrelationMatrix::at(std::string_view a, std::string_view b) const {
  return rho(static_cast<Eigen::Index>(index_of(a)), static_cast<Eigen::Index>(index_of(b)));
}

CorrelationMatrix spearman_matrix(const Dataset& d, const std::vector<std::string>& columns) {
  if (d.size() < 3)
    throw Error(ErrorKind::input, "spearman_matrix needs at least 3 samples");
  std::vector<std::vector<double>> ranks;
  std::vector<bool> constant;
  ranks.reserve(columns.size());
  for (const auto& c : columns) {
    std::vector<double> col;
    try {
      col = d.column(c);
    } catch (const Error&) {
      throw Error(ErrorKind::name, "unknown column: " + c);
    }
    constant.push_back(std::all_of(col.begin(), col.end(),
                                   [&](double v) { return v == col.front(); }));
    ranks.push_back(average_ranks(col));
  }

  const auto p = static_cast<Eigen::Index>(columns.size());
  CorrelationMatrix m;
  m.names = columns;
  m.rho = Eigen::MatrixXd::Identity(p, p);
  m.undefined = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, p, false);
  for (Eigen::Index i = 0; i < p; ++i) {
    if (constant[static_cast<std::size_t>(i)]) m.undefined(i, i) = true;
    for (Eigen::Index j = i + 1; j < p; ++j) {
      const auto r = pearson(ranks[static_cast<std::size_t>(i)], ranks[static_cast<std::size_t>(j)]);
      m.rho(i, j) = m.rho(j, i) = r.value_or(0.0);
      m.undefined(i, j) = m.undefined(j, i) = !r.has_value();
    }
  }
  return m;
}

Eigen::MatrixXd PcaResult::standardize(const Eigen::MatrixXd& data) const {
  if (data.cols() != means.size())
    throw Error(ErrorKind::dimension, "PCA input has the wrong number of columns");
  Eigen::MatrixXd z = data.rowwise() - means.transpose();
  return z.array().rowwise() / scales.transpose().array();
}

Eigen::MatrixXd PcaResult::scores(const Eigen::MatrixXd& data) const {
  return standardize(data) * components;
}

PcaResult pca(const Eigen::MatrixXd& data, const std::vector<std::string>& names,
              double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0))
    throw Error(ErrorKind::validation, "variance_target must lie in (0, 1]");
  if (static_cast<std::size_t>(data.cols()) != names.size())
    throw Error(ErrorKind::dimension, "PCA column names do not match data");
  if (data.rows() < 2) throw Error(ErrorKind::input, "PCA needs at least 2 samples");
  if (data.cols() < 1) throw Error(ErrorKind::input, "PCA needs at least 1 column");

  const double n = static_cast<double>(data.rows());
  PcaResult r;
  std::vector<Eigen::Index> kept;
  std::vector<double> kept_means, kept_scales;
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    const double mu = data.col(j).mean();
    const double var = (data.col(j).array() - mu).square().sum() / (n - 1.0);
    const double sd = std::sqrt(var);
    if (!(sd > 1e-12 * (1.0 + std::abs(mu)))) {
      r.dropped.push_back(names[static_cast<std::size_t>(j)]);
      continue;
    }
    kept.push_back(j);
    kept_means.push_back(mu);
    kept_scales.push_back(sd);
    r.names.push_back(names[static_cast<std::size_t>(j)]);
  }
  if (kept.empty())
    throw Error(ErrorKind::degenerate, "every PCA column has zero variance");

  const auto p = static_cast<Eigen::Index>(kept.size());
  r.means = Eigen::Map<Eigen::VectorXd>(kept_means.data(), p);
  r.scales = Eigen::Map<Eigen::VectorXd>(kept_scales.data(), p);
  Eigen::MatrixXd z(data.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j)
    z.col(j) = (data.col(kept[static_cast<std::size_t>(j)]).array() - r.means(j)) / r.scales(j);

  const Eigen::MatrixXd corr = (z.transpose() * z) / (n - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(corr);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::numeric, "eigendecomposition did not converge");

  // Eigen returns ascending eigenvalues; reverse to descending.
  r.eigenvalues = solver.eigenvalues().reverse().cwiseMax(0.0);
  r.components = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index k = 0; k < p; ++k) {
    Eigen::Index arg = 0;
    r.components.col(k).cwiseAbs().maxCoeff(&arg);
    if (r.components(arg, k) < 0.0) r.components.col(k) *= -1.0;
  }

  const double total = r.eigenvalues.sum();
  double cumulative = 0.0;
  r.n_retained = static_cast<std::size_t>(p);
  bool reached = false;
  for (Eigen::Index k = 0; k < p; ++k) {
    const double ratio = total > 0.0 ? r.eigenvalues(k) / total : 0.0;
    r.explained_variance_ratio.push_back(ratio);
    cumulative += ratio;
    if (!reached && cumulative >= variance_target - 1e-12) {
      r.n_retained = static_cast<std::size_t>(k + 1);
      reached = true;
    }
  }
  return r;
}

PcaResult pca(const Dataset& d, const std::vector<std::string>& columns,
              double variance_target) {
  Eigen::MatrixXd data(static_cast<Eigen::Index>(d.size()),
                       static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    const auto col = d.column(columns[j]);
    for (std::size_t i = 0; i < col.size(); ++i)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return pca(data, columns, variance_target);
}

std::vector<std::vector<std::string>> correlation_groups(const CorrelationMatrix& m,
                                                         double tau) {
  const std::size_t p = m.names.size();
  std::vector<std::size_t> parent(p);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (std::abs(m.rho(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) >= tau) {
        const std::size_t a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }

  std::vector<std::vector<std::string>> groups;
  std::vector<std::ptrdiff_t> slot(p, -1);
  for (std::size_t i = 0; i < p; ++i) {
    const std::size_t root = find(i);
    if (slot[root] < 0) {
      slot[root] = static_cast<std::ptrdiff_t>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(m.names[i]);
  }
  return groups;
}

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) /
         static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

double quantile(std::span<const double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::input, "quantile of an empty set");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> values) {
  return {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
}

double silverman_bandwidth(std::span<const double> values) {
  const double sd = stddev(values);
  const Quartiles q = quartiles(values);
  double spread = std::min(sd, (q.q3 - q.q1) / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values) {
  if (values.size() < 2) throw Error(ErrorKind::input, "kde needs at least 2 values");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  if (*lo_it == *hi_it)
    throw Error(ErrorKind::degenerate, "kde of identical values (point mass)");

  DensityCurve c;
  c.min = *lo_it;
  c.max = *hi_it;
  c.quartiles = quartiles(values);
  c.bandwidth = silverman_bandwidth(values);
  const double h = c.bandwidth;
  const double start = c.min - 3.0 * h;
  const double step = (c.max - c.min + 6.0 * h) / static_cast<double>(kDensityGridPoints - 1);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  c.grid.resize(kDensityGridPoints);
  c.density.resize(kDensityGridPoints);
  for (std::size_t g = 0; g < kDensityGridPoints; ++g) {
    const double x = start + step * static_cast<double>(g);
    double sum = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      sum += std::exp(-0.5 * u * u);
    }
    c.grid[g] = x;
    c.density[g] = sum * norm;
  }
  return c;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::dimension, "trapezoid inputs differ in length");
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) total += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return total;
}

}  // namespace mummi::stats
