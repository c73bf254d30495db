#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mummi/dataset.hpp"

namespace mummi::stats {

/// 1-based ranks; tied values share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation, or nullopt when either input is constant.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Spearman's rho with average ranks for ties. Returns nullopt when either
/// vector is constant. Throws on length mismatch or fewer than 3 values.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd rho;
  /// undefined(i, j) is true where one column was constant; rho is 0 there.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> undefined;

  std::size_t index_of(std::string_view name) const;  // throws name error
  double at(std::string_view a, std::string_view b) const;
};

CorrelationMatrix spearman_matrix(const Dataset& d, const std::vector<std::string>& columns);

struct PcaResult {
  /// Columns that entered the decomposition (zero-variance columns removed).
  std::vector<std::string> names;
  std::vector<std::string> dropped;
  Eigen::VectorXd means;
  Eigen::VectorXd scales;
  /// One unit-length component per column, ordered by decreasing variance.
  /// The largest-magnitude loading of each component is positive.
  Eigen::MatrixXd components;
  Eigen::VectorXd eigenvalues;
  std::vector<double> explained_variance_ratio;
  std::size_t n_retained = 0;

  /// Rows of `data` (same column order as names) standardized and projected.
  Eigen::MatrixXd scores(const Eigen::MatrixXd& data) const;
  Eigen::MatrixXd standardize(const Eigen::MatrixXd& data) const;
};

/// PCA on the correlation matrix of the named columns. n_retained is the
/// smallest k whose cumulative explained ratio reaches variance_target.
PcaResult pca(const Dataset& d, const std::vector<std::string>& columns,
              double variance_target = 0.9);

/// Same, on a samples-by-columns matrix.
PcaResult pca(const Eigen::MatrixXd& data, const std::vector<std::string>& names,
              double variance_target = 0.9);

/// Connected components of the graph joining i and j when |rho_ij| >= tau.
/// Groups are ordered by their first member; members keep matrix order.
std::vector<std::vector<std::string>> correlation_groups(const CorrelationMatrix& m,
                                                         double tau);

/// Quantile by linear interpolation between order statistics (h = (n-1)p).
double quantile(std::span<const double> values, double p);

struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

Quartiles quartiles(std::span<const double> values);

double mean(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double stddev(std::span<const double> values);

struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  Quartiles quartiles;
  double min = 0.0;
  double max = 0.0;
};

inline constexpr std::size_t kDensityGridPoints = 512;

/// Silverman's rule: 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE on a 512-point grid spanning [min - 3h, max + 3h].
DensityCurve kde(std::span<const double> values);

/// Trapezoid-rule integral of a sampled curve.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace mummi::stats
