#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mummi/dataset.hpp"
#include "mummi/random.hpp"

namespace mummi::baselines {

enum class Method { ridge, knn, cart, random_forest, gradient_boosting, gp_rbf };

inline constexpr std::array<Method, 6> kMethods = {
    Method::ridge, Method::knn, Method::cart,
    Method::random_forest, Method::gradient_boosting, Method::gp_rbf};

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

struct RidgeParams {
  double lambda = 1.0;
};

struct KnnParams {
  std::size_t k = 5;
};

struct CartParams {
  std::size_t max_depth = 6;
  std::size_t min_leaf = 2;
};

struct ForestParams {
  std::size_t n_trees = 100;
  /// Features tried per split; 0 means one third of the features.
  std::size_t max_features = 0;
  std::size_t min_leaf = 2;
  std::size_t max_depth = 32;
  std::uint64_t seed = 1;
  /// Off only for checking a one-tree forest against a lone tree.
  bool bootstrap = true;
};

struct BoostingParams {
  std::size_t n_rounds = 100;
  double shrinkage = 0.1;
  double subsample = 0.8;
  std::size_t max_depth = 3;
  std::size_t min_leaf = 2;
  std::uint64_t seed = 1;
};

struct GpParams {
  double length_scale = 1.0;
  double noise_lambda = 1e-2;
};

using Hyperparams =
    std::variant<RidgeParams, KnnParams, CartParams, ForestParams, BoostingParams, GpParams>;

Method method_of(const Hyperparams& hp);
void validate(const Hyperparams& hp);

/// Binary regression tree grown by greatest squared-error reduction.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // mean target of the node's rows
    double gain = 0.0;   // squared-error reduction of the split
    std::size_t n_rows = 0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
  std::size_t depth() const;
};

struct TreeLimits {
  std::size_t max_depth = 6;
  std::size_t min_leaf = 1;
  /// Features tried per split; 0 or >= p means all, in column order.
  std::size_t max_features = 0;
};

/// Grows a tree on the given rows of x. The rng is only consulted when
/// max_features restricts the per-split candidates.
RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y,
                         std::span<const std::size_t> rows, const TreeLimits& limits,
                         Rng* rng = nullptr);

struct LinearState {
  Eigen::VectorXd mean, scale;
  Eigen::VectorXd coef;  // on standardized features
  double intercept = 0.0;
};

struct KnnState {
  Eigen::VectorXd mean, scale;
  Eigen::MatrixXd x;  // standardized training rows
  Eigen::VectorXd y;
  std::size_t k = 1;
};

struct TreeState {
  RegressionTree tree;
};

struct ForestState {
  std::vector<RegressionTree> trees;
};

struct BoostingState {
  double base = 0.0;
  double shrinkage = 1.0;
  std::vector<RegressionTree> trees;
  /// Training RMSE after each round, for the full training set.
  std::vector<double> train_rmse;
};

struct GpState {
  Eigen::VectorXd mean, scale;
  Eigen::MatrixXd x;      // standardized training rows
  Eigen::VectorXd alpha;  // (K + lambda I)^-1 (y - y_mean)
  double y_mean = 0.0;
  double length_scale = 1.0;
};

using FittedState =
    std::variant<LinearState, KnnState, TreeState, ForestState, BoostingState, GpState>;

struct BaselineModel {
  Method method = Method::ridge;
  Hyperparams hyperparams;
  std::vector<std::string> features;
  Metric target = Metric::runtime;
  FittedState state;

  /// Ridge only: coefficients and intercept on the original feature scale.
  std::pair<Eigen::VectorXd, double> linear_coefficients() const;
};

/// Samples-by-features matrix of the named features.
Eigen::MatrixXd feature_matrix(const Dataset& d, const std::vector<std::string>& features);

BaselineModel fit_baseline(const Dataset& train, Metric target,
                           const std::vector<std::string>& features, const Hyperparams& hp);

double predict_baseline(const BaselineModel& m, const CounterSample& sample);
double predict_row(const BaselineModel& m, std::span<const double> x);

/// k-fold cross-validated RMSE for each grid entry; returns the argmin
/// (first on ties). Folds are contiguous blocks of a seeded shuffle.
struct TuneResult {
  Hyperparams best;
  std::vector<double> cv_rmse;
};

TuneResult tune_detailed(const Dataset& train, Metric target,
                         const std::vector<std::string>& features,
                         const std::vector<Hyperparams>& grid, std::size_t folds,
                         std::uint64_t seed);

Hyperparams tune(const Dataset& train, Metric target, const std::vector<std::string>& features,
                 const std::vector<Hyperparams>& grid, std::size_t folds, std::uint64_t seed);

/// Fold assignment used by tune: fold_of[i] for each training row.
std::vector<std::size_t> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

struct ImportanceReport {
  std::vector<std::pair<std::string, double>> scores;  // nonincreasing
  std::string semantics = "total squared-error reduction over tree splits";
};

/// Tree methods only; other methods raise an unsupported error.
ImportanceReport importance(const BaselineModel& m, const Dataset& train);

/// Default tuning grid for a method with p features.
std::vector<Hyperparams> default_grid(Method m, std::size_t n_features, std::uint64_t seed);

}  // namespace mummi::baselines
