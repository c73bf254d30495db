#include "mummi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mummi/error.hpp"

namespace mummi::baselines {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Distinct per-tree streams from one seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Standardizer {
  Eigen::VectorXd mean, scale;

  static Standardizer fit(const Eigen::MatrixXd& x) {
    Standardizer s;
    const double n = static_cast<double>(x.rows());
    s.mean = x.colwise().mean().transpose();
    s.scale.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double ss = (x.col(j).array() - s.mean(j)).square().sum();
      const double sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
      s.scale(j) = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }
};

Eigen::MatrixXd standardize(const Eigen::MatrixXd& x, const Eigen::VectorXd& mean,
                            const Eigen::VectorXd& scale) {
  Eigen::MatrixXd z = x.rowwise() - mean.transpose();
  return z.array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd standardize_row(std::span<const double> x, const Eigen::VectorXd& mean,
                                const Eigen::VectorXd& scale) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(x.size()));
  for (Eigen::Index j = 0; j < z.size(); ++j)
    z(j) = (x[static_cast<std::size_t>(j)] - mean(j)) / scale(j);
  return z;
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> y, const TreeLimits& limits,
              Rng* rng)
      : x_(x), y_(y), limits_(limits), rng_(rng) {}

  RegressionTree build(std::vector<std::size_t> rows) {
    RegressionTree tree;
    grow(tree, std::move(rows), 0);
    return tree;
  }

 private:
  int grow(RegressionTree& tree, std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t r : rows) {
      sum += y_[r];
      sumsq += y_[r] * y_[r];
    }
    const double n = static_cast<double>(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].value = sum / n;
    tree.nodes[static_cast<std::size_t>(id)].n_rows = rows.size();

    const std::size_t min_leaf = std::max<std::size_t>(1, limits_.min_leaf);
    if (depth >= limits_.max_depth || rows.size() < 2 * min_leaf) return id;
    const double parent_sse = sumsq - sum * sum / n;
    if (!(parent_sse > 1e-12 * std::max(1.0, sumsq))) return id;

    int best_feature = -1;
    double best_gain = 0.0, best_threshold = 0.0;
    std::vector<std::size_t> order(rows);
    for (Eigen::Index f : candidate_features()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = x_(static_cast<Eigen::Index>(a), f);
        const double xb = x_(static_cast<Eigen::Index>(b), f);
        return xa != xb ? xa < xb : a < b;
      });
      double left_sum = 0.0;
      for (std::size_t i = 1; i < order.size(); ++i) {
        left_sum += y_[order[i - 1]];
        if (i < min_leaf || order.size() - i < min_leaf) continue;
        const double lo = x_(static_cast<Eigen::Index>(order[i - 1]), f);
        const double hi = x_(static_cast<Eigen::Index>(order[i]), f);
        if (!(lo < hi)) continue;
        const double nl = static_cast<double>(i);
        const double nr = n - nl;
        const double right_sum = sum - left_sum;
        const double gain =
            left_sum * left_sum / nl + right_sum * right_sum / nr - sum * sum / n;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (lo + hi);
          if (!(best_threshold > lo && best_threshold < hi)) best_threshold = lo;
        }
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-12 * parent_sse)) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows)
      (x_(static_cast<Eigen::Index>(r), best_feature) <= best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    {
      auto& node = tree.nodes[static_cast<std::size_t>(id)];
      node.feature = best_feature;
      node.threshold = best_threshold;
      node.gain = best_gain;
    }
    const int l = grow(tree, std::move(left), depth + 1);
    const int r = grow(tree, std::move(right), depth + 1);
    tree.nodes[static_cast<std::size_t>(id)].left = l;
    tree.nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  std::vector<Eigen::Index> candidate_features() {
    const auto p = static_cast<std::size_t>(x_.cols());
    std::vector<Eigen::Index> all(p);
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    if (limits_.max_features == 0 || limits_.max_features >= p || rng_ == nullptr) return all;
    // Partial Fisher-Yates, then column order so ties resolve the same way.
    for (std::size_t i = 0; i < limits_.max_features; ++i)
      std::swap(all[i], all[i + rng_->below(p - i)]);
    all.resize(limits_.max_features);
    std::sort(all.begin(), all.end());
    return all;
  }

  const Eigen::MatrixXd& x_;
  std::span<const double> y_;
  TreeLimits limits_;
  Rng* rng_;
};

std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

double mean_of(const Eigen::VectorXd& v) { return v.size() ? v.mean() : 0.0; }

FittedState fit_state(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams& hp) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});

  return std::visit(
      overloaded{
          [&](const RidgeParams& p) -> FittedState {
            const auto st = Standardizer::fit(x);
            const Eigen::MatrixXd z = standardize(x, st.mean, st.scale);
            LinearState s{st.mean, st.scale, {}, mean_of(y)};
            const Eigen::VectorXd yc = y.array() - s.intercept;
            Eigen::MatrixXd gram = z.transpose() * z;
            gram.diagonal().array() += p.lambda;
            Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
              throw Error(ErrorKind::numeric,
                          "ridge normal equations are singular; increase lambda");
            s.coef = ldlt.solve(z.transpose() * yc);
            return s;
          },
          [&](const KnnParams& p) -> FittedState {
            const auto st = Standardizer::fit(x);
            return KnnState{st.mean, st.scale, standardize(x, st.mean, st.scale), y,
                            std::min(p.k, n)};
          },
          [&](const CartParams& p) -> FittedState {
            TreeBuilder b(x, as_span(y), {p.max_depth, p.min_leaf, 0}, nullptr);
            return TreeState{b.build(all_rows)};
          },
          [&](const ForestParams& p) -> FittedState {
            const std::size_t p_feat = static_cast<std::size_t>(x.cols());
            const std::size_t mtry =
                p.max_features ? std::min(p.max_features, p_feat) : std::max<std::size_t>(1, p_feat / 3);
            ForestState s;
            s.trees.reserve(p.n_trees);
            for (std::size_t t = 0; t < p.n_trees; ++t) {
              Rng rng(mix_seed(p.seed, t));
              std::vector<std::size_t> rows;
              if (p.bootstrap) {
                rows.reserve(n);
                for (std::size_t i = 0; i < n; ++i) rows.push_back(rng.below(n));
              } else {
                rows = all_rows;
              }
              TreeBuilder b(x, as_span(y), {p.max_depth, p.min_leaf, mtry}, &rng);
              s.trees.push_back(b.build(std::move(rows)));
            }
            return s;
          },
          [&](const BoostingParams& p) -> FittedState {
            BoostingState s;
            s.base = mean_of(y);
            s.shrinkage = p.shrinkage;
            Eigen::VectorXd fitted = Eigen::VectorXd::Constant(x.rows(), s.base);
            Eigen::VectorXd resid = y - fitted;
            Rng rng(p.seed);
            const std::size_t m = std::clamp<std::size_t>(
                static_cast<std::size_t>(std::floor(p.subsample * static_cast<double>(n))), 1, n);
            for (std::size_t round = 0; round < p.n_rounds; ++round) {
              std::vector<std::size_t> rows;
              if (m == n) {
                rows = all_rows;
              } else {
                auto perm = rng.permutation(n);
                rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
                std::sort(rows.begin(), rows.end());
              }
              TreeBuilder b(x, as_span(resid), {p.max_depth, p.min_leaf, 0}, nullptr);
              RegressionTree tree = b.build(std::move(rows));
              for (Eigen::Index i = 0; i < x.rows(); ++i) {
                Eigen::VectorXd xi = x.row(i).transpose();
                fitted(i) += p.shrinkage * tree.predict(as_span(xi));
              }
              resid = y - fitted;
              s.train_rmse.push_back(std::sqrt(resid.squaredNorm() / static_cast<double>(n)));
              s.trees.push_back(std::move(tree));
            }
            return s;
          },
          [&](const GpParams& p) -> FittedState {
            const auto st = Standardizer::fit(x);
            GpState s;
            s.mean = st.mean;
            s.scale = st.scale;
            s.x = standardize(x, st.mean, st.scale);
            s.y_mean = mean_of(y);
            s.length_scale = p.length_scale;
            const Eigen::Index rows = s.x.rows();
            Eigen::MatrixXd k(rows, rows);
            const double inv = 1.0 / (2.0 * p.length_scale * p.length_scale);
            for (Eigen::Index i = 0; i < rows; ++i)
              for (Eigen::Index j = i; j < rows; ++j)
                k(i, j) = k(j, i) = std::exp(-(s.x.row(i) - s.x.row(j)).squaredNorm() * inv);
            k.diagonal().array() += p.noise_lambda;
            Eigen::LLT<Eigen::MatrixXd> llt(k);
            if (llt.info() != Eigen::Success)
              throw Error(ErrorKind::numeric,
                          "GP kernel system is not positive definite; increase noise_lambda");
            s.alpha = llt.solve((y.array() - s.y_mean).matrix());
            return s;
          },
      },
      hp);
}

double predict_state(const FittedState& state, std::span<const double> x) {
  return std::visit(
      overloaded{
          [&](const LinearState& s) {
            return s.intercept + s.coef.dot(standardize_row(x, s.mean, s.scale));
          },
          [&](const KnnState& s) {
            const Eigen::VectorXd z = standardize_row(x, s.mean, s.scale);
            std::vector<std::pair<double, Eigen::Index>> dist;
            dist.reserve(static_cast<std::size_t>(s.x.rows()));
            for (Eigen::Index i = 0; i < s.x.rows(); ++i)
              dist.emplace_back((s.x.row(i).transpose() - z).squaredNorm(), i);
            const auto k = static_cast<std::ptrdiff_t>(s.k);
            std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
            double sum = 0.0;
            for (std::ptrdiff_t i = 0; i < k; ++i) sum += s.y(dist[static_cast<std::size_t>(i)].second);
            return sum / static_cast<double>(k);
          },
          [&](const TreeState& s) { return s.tree.predict(x); },
          [&](const ForestState& s) {
            double sum = 0.0;
            for (const auto& t : s.trees) sum += t.predict(x);
            return sum / static_cast<double>(s.trees.size());
          },
          [&](const BoostingState& s) {
            double y = s.base;
            for (const auto& t : s.trees) y += s.shrinkage * t.predict(x);
            return y;
          },
          [&](const GpState& s) {
            const Eigen::VectorXd z = standardize_row(x, s.mean, s.scale);
            const double inv = 1.0 / (2.0 * s.length_scale * s.length_scale);
            double y = s.y_mean;
            for (Eigen::Index i = 0; i < s.x.rows(); ++i)
              y += s.alpha(i) * std::exp(-(s.x.row(i).transpose() - z).squaredNorm() * inv);
            return y;
          },
      },
      state);
}

void check_features(const Dataset& d, const std::vector<std::string>& features) {
  if (features.empty()) throw Error(ErrorKind::input, "no features given");
  if (d.empty()) return;
  for (const auto& f : features) {
    try {
      (void)d[0].feature(f);
    } catch (const Error&) {
      throw Error(ErrorKind::name, "unknown feature: " + f);
    }
  }
}

Eigen::VectorXd target_vector(const Dataset& d, Metric target) {
  const auto col = d.target_column(target);
  return Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ridge: return "ridge";
    case Method::knn: return "knn";
    case Method::cart: return "cart";
    case Method::random_forest: return "random_forest";
    case Method::gradient_boosting: return "gradient_boosting";
    case Method::gp_rbf: return "gp_rbf";
  }
  return "ridge";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : kMethods)
    if (method_name(m) == name) return m;
  return std::nullopt;
}

Method method_of(const Hyperparams& hp) { return kMethods[hp.index()]; }

void validate(const Hyperparams& hp) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::validation, msg); };
  std::visit(overloaded{
                 [&](const RidgeParams& p) {
                   if (!(p.lambda > 0.0)) fail("ridge: lambda must be > 0");
                 },
                 [&](const KnnParams& p) {
                   if (p.k < 1) fail("knn: k must be >= 1");
                 },
                 [&](const CartParams& p) {
                   if (p.min_leaf < 1) fail("cart: min_leaf must be >= 1");
                 },
                 [&](const ForestParams& p) {
                   if (p.n_trees < 1) fail("random_forest: n_trees must be >= 1");
                   if (p.min_leaf < 1) fail("random_forest: min_leaf must be >= 1");
                 },
                 [&](const BoostingParams& p) {
                   if (p.n_rounds < 1) fail("gradient_boosting: n_rounds must be >= 1");
                   if (!(p.shrinkage > 0.0 && p.shrinkage <= 1.0))
                     fail("gradient_boosting: shrinkage must lie in (0, 1]");
                   if (!(p.subsample > 0.0 && p.subsample <= 1.0))
                     fail("gradient_boosting: subsample must lie in (0, 1]");
                   if (p.min_leaf < 1) fail("gradient_boosting: min_leaf must be >= 1");
                 },
                 [&](const GpParams& p) {
                   if (!(p.length_scale > 0.0)) fail("gp_rbf: length_scale must be > 0");
                   if (!(p.noise_lambda > 0.0)) fail("gp_rbf: noise_lambda must be > 0");
                 },
             },
             hp);
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const auto& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                        : n.right);
  }
  return nodes[i].value;
}

std::size_t RegressionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<int, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    best = std::max(best, d);
    const auto& n = nodes[static_cast<std::size_t>(id)];
    if (n.feature >= 0) {
      stack.emplace_back(n.left, d + 1);
      stack.emplace_back(n.right, d + 1);
    }
  }
  return best;
}

RegressionTree grow_tree(const Eigen::MatrixXd& x, std::span<const double> y,
                         std::span<const std::size_t> rows, const TreeLimits& limits, Rng* rng) {
  if (rows.empty()) throw Error(ErrorKind::input, "cannot grow a tree on zero rows");
  TreeBuilder b(x, y, limits, rng);
  return b.build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

std::pair<Eigen::VectorXd, double> BaselineModel::linear_coefficients() const {
  const auto* s = std::get_if<LinearState>(&state);
  if (s == nullptr) throw Error(ErrorKind::unsupported, "coefficients exist only for ridge");
  Eigen::VectorXd coef = s->coef.array() / s->scale.array();
  return {coef, s->intercept - coef.dot(s->mean)};
}

Eigen::MatrixXd feature_matrix(const Dataset& d, const std::vector<std::string>& features) {
  check_features(d, features);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(features.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < features.size(); ++j)
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d[i].feature(features[j]);
  return x;
}

BaselineModel fit_baseline(const Dataset& train, Metric target,
                           const std::vector<std::string>& features, const Hyperparams& hp) {
  validate(hp);
  if (!train.has_targets()) throw Error(ErrorKind::input, "baseline fit needs target values");
  if (train.size() < 3) throw Error(ErrorKind::input, "baseline fit needs at least 3 samples");
  BaselineModel m;
  m.method = method_of(hp);
  m.hyperparams = hp;
  m.features = features;
  m.target = target;
  m.state = fit_state(feature_matrix(train, features), target_vector(train, target), hp);
  return m;
}

double predict_row(const BaselineModel& m, std::span<const double> x) {
  if (x.size() != m.features.size())
    throw Error(ErrorKind::dimension, "feature vector has the wrong length");
  return predict_state(m.state, x);
}

double predict_baseline(const BaselineModel& m, const CounterSample& sample) {
  std::vector<double> x;
  x.reserve(m.features.size());
  for (const auto& f : m.features) {
    try {
      x.push_back(sample.feature(f));
    } catch (const Error&) {
      throw Error(ErrorKind::name, "sample lacks feature " + f);
    }
  }
  return predict_state(m.state, x);
}

std::vector<std::size_t> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error(ErrorKind::input, "cross-validation needs at least 2 folds");
  if (folds > n)
    throw Error(ErrorKind::input, "cannot build " + std::to_string(folds) + " folds from " +
                                      std::to_string(n) + " samples");
  Rng rng(seed);
  const auto order = rng.permutation(n);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold_of[order[pos]] = pos * folds / n;
  return fold_of;
}

TuneResult tune_detailed(const Dataset& train, Metric target,
                         const std::vector<std::string>& features,
                         const std::vector<Hyperparams>& grid, std::size_t folds,
                         std::uint64_t seed) {
  if (grid.empty()) throw Error(ErrorKind::input, "tuning grid is empty");
  for (const auto& hp : grid) {
    validate(hp);
    if (method_of(hp) != method_of(grid.front()))
      throw Error(ErrorKind::input, "tuning grid mixes methods");
  }
  TuneResult result{grid.front(), {}};
  if (grid.size() == 1) {
    result.cv_rmse.push_back(std::numeric_limits<double>::quiet_NaN());
    return result;
  }

  const Eigen::MatrixXd x = feature_matrix(train, features);
  const Eigen::VectorXd y = target_vector(train, target);
  const std::size_t n = train.size();
  const auto fold_of = cv_folds(n, folds, seed);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double sse = 0.0;
    try {
      for (std::size_t f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> in, out;
        for (std::size_t i = 0; i < n; ++i)
          (fold_of[i] == f ? out : in).push_back(static_cast<Eigen::Index>(i));
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(in.size()), x.cols());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(in.size()));
        for (std::size_t r = 0; r < in.size(); ++r) {
          xt.row(static_cast<Eigen::Index>(r)) = x.row(in[r]);
          yt(static_cast<Eigen::Index>(r)) = y(in[r]);
        }
        const FittedState st = fit_state(xt, yt, grid[g]);
        for (Eigen::Index r : out) {
          const Eigen::VectorXd xr = x.row(r).transpose();
          const double e = predict_state(st, {xr.data(), static_cast<std::size_t>(xr.size())}) - y(r);
          sse += e * e;
        }
      }
    } catch (const Error&) {
      sse = std::numeric_limits<double>::infinity();
    }
    const double rmse = std::sqrt(sse / static_cast<double>(n));
    result.cv_rmse.push_back(rmse);
    if (rmse < best) {
      best = rmse;
      result.best = grid[g];
    }
  }
  return result;
}

Hyperparams tune(const Dataset& train, Metric target, const std::vector<std::string>& features,
                 const std::vector<Hyperparams>& grid, std::size_t folds, std::uint64_t seed) {
  return tune_detailed(train, target, features, grid, folds, seed).best;
}

ImportanceReport importance(const BaselineModel& m, const Dataset& train) {
  const std::vector<RegressionTree>* trees = nullptr;
  std::vector<RegressionTree> single;
  if (const auto* s = std::get_if<TreeState>(&m.state)) {
    single.push_back(s->tree);
    trees = &single;
  } else if (const auto* s = std::get_if<ForestState>(&m.state)) {
    trees = &s->trees;
  } else if (const auto* s = std::get_if<BoostingState>(&m.state)) {
    trees = &s->trees;
  } else {
    throw Error(ErrorKind::unsupported,
                "importance is defined for tree methods only, not " +
                    std::string(method_name(m.method)));
  }
  check_features(train, m.features);

  std::vector<double> total(m.features.size(), 0.0);
  for (const auto& t : *trees)
    for (const auto& node : t.nodes)
      if (node.feature >= 0) total[static_cast<std::size_t>(node.feature)] += node.gain;

  ImportanceReport r;
  for (std::size_t j = 0; j < m.features.size(); ++j) r.scores.emplace_back(m.features[j], total[j]);
  std::stable_sort(r.scores.begin(), r.scores.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return r;
}

std::vector<Hyperparams> default_grid(Method m, std::size_t n_features, std::uint64_t seed) {
  const std::size_t p = std::max<std::size_t>(1, n_features);
  std::vector<Hyperparams> grid;
  switch (m) {
    case Method::ridge:
      for (double l : {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0}) grid.push_back(RidgeParams{l});
      break;
    case Method::knn:
      for (std::size_t k : {1, 2, 3, 5, 7, 9}) grid.push_back(KnnParams{k});
      break;
    case Method::cart:
      for (std::size_t d : {2, 4, 6, 8})
        for (std::size_t leaf : {1, 3, 5}) grid.push_back(CartParams{d, leaf});
      break;
    case Method::random_forest:
      for (std::size_t mtry : {std::max<std::size_t>(1, p / 3), p})
        grid.push_back(ForestParams{100, mtry, 2, 32, seed, true});
      break;
    case Method::gradient_boosting:
      for (double s : {0.05, 0.1})
        for (std::size_t d : {2, 3}) grid.push_back(BoostingParams{150, s, 0.8, d, 2, seed});
      break;
    case Method::gp_rbf: {
      const double root = std::sqrt(static_cast<double>(p));
      for (double l : {0.5, 1.0, 2.0, 4.0})
        for (double lambda : {1e-3, 1e-2, 1e-1}) grid.push_back(GpParams{l * root, lambda});
      break;
    }
  }
  return grid;
}

}  // namespace mummi::baselines
