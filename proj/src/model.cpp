#include "mummi/model.hpp"

#include <algorithm>
#include <cmath>

#include "mummi/error.hpp"
#include "mummi/nnls.hpp"

namespace mummi {

namespace {

constexpr double kLoadingTieTolerance = 1e-9;

Error with_context(const Error& e, Metric m) {
  return Error(e.kind(), std::string(metric_name(m)) + ": " + e.what());
}

}  // namespace

void validate(const SelectionParams& p) {
  if (!(p.relevance_threshold >= 0.0 && p.relevance_threshold <= 1.0))
    throw Error(ErrorKind::validation, "relevance_threshold must lie in [0, 1]");
  if (!(p.variance_target > 0.0 && p.variance_target <= 1.0))
    throw Error(ErrorKind::validation, "variance_target must lie in (0, 1]");
  if (p.max_counters == 0)
    throw Error(ErrorKind::validation, "max_counters must be positive");
}

Selection select_counters_detailed(const Dataset& train, Metric target,
                                   const SelectionParams& params) {
  validate(params);
  if (!train.normalized())
    throw Error(ErrorKind::state, "counter selection expects normalized counters");
  if (!train.has_targets())
    throw Error(ErrorKind::input, "counter selection needs target values");

  Selection sel;
  sel.target = target;
  const std::size_t recommended = std::max<std::size_t>(8, train.counter_names().size() / 4);
  if (train.size() < recommended)
    sel.warnings.push_back("only " + std::to_string(train.size()) +
                           " training samples; at least " + std::to_string(recommended) +
                           " recommended");

  const auto y = train.target_column(target);
  std::map<std::string, double> abs_rho;
  for (const auto& c : train.counter_names()) {
    const auto x = train.column(c);
    const auto rho = stats::spearman(x, y);
    sel.relevance.push_back({c, rho.value_or(0.0), rho.has_value()});
    if (rho && std::abs(*rho) >= params.relevance_threshold) {
      sel.candidates.push_back(c);
      abs_rho[c] = std::abs(*rho);
    }
  }
  if (sel.candidates.empty())
    throw Error(ErrorKind::selection,
                "no counter reaches |rho| >= " + std::to_string(params.relevance_threshold) +
                    " against " + std::string(metric_name(target)));

  std::vector<std::string> chosen;
  if (sel.candidates.size() == 1) {
    chosen = sel.candidates;
    sel.explained_variance_ratio = {1.0};
    sel.n_retained = 1;
  } else {
    const auto pc = stats::pca(train, sel.candidates, params.variance_target);
    sel.explained_variance_ratio = pc.explained_variance_ratio;
    sel.n_retained = pc.n_retained;
    for (const auto& d : pc.dropped)
      sel.warnings.push_back("counter " + d + " has zero variance; skipped in PCA");
    for (std::size_t k = 0; k < pc.n_retained; ++k) {
      const auto col = pc.components.col(static_cast<Eigen::Index>(k));
      const std::string* best = nullptr;
      double best_loading = -1.0;
      for (std::size_t j = 0; j < pc.names.size(); ++j) {
        const std::string& name = pc.names[j];
        if (std::find(chosen.begin(), chosen.end(), name) != chosen.end()) continue;
        const double loading = std::abs(col(static_cast<Eigen::Index>(j)));
        if (best == nullptr || loading > best_loading + kLoadingTieTolerance ||
            (std::abs(loading - best_loading) <= kLoadingTieTolerance && name < *best)) {
          best = &name;
          best_loading = loading;
        }
      }
      if (best != nullptr) chosen.push_back(*best);
    }
  }

  std::sort(chosen.begin(), chosen.end(), [&](const std::string& a, const std::string& b) {
    const double ra = abs_rho.at(a), rb = abs_rho.at(b);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  if (chosen.size() > params.max_counters) chosen.resize(params.max_counters);
  sel.counters = std::move(chosen);
  return sel;
}

std::vector<std::string> select_counters(const Dataset& train, Metric target,
                                         const SelectionParams& params) {
  return select_counters_detailed(train, target, params).counters;
}

double FittedModel::coefficient(std::string_view counter) const {
  for (std::size_t i = 0; i < counters.size(); ++i)
    if (counters[i] == counter) return coefficients[i];
  return 0.0;
}

FittedModel fit(const Dataset& train, Metric target,
                const std::vector<std::string>& counters, FreqTerm freq_term) {
  if (counters.empty()) throw Error(ErrorKind::input, "fit needs at least one counter");
  if (!train.has_targets()) throw Error(ErrorKind::input, "fit needs target values");
  for (const auto& c : counters)
    if (!train.has_counter(c)) throw Error(ErrorKind::name, "unknown counter: " + c);
  const std::size_t n = train.size();
  const std::size_t k = counters.size();
  if (n < k + 2)
    throw Error(ErrorKind::input, "underdetermined fit: " + std::to_string(n) +
                                      " samples for " + std::to_string(k + 2) +
                                      " parameters");

  const auto rows = static_cast<Eigen::Index>(n);
  const auto cols = static_cast<Eigen::Index>(k + 1);
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = train[i];
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < k; ++j) x(r, static_cast<Eigen::Index>(j)) = s.counters.at(counters[j]);
    x(r, cols - 1) = frequency_regressor(freq_term, s.cpu_freq_ghz);
    y(r) = s.target(target);
  }

  // A free intercept is equivalent to fitting centered data.
  const Eigen::RowVectorXd x_mean = x.colwise().mean();
  const double y_mean = y.mean();
  Eigen::MatrixXd xc = x.rowwise() - x_mean;
  const Eigen::VectorXd yc = y.array() - y_mean;

  FittedModel m;
  m.target = target;
  m.counters = counters;
  m.freq_term = freq_term;

  // Unit-norm columns keep the active-set tolerances meaningful; positive
  // scaling leaves the sign constraints unchanged.
  std::vector<Eigen::Index> live;
  Eigen::VectorXd norms(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    norms(j) = xc.col(j).norm();
    const double ref = std::max(1.0, x.col(j).cwiseAbs().maxCoeff()) * std::sqrt(static_cast<double>(n));
    if (norms(j) > 1e-12 * ref) live.push_back(j);
  }
  if (live.size() < static_cast<std::size_t>(cols)) m.non_unique = true;

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(cols);
  if (!live.empty()) {
    Eigen::MatrixXd a(rows, static_cast<Eigen::Index>(live.size()));
    for (std::size_t j = 0; j < live.size(); ++j)
      a.col(static_cast<Eigen::Index>(j)) = xc.col(live[j]) / norms(live[j]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < a.cols()) m.non_unique = true;
    const NnlsResult sol = nnls(a, yc);
    for (std::size_t j = 0; j < live.size(); ++j)
      beta(live[j]) = sol.x(static_cast<Eigen::Index>(j)) / norms(live[j]);
  }

  m.coefficients.assign(beta.data(), beta.data() + k);
  m.freq_coefficient = beta(cols - 1);
  m.intercept = y_mean - x_mean.dot(beta);

  const Eigen::VectorXd resid = (y - x * beta).array() - m.intercept;
  const double sse = resid.squaredNorm();
  const double sst = yc.squaredNorm();
  m.training_fit.rmse = std::sqrt(sse / static_cast<double>(n));
  m.training_fit.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  return m;
}

FittedModel fit(const Dataset& train, Metric target, const std::vector<std::string>& counters) {
  return fit(train, target, counters, default_freq_term(target));
}

double predict(const FittedModel& m, const CounterSample& sample) {
  if (!(sample.cpu_freq_ghz > 0.0))
    throw Error(ErrorKind::domain, "cpu_freq_ghz must be > 0");
  double y = m.intercept;
  for (std::size_t i = 0; i < m.counters.size(); ++i) {
    auto it = sample.counters.find(m.counters[i]);
    if (it == sample.counters.end())
      throw Error(ErrorKind::name, "sample lacks selected counter " + m.counters[i]);
    y += m.coefficients[i] * it->second;
  }
  return y + m.freq_coefficient * frequency_regressor(m.freq_term, sample.cpu_freq_ghz);
}

const FittedModel& ModelSet::at(Metric m) const {
  auto it = models.find(m);
  if (it == models.end())
    throw Error(ErrorKind::name, "model set has no " + std::string(metric_name(m)) + " model");
  return it->second;
}

ModelSet fit_all(const Dataset& train, const SelectionParams& params) {
  validate(params);
  ModelSet ms;
  ms.params = params;
  ms.n_train = train.size();
  ms.counter_correlation = stats::spearman_matrix(train, train.counter_names());
  for (Metric metric : kMetrics) {
    try {
      Selection sel = select_counters_detailed(train, metric, params);
      ms.models[metric] = fit(train, metric, sel.counters, default_freq_term(metric));
      ms.selections[metric] = std::move(sel);
    } catch (const Error& e) {
      throw with_context(e, metric);
    }
  }
  return ms;
}

double error_rate(double prediction, double baseline) {
  if (baseline == 0.0) throw Error(ErrorKind::domain, "error rate against a zero baseline");
  return (prediction - baseline) / baseline * 100.0;
}

ModelRanking rank_model(const FittedModel& m, const Dataset& train) {
  if (train.empty()) throw Error(ErrorKind::input, "ranking needs training samples");
  ModelRanking r;
  r.target = m.target;
  double total = 0.0;
  for (std::size_t i = 0; i < m.counters.size(); ++i) {
    if (!train.has_counter(m.counters[i]))
      throw Error(ErrorKind::name, "training data lacks counter " + m.counters[i]);
    const auto col = train.column(m.counters[i]);
    const double score = m.coefficients[i] * stats::mean(col);
    r.entries.push_back({m.counters[i], score, 0.0});
    total += score;
  }
  std::vector<double> g;
  for (const auto& s : train.samples()) g.push_back(frequency_regressor(m.freq_term, s.cpu_freq_ghz));
  r.freq_contribution = m.freq_coefficient * stats::mean(g);

  if (!(total > 0.0)) {
    r.all_zero = true;
    r.entries.clear();
    return r;
  }
  for (auto& e : r.entries) e.share = e.score / total;
  std::sort(r.entries.begin(), r.entries.end(), [](const RankingEntry& a, const RankingEntry& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.counter < b.counter;
  });
  return r;
}

CounterRanking rank_counters(const ModelSet& ms, const Dataset& train) {
  CounterRanking out;
  for (const auto& [metric, model] : ms.models) out.models.push_back(rank_model(model, train));
  return out;
}

}  // namespace mummi
