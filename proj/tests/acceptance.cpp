// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "mummi/baselines.hpp"
#include "mummi/cli.hpp"
#include "mummi/harness.hpp"
#include "mummi/json_io.hpp"
#include "mummi/model.hpp"
#include "mummi/nnls.hpp"
#include "mummi/random.hpp"
#include "mummi/stats.hpp"
#include "mummi/whatif.hpp"
#include "support.hpp"

using namespace mummi;
using Clock = std::chrono::steady_clock;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Check error_rate_formula() {
  Check c;
  const auto t0 = Clock::now();
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double b = (rng.uniform() < 0.5 ? -1 : 1) * (1e-3 + 1e3 * rng.uniform());
    const double p = b * (0.5 + rng.uniform()) + rng.normal();
    const long double expect = (static_cast<long double>(p) - b) / b * 100.0L;
    const double got = error_rate(p, b);
    const long double rel = std::abs((got - expect) / (expect == 0 ? 1 : expect));
    c.expect(rel <= 1e-12L, "pair " + std::to_string(i) + " off by " + std::to_string(static_cast<double>(rel)));
  }
  const double s = seconds_since(t0);
  c.expect(s < 1.0, "took " + std::to_string(s) + " s");
  return c;
}

Check split_protocol() {
  Check c;
  for (auto [n, train, test] : {std::tuple{144u, 116u, 28u}, std::tuple{80u, 64u, 16u}}) {
    const Dataset d = testing::planted_dataset(n, 0.01, 1);
    const SplitResult first = split(d, {});
    c.expect(first.train.size() == train && first.test.size() == test,
             "n=" + std::to_string(n) + " gave " + std::to_string(first.train.size()) + "/" +
                 std::to_string(first.test.size()));
    std::set<std::size_t> all(first.train_indices.begin(), first.train_indices.end());
    for (auto i : first.test_indices) c.expect(all.insert(i).second, "index in both sides");
    c.expect(all.size() == n && *all.rbegin() == n - 1, "partition does not cover the dataset");
    for (int rep = 0; rep < 100; ++rep) {
      const SplitResult again = split(d, {});
      c.expect(again.test_indices == first.test_indices && again.train_indices == first.train_indices,
               "repeat " + std::to_string(rep) + " differs");
    }
  }
  return c;
}

Check nnls_correctness() {
  Check c;
  const auto t0 = Clock::now();
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + rng.below(12));
    const auto n = static_cast<Eigen::Index>(std::max<std::size_t>(5 * p, 40) +
                                             rng.below(static_cast<std::size_t>(200 - std::max<Eigen::Index>(5 * p, 40))));
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.normal();
    Eigen::VectorXd x(p);
    for (Eigen::Index j = 0; j < p; ++j) x(j) = rng.uniform() < 0.25 ? 0.0 : 0.1 + 2 * rng.uniform();
    const Eigen::VectorXd b = a * x;
    const auto exact = nnls(a, b);
    for (Eigen::Index j = 0; j < p; ++j)
      c.expect(std::abs(exact.x(j) - x(j)) <= 1e-5 * std::max(1.0, std::abs(x(j))),
               "noiseless trial " + std::to_string(trial));
    c.expect(nnls_kkt_violation(a, b, exact.x) <= 1e-8, "KKT violated, trial " + std::to_string(trial));

    Eigen::VectorXd noisy = b;
    for (Eigen::Index i = 0; i < n; ++i) noisy(i) += 0.01 * rng.normal();
    const auto r = nnls(a, noisy);
    for (Eigen::Index j = 0; j < p; ++j)
      c.expect(std::abs(r.x(j) - x(j)) <= 5e-2, "noisy trial " + std::to_string(trial));
    c.expect(nnls_kkt_violation(a, noisy, r.x) <= 1e-8, "KKT violated, noisy trial " + std::to_string(trial));
  }
  const double s = seconds_since(t0);
  c.expect(s < 10.0, "took " + std::to_string(s) + " s");
  return c;
}

Check model_form() {
  Check c;
  const std::vector<double> grid{0.8, 1.0, 1.2, 1.5, 1.8, 2.0, 2.1, 2.3, 2.6, 3.0};
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d = testing::planted_dataset(144, 0.01, seed);
    const ModelSet ms = fit_all(d);
    for (const auto& [metric, model] : ms.models)
      for (std::size_t i = 0; i < 10; ++i) {
        CounterSample s = d[i];
        double prev = 0;
        for (std::size_t g = 0; g < grid.size(); ++g) {
          s.cpu_freq_ghz = grid[g];
          const double y = predict(model, s);
          if (g > 0) {
            const bool ok = metric == Metric::runtime ? y <= prev : y >= prev;
            c.expect(ok, std::string(metric_name(metric)) + " not monotone at f=" + std::to_string(grid[g]));
          }
          prev = y;
        }
      }
  }
  return c;
}

Check spearman_and_pca() {
  Check c;
  Rng rng(77);
  for (int v = 0; v < 200; ++v) {
    const std::size_t n = 5 + rng.below(60);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(rng.below(1 + n / 3));
      y[i] = rng.uniform() < 0.3 ? std::round(rng.normal() * 2) : rng.normal();
    }
    const auto rho = stats::spearman(x, y);
    if (!rho) continue;
    c.expect(std::abs(*rho - testing::brute_spearman(x, y)) <= 1e-12, "vector " + std::to_string(v));
  }

  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 50, p = 2 + static_cast<Eigen::Index>(rng.below(8));
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double z = rng.normal();
      for (Eigen::Index j = 0; j < p; ++j) x(i, j) = (j % 2 ? z : 0.0) + rng.normal();
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("k" + std::to_string(j));
    const auto r = stats::pca(x, names);
    const Eigen::MatrixXd& v = r.components;
    const double ortho = (v.transpose() * v - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    c.expect(ortho <= 1e-8, "orthonormality error " + std::to_string(ortho));
    const Eigen::MatrixXd z = r.standardize(x);
    const double rms = std::sqrt((r.scores(x) * v.transpose() - z).squaredNorm() / static_cast<double>(n * p));
    c.expect(rms <= 1e-8, "reconstruction rms " + std::to_string(rms));
  }
  return c;
}

double mean_abs(const std::vector<double>& v) {
  double s = 0;
  for (double e : v) s += std::abs(e);
  return s / static_cast<double>(v.size());
}

/// Shared by the pipeline and ordering criteria.
const harness::ComparisonReport& planted_report(double* elapsed = nullptr) {
  static double took = 0;
  static const harness::ComparisonReport report = [] {
    const auto t0 = Clock::now();
    const Dataset d = testing::planted_dataset(144, 0.01, 2718);
    auto r = harness::run_comparison(d, {});
    took = seconds_since(t0);
    return r;
  }();
  if (elapsed) *elapsed = took;
  return report;
}

Check end_to_end() {
  Check c;
  double took = 0;
  const auto& r = planted_report(&took);
  c.expect(r.train_indices.size() == 116 && r.test_indices.size() == 28, "split is not 116/28");
  for (Metric m : kMetrics) {
    const auto& cell = r.cell(harness::kMummiMethod, m);
    c.expect(cell.ok, "mummi failed on " + std::string(metric_name(m)));
    if (!cell.ok) continue;
    const double e = mean_abs(cell.error_rates);
    c.expect(e <= 1.0, std::string(metric_name(m)) + " mean |error| " + std::to_string(e) + "%");
  }
  c.expect(took < 30.0, "took " + std::to_string(took) + " s");
  return c;
}

Check ordering() {
  Check c;
  const auto& r = planted_report();
  std::ostringstream summary;
  for (Metric m : kMetrics) {
    const double ours = mean_abs(r.cell(harness::kMummiMethod, m).error_rates);
    for (const auto& method : r.methods) {
      if (method == harness::kMummiMethod) continue;
      const auto& cell = r.cell(method, m);
      c.expect(cell.ok, method + " failed");
      if (!cell.ok) continue;
      const double theirs = mean_abs(cell.error_rates);
      c.expect(ours <= theirs, std::string(metric_name(m)) + ": mummi " + std::to_string(ours) +
                                   "% > " + method + " " + std::to_string(theirs) + "%");
    }
  }
  return c;
}

Check whatif_identities() {
  Check c;
  const Dataset d = testing::planted_dataset(144, 0.01, 5);
  const ModelSet ms = fit_all(d);
  for (const auto& pivot : d.counter_names()) {
    WhatIfScenario sc;
    sc.pivot_counter = pivot;
    sc.delta_percent = 0.0;
    sc.baseline = d.samples();
    for (const auto& m : evaluate(ms, sc).metrics)
      c.expect(m.improvement_percent && *m.improvement_percent == 0.0, "delta 0 moved " + pivot);
  }

  // All four metrics equal counter x; x = 20 cut by 15% gives 17.
  ModelSet id;
  for (Metric m : kMetrics) {
    FittedModel f;
    f.target = m;
    f.counters = {"x"};
    f.coefficients = {1.0};
    f.freq_term = default_freq_term(m);
    id.models[m] = f;
  }
  id.counter_correlation.names = {"x"};
  id.counter_correlation.rho = Eigen::MatrixXd::Identity(1, 1);
  id.counter_correlation.undefined = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(1, 1, false);
  CounterSample s;
  s.cpu_freq_ghz = 2.0;
  s.counters["x"] = 20.0;
  WhatIfScenario sc;
  sc.pivot_counter = "x";
  sc.delta_percent = -15.0;
  sc.baseline = {s};
  for (const auto& m : evaluate(id, sc).metrics)
    c.expect(m.improvement_percent && *m.improvement_percent == 15.0, "hand fixture is not 15%");

  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const double d1 = -90 + 180 * rng.uniform(), d2 = -90 + 180 * rng.uniform();
    CounterSample base;
    base.cpu_freq_ghz = 1.5;
    base.counters["x"] = rng.uniform();
    const auto twice = apply_deltas(apply_deltas(base, {{"x", d1}}), {{"x", d2}});
    const auto once = apply_deltas(base, {{"x", ((1 + d1 / 100) * (1 + d2 / 100) - 1) * 100}});
    c.expect(std::abs(twice.counters.at("x") - once.counters.at("x")) <= 1e-9, "composition");
  }
  return c;
}

Check baseline_sanity() {
  using namespace baselines;
  Check c;
  const std::vector<std::string> feats{"c1", "c2", "c3", "c4", "freq_ghz"};
  const Dataset d = testing::planted_dataset(80, 0.1, 31);

  const auto knn = fit_baseline(d, Metric::runtime, feats, KnnParams{1});
  for (const auto& s : d.samples())
    c.expect(predict_baseline(knn, s) == s.target(Metric::runtime), "kNN k=1 not exact on training data");

  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const auto& s : d.samples()) {
    std::vector<double> r;
    for (const auto& f : feats) r.push_back(s.feature(f));
    rows.push_back(r);
    y.push_back(s.target(Metric::runtime));
  }
  const auto beta = testing::ols(rows, y);
  const auto [coef, icpt] = fit_baseline(d, Metric::runtime, feats, RidgeParams{1e-10}).linear_coefficients();
  c.expect(std::abs(icpt - beta[0]) <= 1e-4, "ridge intercept far from OLS");
  for (std::size_t j = 0; j < feats.size(); ++j)
    c.expect(std::abs(coef(static_cast<Eigen::Index>(j)) - beta[j + 1]) <= 1e-4, "ridge slope far from OLS");

  BoostingParams bp;
  bp.subsample = 1.0;
  const auto boost = fit_baseline(d, Metric::runtime, feats, bp);
  const auto& rmse = std::get<BoostingState>(boost.state).train_rmse;
  for (std::size_t i = 1; i < rmse.size(); ++i) c.expect(rmse[i] <= rmse[i - 1] + 1e-12, "boosting RMSE rose");

  ForestParams fp;
  fp.n_trees = 30;
  const auto forest = fit_baseline(d, Metric::runtime, feats, fp);
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<double> r;
    for (const auto& f : feats) r.push_back(d[i].feature(f));
    double sum = 0;
    for (const auto& t : std::get<ForestState>(forest.state).trees) sum += t.predict(r);
    c.expect(std::abs(predict_baseline(forest, d[i]) - sum / 30.0) <= 1e-12 * std::max(1.0, std::abs(sum)),
             "forest is not the mean of its trees");
  }

  // GP against a dense solve on 20 points.
  const Dataset g = d.subset(std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19});
  const GpParams gp{1.5, 0.02};
  const auto gm = fit_baseline(g, Metric::runtime, feats, gp);
  const std::size_t n = g.size(), k = feats.size();
  std::vector<double> mu(k, 0), sd(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    for (const auto& s : g.samples()) mu[j] += s.feature(feats[j]) / static_cast<double>(n);
    for (const auto& s : g.samples()) sd[j] += std::pow(s.feature(feats[j]) - mu[j], 2);
    sd[j] = std::sqrt(sd[j] / static_cast<double>(n - 1));
  }
  auto kern = [&](const CounterSample& a, const CounterSample& b) {
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double u = (a.feature(feats[j]) - b.feature(feats[j])) / sd[j];
      s += u * u;
    }
    return std::exp(-s / (2 * gp.length_scale * gp.length_scale));
  };
  double ybar = 0;
  for (const auto& s : g.samples()) ybar += s.target(Metric::runtime) / static_cast<double>(n);
  std::vector<std::vector<double>> km(n, std::vector<double>(n));
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) km[i][j] = kern(g[i], g[j]) + (i == j ? gp.noise_lambda : 0);
    rhs[i] = g[i].target(Metric::runtime) - ybar;
  }
  const auto alpha = testing::gauss_solve(km, rhs);
  for (std::size_t t = 20; t < 40; ++t) {
    double expect = ybar;
    for (std::size_t i = 0; i < n; ++i) expect += alpha[i] * kern(d[t], g[i]);
    c.expect(std::abs(predict_baseline(gm, d[t]) - expect) <= 1e-8, "GP differs from dense solve");
  }

  int hits = 0;
  const std::vector<std::string> all{"c1", "c2", "c3", "c4", "c5", "c6", "c7", "c8", "freq_ghz"};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec spec = testing::planted_spec(120, 0.2, 100 + seed);
    for (auto& [metric, planted] : spec.per_target) planted.coefficients = {{"c4", 10.0}};
    const Dataset ds = synth_generate(spec);
    ForestParams p;
    p.n_trees = 50;
    p.seed = seed;
    const auto imp = importance(fit_baseline(ds, Metric::runtime, all, p), ds);
    if (imp.scores.front().first == "c4") ++hits;
  }
  c.expect(hits >= 9, "importance found the planted feature in " + std::to_string(hits) + "/10 seeds");
  return c;
}

Check compare_determinism() {
  Check c;
  const auto dir = testing::scratch_dir("acceptance-compare");
  write_csv(testing::planted_dataset(144, 0.01, 99), dir / "data.csv");
  for (const char* out : {"a", "b"}) {
    const std::string data = (dir / "data.csv").string(), o = (dir / out).string();
    const char* argv[] = {"mummi", "compare", "--data", data.c_str(), "--seed", "42", "--out", o.c_str()};
    std::ostringstream sink_out, sink_err;
    const int code = cli::run(8, argv, sink_out, sink_err);
    c.expect(code == 0, "compare exited " + std::to_string(code) + ": " + sink_err.str());
  }
  const std::string a = testing::slurp(dir / "a" / "report.json");
  c.expect(!a.empty() && a == testing::slurp(dir / "b" / "report.json"), "report.json differs between runs");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
      {"error-rate formula exactness", error_rate_formula},
      {"split protocol", split_protocol},
      {"NNLS correctness", nnls_correctness},
      {"model-form monotonicity in frequency", model_form},
      {"Spearman and PCA oracles", spearman_and_pca},
      {"end-to-end synthetic pipeline", end_to_end},
      {"what-if identities", whatif_identities},
      {"baseline sanity suite", baseline_sanity},
      {"qualitative ordering vs baselines", ordering},
      {"compare determinism", compare_determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name;
    if (!c.ok) std::cout << " (" << c.detail << ")";
    std::cout << "\n";
    failed += c.ok ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
