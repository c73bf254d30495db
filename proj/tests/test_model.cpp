#include "doctest.h"

#include <cmath>

#include "mummi/error.hpp"
#include "mummi/model.hpp"
#include "mummi/nnls.hpp"
#include "mummi/random.hpp"
#include "support.hpp"

using namespace mummi;
using doctest::Approx;

namespace {

/// Dataset whose every target equals `y` (counters given per sample).
Dataset hand_dataset(const std::vector<std::map<std::string, double>>& counters,
                     const std::vector<double>& freq, const std::vector<double>& y) {
  std::vector<CounterSample> samples;
  for (std::size_t i = 0; i < counters.size(); ++i) {
    CounterSample s;
    s.counters = counters[i];
    s.cpu_freq_ghz = freq[i];
    for (Metric m : kMetrics) s.targets[m] = y[i];
    samples.push_back(s);
  }
  std::vector<std::string> names;
  for (const auto& [k, v] : counters.front()) names.push_back(k);
  return Dataset(samples, names, true, true);
}

}  // namespace

TEST_CASE("nnls recovers a planted nonnegative solution") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng.below(50));
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng.below(8));
    Eigen::MatrixXd a(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < p; ++j) a(i, j) = rng.uniform();
    Eigen::VectorXd x(p);
    for (Eigen::Index j = 0; j < p; ++j) x(j) = rng.uniform() < 0.3 ? 0.0 : 0.5 + rng.uniform();
    const Eigen::VectorXd b = a * x;
    const auto r = nnls(a, b);
    CHECK(r.converged);
    for (Eigen::Index j = 0; j < p; ++j) CHECK(r.x(j) == Approx(x(j)).epsilon(1e-8).scale(1.0));
    CHECK(nnls_kkt_violation(a, b, r.x) <= 1e-9);
  }
}

TEST_CASE("nnls clamps a negative relationship to zero") {
  Rng rng(3);
  Eigen::MatrixXd a(40, 2);
  Eigen::VectorXd b(40);
  for (Eigen::Index i = 0; i < 40; ++i) {
    a(i, 0) = rng.uniform();
    a(i, 1) = rng.uniform();
    b(i) = 2.0 * a(i, 0) - 1.0 * a(i, 1) + 1.0;
  }
  const auto r = nnls(a, b);
  CHECK(r.x(0) > 0);
  CHECK(r.x(1) == 0.0);
  CHECK(r.dual(1) <= 1e-12);
  CHECK(nnls_kkt_violation(a, b, r.x) <= 1e-9);
  // The unconstrained optimum violates the sign constraint, so KKT flags it.
  Eigen::VectorXd ls = a.colPivHouseholderQr().solve(b);
  CHECK(nnls_kkt_violation(a, b, ls) > 1e-3);
}

TEST_CASE("error rate formula") {
  CHECK(error_rate(110, 100) == Approx(10.0));
  CHECK(error_rate(90, 100) == Approx(-10.0));
  CHECK(error_rate(5, 5) == 0.0);
  CHECK_THROWS_AS(error_rate(1, 0), Error);
}

TEST_CASE("fit recovers planted coefficients and the frequency term") {
  const Dataset d = testing::planted_dataset(144, 0.0, 1);
  const auto m = fit(d, Metric::runtime, {"c1", "c2"});
  CHECK(m.freq_term == FreqTerm::inverse);
  CHECK(m.coefficient("c1") == Approx(10.0).epsilon(1e-9));
  CHECK(m.coefficient("c2") == Approx(10.0).epsilon(1e-9));
  CHECK(m.freq_coefficient == Approx(3.0).epsilon(1e-9));
  CHECK(m.intercept == Approx(5.0).epsilon(1e-9));
  CHECK(m.training_fit.r2 == Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(m.non_unique);

  const auto p = fit(d, Metric::node_power, {"c1", "c3"});
  CHECK(p.freq_term == FreqTerm::cubed);
  CHECK(p.freq_coefficient == Approx(0.3).epsilon(1e-9));
  CHECK(p.intercept == Approx(50.0).epsilon(1e-9));

  for (const auto& s : d.samples())
    CHECK(predict(m, s) == Approx(s.target(Metric::runtime)).epsilon(1e-10));
}

TEST_CASE("fit matches unconstrained least squares when that is already feasible") {
  const Dataset d = testing::planted_dataset(60, 0.05, 2);
  const auto m = fit(d, Metric::runtime, {"c1", "c2"});
  std::vector<std::vector<double>> rows;
  std::vector<double> y;
  for (const auto& s : d.samples()) {
    rows.push_back({s.counter("c1"), s.counter("c2"), 1.0 / s.cpu_freq_ghz});
    y.push_back(s.target(Metric::runtime));
  }
  const auto beta = testing::ols(rows, y);
  // The oracle is only valid when every slope is positive.
  REQUIRE(*std::min_element(beta.begin() + 1, beta.end()) > 0);
  CHECK(m.intercept == Approx(beta[0]).epsilon(1e-8));
  CHECK(m.coefficient("c1") == Approx(beta[1]).epsilon(1e-8));
  CHECK(m.coefficient("c2") == Approx(beta[2]).epsilon(1e-8));
  CHECK(m.freq_coefficient == Approx(beta[3]).epsilon(1e-8));
}

TEST_CASE("fit rejects bad input") {
  const Dataset d = testing::planted_dataset(4, 0.0, 1);
  try {
    fit(d, Metric::runtime, {"c1", "c2", "c3"});
    FAIL("underdetermined fit accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("underdetermined") != std::string::npos);
  }
  CHECK_THROWS_AS(fit(d, Metric::runtime, {"nope"}), Error);
  CHECK_THROWS_AS(fit(d, Metric::runtime, {}), Error);

  const auto m = fit(testing::planted_dataset(20, 0.0, 1), Metric::runtime, {"c1"});
  CounterSample s = d[0];
  s.cpu_freq_ghz = 0;
  CHECK_THROWS_AS(predict(m, s), Error);
}

TEST_CASE("duplicate counters make the fit non-unique") {
  std::vector<std::map<std::string, double>> counters;
  std::vector<double> f, y;
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const double v = rng.uniform();
    counters.push_back({{"a", v}, {"b", v}});
    f.push_back(1.0 + rng.uniform());
    y.push_back(1.0 + 4.0 * v);
  }
  const Dataset d = hand_dataset(counters, f, y);
  const auto m = fit(d, Metric::runtime, {"a", "b"});
  CHECK(m.non_unique);
  CHECK(m.coefficient("a") + m.coefficient("b") == Approx(4.0).epsilon(1e-8));

  // Selection keeps only one of two identical counters.
  const auto sel = select_counters(d, Metric::runtime);
  CHECK(sel == std::vector<std::string>{"a"});
}

TEST_CASE("selection finds the planted counters") {
  const Dataset d = testing::planted_dataset(144, 0.01, 1);
  const auto sel = select_counters_detailed(d, Metric::runtime);
  std::vector<std::string> got = sel.counters;
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::string>{"c1", "c2"});
  CHECK(sel.candidates.size() == 2);
  for (const auto& r : sel.relevance) {
    const bool planted = r.counter == "c1" || r.counter == "c2";
    CHECK((std::abs(r.rho) >= 0.5) == planted);
  }
  // Sorted by |rho| descending.
  const double r0 = std::abs(sel.relevance[0].rho);
  for (const auto& r : sel.relevance) CHECK(std::abs(r.rho) <= r0);

  SelectionParams one;
  one.max_counters = 1;
  CHECK(select_counters(d, Metric::runtime, one).size() == 1);
}

TEST_CASE("selection with a single relevant counter") {
  SynthSpec s = testing::planted_spec(100, 0.0, 5);
  for (auto& [m, p] : s.per_target) p.coefficients = {{"c7", 10.0}};
  const Dataset d = synth_generate(s);
  CHECK(select_counters(d, Metric::cpu_power) == std::vector<std::string>{"c7"});

  SelectionParams strict;
  strict.relevance_threshold = 0.9999;
  for (auto& [m, p] : s.per_target) p.freq_coefficient = 5.0;
  CHECK_THROWS_AS(select_counters(synth_generate(s), Metric::runtime, strict), Error);
}

TEST_CASE("selection requires normalized counters") {
  SynthSpec s = testing::planted_spec(30, 0.0, 5);
  s.with_cycles = true;
  CHECK_THROWS_AS(select_counters(synth_generate(s), Metric::runtime), Error);
  SelectionParams bad;
  bad.relevance_threshold = 1.5;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("ranking shares by mean contribution") {
  FittedModel m;
  m.counters = {"a", "b"};
  m.coefficients = {2.0, 1.0};
  m.freq_coefficient = 1.0;
  // mean(a) = 1, mean(b) = 3: scores 2 and 3.
  const Dataset d = hand_dataset({{{"a", 0.5}, {"b", 2.0}}, {{"a", 1.5}, {"b", 4.0}}}, {2.0, 2.0},
                                 {1.0, 1.0});
  const auto r = rank_model(m, d);
  REQUIRE(r.entries.size() == 2);
  CHECK(r.entries[0].counter == "b");
  CHECK(r.entries[0].share == Approx(0.6));
  CHECK(r.entries[1].share == Approx(0.4));
  CHECK(r.freq_contribution == Approx(0.5));

  m.coefficients = {10.0, 1.0 / 3.0};
  const auto r2 = rank_model(m, d);
  CHECK(r2.entries[0].counter == "a");
  CHECK(r2.entries[0].share == Approx(10.0 / 11.0));
  CHECK(r2.entries[1].share == Approx(1.0 / 11.0));

  m.coefficients = {0.0, 0.0};
  CHECK(rank_model(m, d).all_zero);
}

TEST_CASE("fit_all fits four models and keeps the counter correlation") {
  const Dataset d = testing::planted_dataset(144, 0.01, 1);
  const ModelSet ms = fit_all(d);
  CHECK(ms.models.size() == 4);
  CHECK(ms.n_train == 144);
  CHECK(ms.counter_correlation.names == d.counter_names());
  for (Metric m : kMetrics) {
    CHECK(ms.at(m).training_fit.r2 > 0.999);
    CHECK(ms.at(m).counters.size() == 2);
  }
  const auto ranking = rank_counters(ms, d);
  for (const auto& r : ranking.models) {
    double sum = 0;
    for (const auto& e : r.entries) sum += e.share;
    CHECK(sum == Approx(1.0));
  }
}
