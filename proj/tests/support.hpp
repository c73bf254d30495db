#pragma once

// Fixtures and reference implementations shared by the test binaries. The
// reference code is deliberately naive and does not call into the library
// under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mummi/dataset.hpp"

namespace testing {

/// Four planted linear models over independent uniform counters. Each
/// metric depends on two counters with equal weights, so both clear the
/// 0.5 Spearman threshold with room to spare (|rho| near 0.7).
inline mummi::SynthSpec planted_spec(std::size_t n, double sigma, std::uint64_t seed) {
  using mummi::Metric;
  using mummi::FreqTerm;
  mummi::SynthSpec s;
  s.n_samples = n;
  s.n_counters = 8;
  s.noise_sigma = sigma;
  s.seed = seed;
  s.per_target[Metric::runtime] = {{{"c1", 10.0}, {"c2", 10.0}}, 5.0, 3.0, FreqTerm::inverse};
  s.per_target[Metric::node_power] = {{{"c1", 10.0}, {"c3", 10.0}}, 50.0, 0.3, FreqTerm::cubed};
  s.per_target[Metric::cpu_power] = {{{"c2", 10.0}, {"c4", 10.0}}, 30.0, 0.3, FreqTerm::cubed};
  s.per_target[Metric::mem_power] = {{{"c3", 10.0}, {"c5", 10.0}}, 20.0, 0.1, FreqTerm::cubed};
  return s;
}

inline mummi::Dataset planted_dataset(std::size_t n, double sigma, std::uint64_t seed) {
  return mummi::synth_generate(planted_spec(n, sigma, seed));
}

/// Rank of x[i]: one plus the number of smaller values plus half the number
/// of other equal values. Quadratic, but obviously right.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1;
      else if (x[j] == x[i] && j != i) equal += 1;
    }
    r[i] = 1.0 + less + equal / 2.0;
  }
  return r;
}

inline double brute_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return brute_pearson(brute_ranks(x), brute_ranks(y));
}

/// Solves a * x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Ordinary least squares with an intercept through the normal equations.
/// Returns {intercept, beta_1, ..., beta_p}.
inline std::vector<double> ols(const std::vector<std::vector<double>>& rows,
                               const std::vector<double>& y) {
  const std::size_t p = rows.front().size() + 1;
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<double> z{1.0};
    z.insert(z.end(), rows[i].begin(), rows[i].end());
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += z[a] * y[i];
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += z[a] * z[b];
    }
  }
  return gauss_solve(xtx, xty);
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("mummi-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace testing
