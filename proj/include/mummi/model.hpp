#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mummi/dataset.hpp"
#include "mummi/stats.hpp"

namespace mummi {

/// Thresholds for picking a model's major counters. The defaults land in
/// the 9-13 counters-per-system range seen on real machines.
struct SelectionParams {
  double relevance_threshold = 0.5;  // min |spearman(counter, target)|
  double variance_target = 0.9;      // PCA retained-variance fraction
  std::size_t max_counters = 12;

  friend bool operator==(const SelectionParams&, const SelectionParams&) = default;
};

void validate(const SelectionParams& p);

struct CounterRelevance {
  std::string counter;
  double rho = 0.0;
  bool defined = true;  // false when the counter was constant
};

/// How select_counters reached its answer.
struct Selection {
  Metric target = Metric::runtime;
  std::vector<std::string> counters;
  /// Spearman rho of every counter against the target.
  std::vector<CounterRelevance> relevance;
  /// Counters that passed the relevance filter and entered the PCA.
  std::vector<std::string> candidates;
  std::vector<double> explained_variance_ratio;
  std::size_t n_retained = 0;
  std::vector<std::string> warnings;
};

/// Relevance filter, then PCA de-duplication, then truncation by |rho|.
Selection select_counters_detailed(const Dataset& train, Metric target,
                                   const SelectionParams& params = {});

std::vector<std::string> select_counters(const Dataset& train, Metric target,
                                         const SelectionParams& params = {});

struct TrainingFit {
  double r2 = 0.0;
  double rmse = 0.0;
};

/// target = intercept + sum coefficients[i] * counter_i + freq_coefficient * g(f)
/// with g(f) = 1/f (inverse) or f^3 (cubed).
struct FittedModel {
  Metric target = Metric::runtime;
  std::vector<std::string> counters;
  std::vector<double> coefficients;  // >= 0, aligned with counters
  double intercept = 0.0;
  double freq_coefficient = 0.0;     // >= 0
  FreqTerm freq_term = FreqTerm::inverse;
  TrainingFit training_fit;
  /// The design was rank deficient, so other optima exist.
  bool non_unique = false;

  double coefficient(std::string_view counter) const;
};

/// Least squares with nonnegative counter and frequency coefficients and a
/// free intercept.
FittedModel fit(const Dataset& train, Metric target,
                const std::vector<std::string>& counters, FreqTerm freq_term);

/// Same, using the frequency term conventional for the metric.
FittedModel fit(const Dataset& train, Metric target,
                const std::vector<std::string>& counters);

double predict(const FittedModel& m, const CounterSample& sample);

/// The four metric models plus the artifacts used to select their counters.
struct ModelSet {
  std::map<Metric, FittedModel> models;
  std::map<Metric, Selection> selections;
  /// Spearman correlation among all training counters; drives what-if
  /// propagation.
  stats::CorrelationMatrix counter_correlation;
  SelectionParams params;
  std::size_t n_train = 0;

  const FittedModel& at(Metric m) const;
};

ModelSet fit_all(const Dataset& train, const SelectionParams& params = {});

/// (prediction - baseline) / baseline * 100. Negative means under-prediction.
double error_rate(double prediction, double baseline);

struct RankingEntry {
  std::string counter;
  double score = 0.0;  // coefficient * mean counter value over training data
  double share = 0.0;
};

struct ModelRanking {
  Metric target = Metric::runtime;
  std::vector<RankingEntry> entries;  // nonincreasing score
  /// freq_coefficient * mean g(f); reported apart from the shares.
  double freq_contribution = 0.0;
  /// Every counter scored zero, so no shares could be formed.
  bool all_zero = false;
};

/// Mean additive contribution of each selected counter, as a share of the
/// model's total counter contribution.
struct CounterRanking {
  std::vector<ModelRanking> models;
};

CounterRanking rank_counters(const ModelSet& ms, const Dataset& train);
ModelRanking rank_model(const FittedModel& m, const Dataset& train);

}  // namespace mummi
