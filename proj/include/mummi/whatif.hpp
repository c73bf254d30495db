#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mummi/dataset.hpp"
#include "mummi/model.hpp"
#include "mummi/stats.hpp"

namespace mummi {

/// A hypothetical change to one counter, e.g. delta_percent = -30 for
/// "reduce L2_DCM by 30%".
struct WhatIfScenario {
  std::string pivot_counter;
  double delta_percent = 0.0;  // > -100
  double propagation_tau = 0.7;
  /// Samples the models are evaluated on (normalized counters).
  std::vector<CounterSample> baseline;
};

struct MetricOutcome {
  Metric metric = Metric::runtime;
  double baseline_prediction = 0.0;
  double perturbed_prediction = 0.0;
  /// (baseline - perturbed) / baseline * 100; unset when the baseline
  /// prediction is not positive.
  std::optional<double> improvement_percent;
};

struct WhatIfOutcome {
  std::string pivot_counter;
  double delta_percent = 0.0;
  double propagation_tau = 0.0;
  std::size_t n_baseline = 0;
  /// Applied delta (percent) for every counter in the correlation space.
  std::map<std::string, double> deltas;
  std::vector<MetricOutcome> metrics;
  std::vector<std::string> warnings;

  const MetricOutcome& at(Metric m) const;
};

/// delta(pivot) = delta_percent; delta(j) = delta_percent * rho(pivot, j)
/// when |rho(pivot, j)| >= tau; 0 otherwise.
std::map<std::string, double> propagate(const WhatIfScenario& scenario,
                                        const stats::CorrelationMatrix& corr);

/// counter' = counter * (1 + delta / 100), clamped at 0. Counters without a
/// delta are left alone; frequency is never touched.
CounterSample apply_deltas(const CounterSample& sample,
                           const std::map<std::string, double>& deltas);

WhatIfOutcome evaluate(const ModelSet& ms, const WhatIfScenario& scenario,
                       const stats::CorrelationMatrix& corr);

/// Uses the model set's own training correlation matrix.
WhatIfOutcome evaluate(const ModelSet& ms, const WhatIfScenario& scenario);

}  // namespace mummi
