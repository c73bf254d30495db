#include "mummi/whatif.hpp"

#include <algorithm>
#include <cmath>

#include "mummi/error.hpp"

namespace mummi {

const MetricOutcome& WhatIfOutcome::at(Metric m) const {
  for (const auto& o : metrics)
    if (o.metric == m) return o;
  throw Error(ErrorKind::name, "outcome has no " + std::string(metric_name(m)));
}

std::map<std::string, double> propagate(const WhatIfScenario& scenario,
                                        const stats::CorrelationMatrix& corr) {
  if (!(scenario.propagation_tau > 0.0 && scenario.propagation_tau <= 1.0))
    throw Error(ErrorKind::validation, "propagation tau must lie in (0, 1]");
  if (!(scenario.delta_percent > -100.0) || !std::isfinite(scenario.delta_percent))
    throw Error(ErrorKind::validation, "delta_percent must be greater than -100");
  const auto pivot = static_cast<Eigen::Index>(corr.index_of(scenario.pivot_counter));

  std::map<std::string, double> deltas;
  for (std::size_t j = 0; j < corr.names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (jj == pivot) {
      deltas[corr.names[j]] = scenario.delta_percent;
      continue;
    }
    const double rho = corr.rho(pivot, jj);
    deltas[corr.names[j]] =
        std::abs(rho) >= scenario.propagation_tau ? scenario.delta_percent * rho : 0.0;
  }
  return deltas;
}

CounterSample apply_deltas(const CounterSample& sample,
                           const std::map<std::string, double>& deltas) {
  CounterSample out = sample;
  for (const auto& [name, delta] : deltas) {
    auto it = out.counters.find(name);
    if (it == out.counters.end() || delta == 0.0) continue;
    it->second = std::max(0.0, it->second * (1.0 + delta / 100.0));
  }
  return out;
}

WhatIfOutcome evaluate(const ModelSet& ms, const WhatIfScenario& scenario,
                       const stats::CorrelationMatrix& corr) {
  if (scenario.baseline.empty())
    throw Error(ErrorKind::input, "what-if needs at least one baseline sample");

  WhatIfOutcome out;
  out.pivot_counter = scenario.pivot_counter;
  out.delta_percent = scenario.delta_percent;
  out.propagation_tau = scenario.propagation_tau;
  out.n_baseline = scenario.baseline.size();
  out.deltas = propagate(scenario, corr);

  std::vector<CounterSample> perturbed;
  perturbed.reserve(scenario.baseline.size());
  for (const auto& s : scenario.baseline) perturbed.push_back(apply_deltas(s, out.deltas));

  const double n = static_cast<double>(scenario.baseline.size());
  for (const auto& [metric, model] : ms.models) {
    MetricOutcome o;
    o.metric = metric;
    double base = 0.0, pert = 0.0;
    for (std::size_t i = 0; i < perturbed.size(); ++i) {
      base += predict(model, scenario.baseline[i]);
      pert += predict(model, perturbed[i]);
    }
    o.baseline_prediction = base / n;
    o.perturbed_prediction = pert / n;
    if (o.baseline_prediction > 0.0) {
      o.improvement_percent =
          (o.baseline_prediction - o.perturbed_prediction) / o.baseline_prediction * 100.0;
    } else {
      out.warnings.push_back(std::string(metric_name(metric)) +
                             ": baseline prediction is not positive; improvement undefined");
    }
    out.metrics.push_back(o);
  }
  return out;
}

WhatIfOutcome evaluate(const ModelSet& ms, const WhatIfScenario& scenario) {
  return evaluate(ms, scenario, ms.counter_correlation);
}

}  // namespace mummi
