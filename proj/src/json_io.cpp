#include "mummi/json_io.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "mummi/error.hpp"

namespace mummi {

namespace {

constexpr const char* kModelSetFormat = "mummi.modelset";
constexpr const char* kReportFormat = "mummi.report";
constexpr const char* kWhatIfFormat = "mummi.whatif";

// NaN and infinities serialize as null.
double number_or_nan(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

Metric metric_from(const json& j) {
  const auto name = j.get<std::string>();
  auto m = parse_metric(name);
  if (!m) throw Error(ErrorKind::name, "unknown metric: " + name);
  return *m;
}

FreqTerm freq_term_from(const json& j) {
  const auto name = j.get<std::string>();
  auto t = parse_freq_term(name);
  if (!t) throw Error(ErrorKind::name, "unknown freq_term: " + name + " (inverse|cubed)");
  return *t;
}

void check_format(const json& j, const char* format, int version) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != format)
    throw Error(ErrorKind::input, std::string("expected a ") + format + " document");
  const int v = j.at("version").get<int>();
  if (v != version)
    throw Error(ErrorKind::input, std::string(format) + " version " + std::to_string(v) +
                                      " is not supported (expected " + std::to_string(version) +
                                      ")");
}

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::input, std::string("malformed JSON document: ") + e.what());
  }
}

}  // namespace

void to_json(json& j, const SelectionParams& p) {
  j = json{{"relevance_threshold", p.relevance_threshold},
           {"variance_target", p.variance_target},
           {"max_counters", p.max_counters}};
}

void from_json(const json& j, SelectionParams& p) {
  p = SelectionParams{};
  p.relevance_threshold = j.value("relevance_threshold", p.relevance_threshold);
  p.variance_target = j.value("variance_target", p.variance_target);
  p.max_counters = j.value("max_counters", p.max_counters);
  validate(p);
}

void to_json(json& j, const FittedModel& m) {
  json counters = json::array();
  for (std::size_t i = 0; i < m.counters.size(); ++i)
    counters.push_back({{"counter", m.counters[i]}, {"coefficient", m.coefficients[i]}});
  j = json{{"target", metric_name(m.target)},
           {"counters", counters},
           {"intercept", m.intercept},
           {"freq_term", freq_term_name(m.freq_term)},
           {"freq_coefficient", m.freq_coefficient},
           {"training_fit", {{"r2", m.training_fit.r2}, {"rmse", m.training_fit.rmse}}},
           {"non_unique", m.non_unique}};
}

void from_json(const json& j, FittedModel& m) {
  m = FittedModel{};
  m.target = metric_from(j.at("target"));
  for (const auto& c : j.at("counters")) {
    m.counters.push_back(c.at("counter").get<std::string>());
    const double coef = c.at("coefficient").get<double>();
    if (coef < 0.0) throw Error(ErrorKind::input, "negative coefficient for " + m.counters.back());
    m.coefficients.push_back(coef);
  }
  m.intercept = j.at("intercept").get<double>();
  m.freq_term = freq_term_from(j.at("freq_term"));
  m.freq_coefficient = j.at("freq_coefficient").get<double>();
  if (m.freq_coefficient < 0.0) throw Error(ErrorKind::input, "negative freq_coefficient");
  m.training_fit.r2 = number_or_nan(j.at("training_fit").at("r2"));
  m.training_fit.rmse = number_or_nan(j.at("training_fit").at("rmse"));
  m.non_unique = j.value("non_unique", false);
}

void to_json(json& j, const Selection& s) {
  json rel = json::array();
  for (const auto& r : s.relevance)
    rel.push_back({{"counter", r.counter}, {"rho", r.rho}, {"defined", r.defined}});
  j = json{{"target", metric_name(s.target)},
           {"counters", s.counters},
           {"relevance", rel},
           {"candidates", s.candidates},
           {"explained_variance_ratio", s.explained_variance_ratio},
           {"n_retained", s.n_retained},
           {"warnings", s.warnings}};
}

void from_json(const json& j, Selection& s) {
  s = Selection{};
  s.target = metric_from(j.at("target"));
  s.counters = j.at("counters").get<std::vector<std::string>>();
  for (const auto& r : j.at("relevance"))
    s.relevance.push_back({r.at("counter").get<std::string>(), r.at("rho").get<double>(),
                           r.at("defined").get<bool>()});
  s.candidates = j.at("candidates").get<std::vector<std::string>>();
  s.explained_variance_ratio = j.at("explained_variance_ratio").get<std::vector<double>>();
  s.n_retained = j.at("n_retained").get<std::size_t>();
  s.warnings = j.value("warnings", std::vector<std::string>{});
}

namespace stats {

void to_json(json& j, const CorrelationMatrix& m) {
  json rho = json::array();
  json undefined = json::array();
  for (Eigen::Index i = 0; i < m.rho.rows(); ++i) {
    json row = json::array();
    json urow = json::array();
    for (Eigen::Index k = 0; k < m.rho.cols(); ++k) {
      row.push_back(m.rho(i, k));
      urow.push_back(m.undefined.size() ? m.undefined(i, k) : false);
    }
    rho.push_back(row);
    undefined.push_back(urow);
  }
  j = json{{"names", m.names}, {"rho", rho}, {"undefined", undefined}};
}

void from_json(const json& j, CorrelationMatrix& m) {
  m = CorrelationMatrix{};
  m.names = j.at("names").get<std::vector<std::string>>();
  const auto p = static_cast<Eigen::Index>(m.names.size());
  const auto& rho = j.at("rho");
  if (rho.size() != m.names.size())
    throw Error(ErrorKind::dimension, "correlation matrix size does not match names");
  m.rho.resize(p, p);
  m.undefined = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(p, p, false);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& row = rho.at(static_cast<std::size_t>(i));
    if (row.size() != m.names.size())
      throw Error(ErrorKind::dimension, "correlation matrix row has the wrong length");
    for (Eigen::Index k = 0; k < p; ++k) m.rho(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  if (j.contains("undefined"))
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index k = 0; k < p; ++k)
        m.undefined(i, k) = j.at("undefined").at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(k)).get<bool>();
}

void to_json(json& j, const Quartiles& q) {
  j = json{{"q1", q.q1}, {"median", q.median}, {"q3", q.q3}};
}

void from_json(const json& j, Quartiles& q) {
  q.q1 = j.at("q1").get<double>();
  q.median = j.at("median").get<double>();
  q.q3 = j.at("q3").get<double>();
}

void to_json(json& j, const DensityCurve& c) {
  j = json{{"bandwidth", c.bandwidth}, {"min", c.min},           {"max", c.max},
           {"quartiles", c.quartiles}, {"grid", c.grid},         {"density", c.density}};
}

void from_json(const json& j, DensityCurve& c) {
  c.bandwidth = j.at("bandwidth").get<double>();
  c.min = j.at("min").get<double>();
  c.max = j.at("max").get<double>();
  c.quartiles = j.at("quartiles").get<Quartiles>();
  c.grid = j.at("grid").get<std::vector<double>>();
  c.density = j.at("density").get<std::vector<double>>();
}

}  // namespace stats

void to_json(json& j, const ModelSet& ms) {
  json models = json::array();
  json selection = json::array();
  for (const auto& [metric, model] : ms.models) models.push_back(model);
  for (const auto& [metric, sel] : ms.selections) selection.push_back(sel);
  j = json{{"format", kModelSetFormat},
           {"version", kModelSetVersion},
           {"params", ms.params},
           {"n_train", ms.n_train},
           {"models", models},
           {"selection", selection},
           {"counter_correlation", ms.counter_correlation}};
}

void from_json(const json& j, ModelSet& ms) {
  check_format(j, kModelSetFormat, kModelSetVersion);
  ms = ModelSet{};
  ms.params = j.at("params").get<SelectionParams>();
  ms.n_train = j.at("n_train").get<std::size_t>();
  for (const auto& m : j.at("models")) {
    auto model = m.get<FittedModel>();
    const Metric metric = model.target;
    if (!ms.models.emplace(metric, std::move(model)).second)
      throw Error(ErrorKind::input, "duplicate model for " + std::string(metric_name(metric)));
  }
  for (const auto& s : j.value("selection", json::array())) {
    auto sel = s.get<Selection>();
    const Metric metric = sel.target;
    ms.selections.emplace(metric, std::move(sel));
  }
  ms.counter_correlation = j.at("counter_correlation").get<stats::CorrelationMatrix>();
}

void to_json(json& j, const ModelRanking& r) {
  json entries = json::array();
  for (const auto& e : r.entries)
    entries.push_back({{"counter", e.counter}, {"score", e.score}, {"share", e.share}});
  j = json{{"target", metric_name(r.target)},
           {"entries", entries},
           {"freq_contribution", r.freq_contribution},
           {"all_zero", r.all_zero},
           {"score", "coefficient x mean normalized counter (contribution share)"}};
}

void from_json(const json& j, ModelRanking& r) {
  r = ModelRanking{};
  r.target = metric_from(j.at("target"));
  for (const auto& e : j.at("entries"))
    r.entries.push_back({e.at("counter").get<std::string>(), e.at("score").get<double>(),
                         e.at("share").get<double>()});
  r.freq_contribution = j.at("freq_contribution").get<double>();
  r.all_zero = j.at("all_zero").get<bool>();
}

void to_json(json& j, const WhatIfOutcome& o) {
  json deltas = json::object();
  for (const auto& [name, d] : o.deltas) deltas[name] = d;
  json metrics = json::array();
  for (const auto& m : o.metrics) {
    json row{{"metric", metric_name(m.metric)},
             {"baseline_prediction", m.baseline_prediction},
             {"perturbed_prediction", m.perturbed_prediction}};
    row["improvement_percent"] =
        m.improvement_percent ? json(*m.improvement_percent) : json(nullptr);
    metrics.push_back(std::move(row));
  }
  j = json{{"format", kWhatIfFormat},
           {"version", kWhatIfVersion},
           {"pivot_counter", o.pivot_counter},
           {"delta_percent", o.delta_percent},
           {"propagation_tau", o.propagation_tau},
           {"n_baseline", o.n_baseline},
           {"deltas", deltas},
           {"metrics", metrics},
           {"warnings", o.warnings}};
}

void from_json(const json& j, WhatIfOutcome& o) {
  check_format(j, kWhatIfFormat, kWhatIfVersion);
  o = WhatIfOutcome{};
  o.pivot_counter = j.at("pivot_counter").get<std::string>();
  o.delta_percent = j.at("delta_percent").get<double>();
  o.propagation_tau = j.at("propagation_tau").get<double>();
  o.n_baseline = j.at("n_baseline").get<std::size_t>();
  for (const auto& [name, d] : j.at("deltas").items()) o.deltas[name] = d.get<double>();
  for (const auto& m : j.at("metrics")) {
    MetricOutcome mo;
    mo.metric = metric_from(m.at("metric"));
    mo.baseline_prediction = m.at("baseline_prediction").get<double>();
    mo.perturbed_prediction = m.at("perturbed_prediction").get<double>();
    if (!m.at("improvement_percent").is_null())
      mo.improvement_percent = m.at("improvement_percent").get<double>();
    o.metrics.push_back(mo);
  }
  o.warnings = j.value("warnings", std::vector<std::string>{});
}

void to_json(json& j, const PlantedModel& p) {
  j = json{{"coefficients", p.coefficients},
           {"intercept", p.intercept},
           {"freq_coefficient", p.freq_coefficient}};
  if (p.freq_term) j["freq_term"] = freq_term_name(*p.freq_term);
}

void from_json(const json& j, PlantedModel& p) {
  p = PlantedModel{};
  p.coefficients = j.value("coefficients", std::map<std::string, double>{});
  p.intercept = j.value("intercept", 0.0);
  p.freq_coefficient = j.value("freq_coefficient", 0.0);
  if (j.contains("freq_term")) p.freq_term = freq_term_from(j.at("freq_term"));
}

void to_json(json& j, const SynthSpec& s) {
  json per_target = json::object();
  for (const auto& [metric, model] : s.per_target) per_target[std::string(metric_name(metric))] = model;
  j = json{{"n_samples", s.n_samples},     {"n_counters", s.n_counters},
           {"counter_names", s.counter_names}, {"model", s.model},
           {"per_target", per_target},     {"noise_sigma", s.noise_sigma},
           {"seed", s.seed},               {"frequencies", s.frequencies},
           {"with_cycles", s.with_cycles}, {"app_name", s.app_name},
           {"system_name", s.system_name}};
}

void from_json(const json& j, SynthSpec& s) {
  s = SynthSpec{};
  s.n_samples = j.value("n_samples", s.n_samples);
  s.n_counters = j.value("n_counters", s.n_counters);
  s.counter_names = j.value("counter_names", s.counter_names);
  if (j.contains("model")) {
    s.model = j.at("model").get<PlantedModel>();
  } else {
    // Flat form: true_coefficients, intercept, freq_coefficient, freq_term.
    s.model.coefficients = j.value("true_coefficients", std::map<std::string, double>{});
    s.model.intercept = j.value("intercept", 0.0);
    s.model.freq_coefficient = j.value("freq_coefficient", 0.0);
    if (j.contains("freq_term")) s.model.freq_term = freq_term_from(j.at("freq_term"));
  }
  if (j.contains("per_target"))
    for (const auto& [name, model] : j.at("per_target").items()) {
      auto m = parse_metric(name);
      if (!m) throw Error(ErrorKind::name, "unknown metric in per_target: " + name);
      s.per_target[*m] = model.get<PlantedModel>();
    }
  s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
  s.seed = j.value("seed", s.seed);
  s.frequencies = j.value("frequencies", s.frequencies);
  s.with_cycles = j.value("with_cycles", s.with_cycles);
  s.app_name = j.value("app_name", s.app_name);
  s.system_name = j.value("system_name", s.system_name);
}

void to_json(json& j, const CounterSample& s) {
  json targets = json::object();
  for (const auto& [m, v] : s.targets) targets[std::string(metric_name(m))] = v;
  j = json{{"app", s.app_name},           {"system", s.system_name},
           {"cores", s.num_cores},        {"cpu_freq_ghz", s.cpu_freq_ghz},
           {"config", s.config_params},   {"counters", s.counters},
           {"targets", targets}};
}

void from_json(const json& j, CounterSample& s) {
  s = CounterSample{};
  s.app_name = j.value("app", std::string{});
  s.system_name = j.value("system", std::string{});
  s.num_cores = j.value("cores", 1);
  s.cpu_freq_ghz = j.at("cpu_freq_ghz").get<double>();
  s.config_params = j.value("config", std::map<std::string, double>{});
  s.counters = j.at("counters").get<std::map<std::string, double>>();
  if (j.contains("targets"))
    for (const auto& [name, v] : j.at("targets").items()) {
      auto m = parse_metric(name);
      if (!m) throw Error(ErrorKind::name, "unknown target: " + name);
      s.targets[*m] = v.get<double>();
    }
}

namespace baselines {

void to_json(json& j, const Hyperparams& hp) {
  j = json{{"method", method_name(method_of(hp))}};
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RidgeParams>) {
          j["lambda"] = p.lambda;
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          j["k"] = p.k;
        } else if constexpr (std::is_same_v<T, CartParams>) {
          j["max_depth"] = p.max_depth;
          j["min_leaf"] = p.min_leaf;
        } else if constexpr (std::is_same_v<T, ForestParams>) {
          j["n_trees"] = p.n_trees;
          j["max_features"] = p.max_features;
          j["min_leaf"] = p.min_leaf;
          j["max_depth"] = p.max_depth;
          j["seed"] = p.seed;
          j["bootstrap"] = p.bootstrap;
        } else if constexpr (std::is_same_v<T, BoostingParams>) {
          j["n_rounds"] = p.n_rounds;
          j["shrinkage"] = p.shrinkage;
          j["subsample"] = p.subsample;
          j["max_depth"] = p.max_depth;
          j["min_leaf"] = p.min_leaf;
          j["seed"] = p.seed;
        } else {
          j["length_scale"] = p.length_scale;
          j["noise_lambda"] = p.noise_lambda;
        }
      },
      hp);
}

void from_json(const json& j, Hyperparams& hp) {
  const auto name = j.at("method").get<std::string>();
  const auto method = parse_method(name);
  if (!method) throw Error(ErrorKind::name, "unknown method: " + name);
  switch (*method) {
    case Method::ridge: {
      RidgeParams p;
      p.lambda = j.value("lambda", p.lambda);
      hp = p;
      break;
    }
    case Method::knn: {
      KnnParams p;
      p.k = j.value("k", p.k);
      hp = p;
      break;
    }
    case Method::cart: {
      CartParams p;
      p.max_depth = j.value("max_depth", p.max_depth);
      p.min_leaf = j.value("min_leaf", p.min_leaf);
      hp = p;
      break;
    }
    case Method::random_forest: {
      ForestParams p;
      p.n_trees = j.value("n_trees", p.n_trees);
      p.max_features = j.value("max_features", p.max_features);
      p.min_leaf = j.value("min_leaf", p.min_leaf);
      p.max_depth = j.value("max_depth", p.max_depth);
      p.seed = j.value("seed", p.seed);
      p.bootstrap = j.value("bootstrap", p.bootstrap);
      hp = p;
      break;
    }
    case Method::gradient_boosting: {
      BoostingParams p;
      p.n_rounds = j.value("n_rounds", p.n_rounds);
      p.shrinkage = j.value("shrinkage", p.shrinkage);
      p.subsample = j.value("subsample", p.subsample);
      p.max_depth = j.value("max_depth", p.max_depth);
      p.min_leaf = j.value("min_leaf", p.min_leaf);
      p.seed = j.value("seed", p.seed);
      hp = p;
      break;
    }
    case Method::gp_rbf: {
      GpParams p;
      p.length_scale = j.value("length_scale", p.length_scale);
      p.noise_lambda = j.value("noise_lambda", p.noise_lambda);
      hp = p;
      break;
    }
  }
  validate(hp);
}

void to_json(json& j, const ImportanceReport& r) {
  json scores = json::array();
  for (const auto& [f, s] : r.scores) scores.push_back({{"feature", f}, {"score", s}});
  j = json{{"semantics", r.semantics}, {"scores", scores}};
}

void from_json(const json& j, ImportanceReport& r) {
  r = ImportanceReport{};
  r.semantics = j.at("semantics").get<std::string>();
  for (const auto& s : j.at("scores"))
    r.scores.emplace_back(s.at("feature").get<std::string>(), s.at("score").get<double>());
}

}  // namespace baselines

namespace harness {

void to_json(json& j, const ComparisonReport& r) {
  json targets = json::array();
  for (Metric m : r.targets) targets.push_back(metric_name(m));
  json cells = json::array();
  for (const auto& c : r.cells) {
    json cell{{"method", c.method}, {"target", metric_name(c.target)}, {"ok", c.ok}};
    if (!c.ok) {
      cell["error"] = c.error;
    } else {
      cell["hyperparams"] = c.hyperparams;
      cell["predictions"] = c.predictions;
      cell["baselines"] = c.baselines;
      cell["error_rates"] = c.error_rates;
      cell["mean"] = c.mean;
      cell["min"] = c.min;
      cell["max"] = c.max;
      cell["quartiles"] = c.quartiles;
      cell["density"] = c.density ? json(*c.density) : json(nullptr);
      if (!c.density_note.empty()) cell["density_note"] = c.density_note;
    }
    cells.push_back(std::move(cell));
  }
  json importance = json::array();
  for (const auto& e : r.importance)
    importance.push_back(
        {{"method", e.method}, {"target", metric_name(e.target)}, {"report", e.report}});
  j = json{{"format", kReportFormat},
           {"version", kReportVersion},
           {"dataset_id", r.dataset_id},
           {"split",
            {{"test_fraction", r.split.test_fraction},
             {"seed", r.split.seed},
             {"train_indices", r.train_indices},
             {"test_indices", r.test_indices}}},
           {"methods", r.methods},
           {"targets", targets},
           {"cells", cells},
           {"rankings", r.rankings},
           {"importance", importance}};
}

void from_json(const json& j, ComparisonReport& r) {
  check_format(j, kReportFormat, kReportVersion);
  r = ComparisonReport{};
  r.dataset_id = j.at("dataset_id").get<std::string>();
  const auto& sp = j.at("split");
  r.split.test_fraction = sp.at("test_fraction").get<double>();
  r.split.seed = sp.at("seed").get<std::uint64_t>();
  r.train_indices = sp.at("train_indices").get<std::vector<std::size_t>>();
  r.test_indices = sp.at("test_indices").get<std::vector<std::size_t>>();
  r.methods = j.at("methods").get<std::vector<std::string>>();
  for (const auto& t : j.at("targets")) r.targets.push_back(metric_from(t));
  for (const auto& c : j.at("cells")) {
    CellResult cell;
    cell.method = c.at("method").get<std::string>();
    cell.target = metric_from(c.at("target"));
    cell.ok = c.at("ok").get<bool>();
    if (!cell.ok) {
      cell.error = c.value("error", std::string{});
    } else {
      cell.hyperparams = c.at("hyperparams");
      cell.predictions = c.at("predictions").get<std::vector<double>>();
      cell.baselines = c.at("baselines").get<std::vector<double>>();
      cell.error_rates = c.at("error_rates").get<std::vector<double>>();
      cell.mean = c.at("mean").get<double>();
      cell.min = c.at("min").get<double>();
      cell.max = c.at("max").get<double>();
      cell.quartiles = c.at("quartiles").get<stats::Quartiles>();
      if (!c.at("density").is_null()) cell.density = c.at("density").get<stats::DensityCurve>();
      cell.density_note = c.value("density_note", std::string{});
    }
    r.cells.push_back(std::move(cell));
  }
  r.rankings = j.at("rankings").get<std::vector<ModelRanking>>();
  for (const auto& e : j.at("importance"))
    r.importance.push_back({e.at("method").get<std::string>(), metric_from(e.at("target")),
                            e.at("report").get<baselines::ImportanceReport>()});
}

}  // namespace harness

ModelSet model_set_from_json(const json& j) {
  return guarded([&] { return j.get<ModelSet>(); });
}

harness::ComparisonReport report_from_json(const json& j) {
  return guarded([&] { return j.get<harness::ComparisonReport>(); });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": invalid JSON: " + e.what());
  }
}

std::string dump_document(const json& j) { return j.dump(2) + "\n"; }

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << dump_document(j);
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

}  // namespace mummi
