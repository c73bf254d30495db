#include "mummi/cli.hpp"

#include <fmt/format.h>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "mummi/error.hpp"
#include "mummi/harness.hpp"
#include "mummi/json_io.hpp"
#include "mummi/service.hpp"
#include "mummi/whatif.hpp"

namespace mummi::cli {

namespace {

std::string fmt_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + p.string());
}

struct FitArgs {
  std::string data, out;
  SelectionParams params;
  std::uint64_t seed = SplitSpec{}.seed;
  double holdout = 0.0;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  validate(a.params);
  const Dataset data = ensure_normalized(load_csv(a.data));
  Dataset train = data;
  std::optional<Dataset> test;
  if (a.holdout > 0.0) {
    auto parts = split(data, {a.holdout, a.seed});
    train = std::move(parts.train);
    test = std::move(parts.test);
  }
  const ModelSet ms = fit_all(train, a.params);
  write_json_file(json(ms), a.out);

  out << fmt::format("fitted {} models on {} samples\n", ms.models.size(), train.size());
  for (const auto& [metric, model] : ms.models) {
    std::string counters;
    for (const auto& c : model.counters) counters += (counters.empty() ? "" : ", ") + c;
    out << fmt::format("{:<13} r2={:.6f} rmse={:.6g} counters: {}\n", metric_name(metric),
                       model.training_fit.r2, model.training_fit.rmse, counters);
    if (test) {
      double sum = 0.0;
      for (const auto& s : test->samples()) sum += std::abs(error_rate(predict(model, s), s.target(metric)));
      out << fmt::format("{:<13} holdout mean |error| = {:.4f}%\n", "",
                         sum / static_cast<double>(test->size()));
    }
  }
  return 0;
}

struct PredictArgs {
  std::string model, data, out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const ModelSet ms = model_set_from_json(read_json_file(a.model));
  const Dataset data = ensure_normalized(load_csv(a.data, {{}, false}));
  if (data.empty()) throw Error(ErrorKind::empty, a.data + ": no samples");
  for (const auto& [metric, model] : ms.models)
    for (const auto& c : model.counters)
      if (!data.has_counter(c))
        throw Error(ErrorKind::schema, a.data + ": missing counter '" + c + "' required by the " +
                                           std::string(metric_name(metric)) + " model");

  std::ostringstream csv;
  csv << "row";
  for (const auto& [metric, model] : ms.models) csv << ',' << metric_name(metric) << "_pred";
  if (data.has_targets())
    for (const auto& [metric, model] : ms.models) csv << ',' << metric_name(metric) << "_error_pct";
  csv << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    csv << i;
    std::vector<double> preds;
    for (const auto& [metric, model] : ms.models) {
      preds.push_back(predict(model, data[i]));
      csv << ',' << fmt_number(preds.back());
    }
    if (data.has_targets()) {
      std::size_t k = 0;
      for (const auto& [metric, model] : ms.models)
        csv << ',' << fmt_number(error_rate(preds[k++], data[i].target(metric)));
    }
    csv << '\n';
  }
  write_text(a.out, csv.str());
  out << fmt::format("wrote {} predictions to {}\n", data.size(), a.out);
  return 0;
}

struct WhatIfArgs {
  std::string model, data, counter, out = "whatif.json";
  double delta = 0.0;
  double tau = WhatIfScenario{}.propagation_tau;
};

int cmd_whatif(const WhatIfArgs& a, std::ostream& out) {
  const ModelSet ms = model_set_from_json(read_json_file(a.model));
  const Dataset data = ensure_normalized(load_csv(a.data, {{}, false}));
  const auto& names = ms.counter_correlation.names;
  if (std::find(names.begin(), names.end(), a.counter) == names.end())
    throw Error(ErrorKind::name, "unknown counter '" + a.counter + "'");

  WhatIfScenario sc;
  sc.pivot_counter = a.counter;
  sc.delta_percent = a.delta;
  sc.propagation_tau = a.tau;
  sc.baseline = data.samples();
  const WhatIfOutcome o = evaluate(ms, sc);
  write_json_file(json(o), a.out);

  out << fmt::format("what-if: {} {:+g}% (tau {:g}, {} baseline samples)\n", o.pivot_counter,
                     o.delta_percent, o.propagation_tau, o.n_baseline);
  out << fmt::format("{:<13} {:>14} {:>14} {:>12}\n", "metric", "baseline", "perturbed",
                     "improvement");
  for (const auto& m : o.metrics) {
    const std::string imp =
        m.improvement_percent ? fmt::format("{:.2f}%", *m.improvement_percent + 0.0) : "n/a";
    out << fmt::format("{:<13} {:>14.6g} {:>14.6g} {:>12}\n", metric_name(m.metric),
                       m.baseline_prediction, m.perturbed_prediction, imp);
  }
  out << "propagated counter deltas:\n";
  for (const auto& [name, d] : o.deltas)
    if (d != 0.0) out << fmt::format("  {:<16} {:+.4f}%\n", name, d);
  for (const auto& w : o.warnings) out << "warning: " << w << "\n";
  return 0;
}

struct CompareArgs {
  std::string data, out, dataset_id;
  std::vector<std::string> methods = harness::all_method_names();
  std::vector<std::string> targets;
  std::uint64_t seed = SplitSpec{}.seed;
  double test_fraction = SplitSpec{}.test_fraction;
  std::size_t cv_folds = 5;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  harness::ComparisonOptions opts;
  opts.methods = harness::parse_methods(a.methods);
  if (!a.targets.empty()) {
    opts.targets.clear();
    for (const auto& t : a.targets) {
      auto m = parse_metric(t);
      if (!m) throw Error(ErrorKind::name, "unknown target '" + t + "'");
      opts.targets.push_back(*m);
    }
  }
  opts.cv_folds = a.cv_folds;
  opts.dataset_id =
      a.dataset_id.empty() ? std::filesystem::path(a.data).stem().string() : a.dataset_id;
  const Dataset data = load_csv(a.data);
  const auto report = harness::run_comparison(data, {a.test_fraction, a.seed}, opts);
  harness::export_report(report, harness::ReportFormat::json, a.out);
  harness::export_report(report, harness::ReportFormat::csv, a.out);

  out << fmt::format("split: {} train / {} test (seed {})\n", report.train_indices.size(),
                     report.test_indices.size(), a.seed);
  out << fmt::format("{:<18} {:<13} {:>12} {:>12}\n", "method", "target", "mean err %",
                     "median %");
  for (const auto& c : report.cells) {
    if (c.ok)
      out << fmt::format("{:<18} {:<13} {:>12.4f} {:>12.4f}\n", c.method, metric_name(c.target),
                         c.mean, c.quartiles.median);
    else
      out << fmt::format("{:<18} {:<13} failed: {}\n", c.method, metric_name(c.target), c.error);
  }
  out << "wrote report.json, errors_long.csv, errors_summary.csv to " << a.out << "\n";
  return 0;
}

struct SynthArgs {
  std::string spec, out;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthSpec spec;
  try {
    spec = read_json_file(a.spec).get<SynthSpec>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::input, a.spec + ": " + e.what());
  }
  const Dataset d = synth_generate(spec);
  write_text(a.out, to_csv(d));
  out << fmt::format("wrote {} samples to {}\n", d.size(), a.out);
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1", data_dir, ui_dir;
  int port = 8080;
  std::size_t capacity = 64;
};

int cmd_serve(const ServeArgs& a, std::ostream& err) {
  service::ServiceOptions opts;
  opts.capacity = a.capacity;
  if (!a.data_dir.empty()) opts.data_dir = a.data_dir;
  if (!a.ui_dir.empty()) opts.ui_dir = a.ui_dir;
  service::Service svc(opts);
  const int port = svc.bind(a.host, a.port);
  err << fmt::format("listening on http://{}:{}/api/v1\n", a.host, port);
  err.flush();
  svc.listen();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Counter-based performance and power modeling"};
  app.set_config("--config", "", "TOML file with the same keys as the flags; flags win");
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Select counters and fit the four metric models");
  fit->add_option("--data", fa.data, "Training CSV")->required();
  fit->add_option("--out", fa.out, "Model JSON to write")->required();
  fit->add_option("--threshold", fa.params.relevance_threshold, "Minimum |Spearman rho|");
  fit->add_option("--variance-target", fa.params.variance_target, "PCA retained variance");
  fit->add_option("--max-counters", fa.params.max_counters, "Counter cap per model");
  fit->add_option("--seed", fa.seed, "Split seed, used with --holdout");
  fit->add_option("--holdout", fa.holdout, "Hold out this fraction and report its error");

  PredictArgs pa;
  auto* pred = app.add_subcommand("predict", "Predict all four metrics for each row");
  pred->add_option("--model", pa.model)->required();
  pred->add_option("--data", pa.data)->required();
  pred->add_option("--out", pa.out, "Prediction CSV")->required();

  WhatIfArgs wa;
  auto* wi = app.add_subcommand("whatif", "Evaluate a counter perturbation");
  wi->add_option("--model", wa.model)->required();
  wi->add_option("--data", wa.data, "Baseline samples")->required();
  wi->add_option("--counter", wa.counter, "Pivot counter")->required();
  wi->add_option("--delta", wa.delta, "Percent change of the pivot counter")->required();
  wi->add_option("--tau", wa.tau, "Correlation propagation threshold");
  wi->add_option("--out", wa.out, "Outcome JSON");

  CompareArgs ca;
  auto* cmp = app.add_subcommand("compare", "Compare the counter models against baselines");
  cmp->add_option("--data", ca.data)->required();
  cmp->add_option("--methods", ca.methods, "Comma-separated method names")->delimiter(',');
  cmp->add_option("--seed", ca.seed, "Split and tuning seed");
  cmp->add_option("--out", ca.out, "Output directory")->required();
  cmp->add_option("--test-fraction", ca.test_fraction);
  cmp->add_option("--targets", ca.targets, "Comma-separated metric names")->delimiter(',');
  cmp->add_option("--cv-folds", ca.cv_folds);
  cmp->add_option("--dataset-id", ca.dataset_id, "Defaults to the data file stem");

  SynthArgs sa;
  auto* syn = app.add_subcommand("synth", "Generate a synthetic dataset from a planted model");
  syn->add_option("--spec", sa.spec)->required();
  syn->add_option("--out", sa.out)->required();

  ServeArgs va;
  auto* srv = app.add_subcommand("serve", "Run the HTTP API");
  srv->add_option("--port", va.port);
  srv->add_option("--host", va.host);
  srv->add_option("--data-dir", va.data_dir, "Preload every CSV in this directory");
  srv->add_option("--ui-dir", va.ui_dir, "Static files served under /ui");
  srv->add_option("--capacity", va.capacity, "Session store capacity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForVersion& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*fit) return cmd_fit(fa, out);
    if (*pred) return cmd_predict(pa, out);
    if (*wi) return cmd_whatif(wa, out);
    if (*cmp) return cmd_compare(ca, out);
    if (*syn) return cmd_synth(sa, out);
    if (*srv) return cmd_serve(va, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_input_error() ? 2 : 1;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  err << "error: no subcommand\n";
  return 2;
}

}  // namespace mummi::cli
