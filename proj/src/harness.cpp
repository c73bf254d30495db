#include "mummi/harness.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <sstream>

#include "mummi/error.hpp"
#include "mummi/json_io.hpp"

namespace mummi::harness {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

CellResult failed_cell(std::string method, Metric target, std::string error) {
  CellResult c;
  c.method = std::move(method);
  c.target = target;
  c.error = std::move(error);
  return c;
}

void summarize(CellResult& cell) {
  const auto& e = cell.error_rates;
  cell.mean = stats::mean(e);
  const auto [lo, hi] = std::minmax_element(e.begin(), e.end());
  cell.min = *lo;
  cell.max = *hi;
  cell.quartiles = stats::quartiles(e);
  try {
    cell.density = stats::kde(e);
  } catch (const Error& err) {
    cell.density.reset();
    cell.density_note = err.what();
  }
}

void score(CellResult& cell, const Dataset& test) {
  cell.baselines = test.target_column(cell.target);
  cell.error_rates.clear();
  for (std::size_t i = 0; i < cell.predictions.size(); ++i)
    cell.error_rates.push_back(error_rate(cell.predictions[i], cell.baselines[i]));
  summarize(cell);
  cell.ok = true;
}

struct MummiCell {
  CellResult cell;
  std::optional<ModelRanking> ranking;
};

MummiCell run_mummi(const Dataset& train, const Dataset& test, Metric target,
                    const SelectionParams& params) {
  MummiCell out;
  out.cell.method = std::string(kMummiMethod);
  out.cell.target = target;
  try {
    const auto counters = select_counters(train, target, params);
    const FittedModel model = fit(train, target, counters, default_freq_term(target));
    for (const auto& s : test.samples()) out.cell.predictions.push_back(predict(model, s));
    score(out.cell, test);
    out.ranking = rank_model(model, train);
  } catch (const std::exception& e) {
    out.cell = failed_cell(out.cell.method, target, e.what());
  }
  return out;
}

struct BaselineCell {
  CellResult cell;
  std::optional<baselines::ImportanceReport> importance;
};

BaselineCell run_baseline(const Dataset& train, const Dataset& test, Metric target,
                          baselines::Method method, const std::vector<std::string>& features,
                          const std::vector<baselines::Hyperparams>& grid, std::size_t folds,
                          std::uint64_t seed) {
  BaselineCell out;
  out.cell.method = std::string(baselines::method_name(method));
  out.cell.target = target;
  try {
    const auto hp = baselines::tune(train, target, features, grid,
                                    std::min(folds, train.size()), seed);
    const auto model = baselines::fit_baseline(train, target, features, hp);
    for (const auto& s : test.samples())
      out.cell.predictions.push_back(baselines::predict_baseline(model, s));
    out.cell.hyperparams = hp;
    score(out.cell, test);
    if (method == baselines::Method::cart || method == baselines::Method::random_forest ||
        method == baselines::Method::gradient_boosting)
      out.importance = baselines::importance(model, train);
  } catch (const std::exception& e) {
    out.cell = failed_cell(out.cell.method, target, e.what());
  }
  return out;
}

}  // namespace

std::vector<std::string> all_method_names() {
  std::vector<std::string> names{std::string(kMummiMethod)};
  for (auto m : baselines::kMethods) names.emplace_back(baselines::method_name(m));
  return names;
}

std::vector<std::string> parse_methods(const std::vector<std::string>& names) {
  const auto valid = all_method_names();
  std::vector<std::string> out;
  for (const auto& n : names) {
    if (std::find(valid.begin(), valid.end(), n) == valid.end()) {
      std::string list;
      for (const auto& v : valid) list += (list.empty() ? "" : ", ") + v;
      throw Error(ErrorKind::name, "unknown method '" + n + "'; valid methods: " + list);
    }
    if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
  }
  if (out.empty()) throw Error(ErrorKind::input, "no methods requested");
  return out;
}

const CellResult& ComparisonReport::cell(std::string_view method, Metric target) const {
  for (const auto& c : cells)
    if (c.method == method && c.target == target) return c;
  throw Error(ErrorKind::name, "report has no cell " + std::string(method) + "/" +
                                   std::string(metric_name(target)));
}

ComparisonReport run_comparison(const Dataset& d, const SplitSpec& spec,
                                const ComparisonOptions& options) {
  const auto methods = parse_methods(options.methods);
  if (options.targets.empty()) throw Error(ErrorKind::input, "no targets requested");
  if (!d.has_targets()) throw Error(ErrorKind::input, "comparison needs target values");
  validate(options.selection);

  const Dataset data = ensure_normalized(d);
  const SplitResult parts = split(data, spec);

  std::vector<std::string> features = options.baseline_features;
  if (features.empty()) {
    features = data.counter_names();
    features.emplace_back("freq_ghz");
  }

  ComparisonReport report;
  report.dataset_id = options.dataset_id;
  report.split = spec;
  report.train_indices = parts.train_indices;
  report.test_indices = parts.test_indices;
  report.methods = methods;
  report.targets = options.targets;

  const auto launch = options.parallel ? std::launch::async : std::launch::deferred;
  std::vector<std::future<MummiCell>> mummi_jobs;
  std::vector<std::future<BaselineCell>> baseline_jobs;
  std::vector<std::pair<bool, std::size_t>> order;  // (is_mummi, job index)

  for (const auto& method : methods) {
    for (Metric target : options.targets) {
      if (method == kMummiMethod) {
        order.emplace_back(true, mummi_jobs.size());
        mummi_jobs.push_back(std::async(launch, run_mummi, std::cref(parts.train),
                                        std::cref(parts.test), target,
                                        std::cref(options.selection)));
      } else {
        const auto m = *baselines::parse_method(method);
        auto it = options.grids.find(m);
        auto grid = it != options.grids.end() && !it->second.empty()
                        ? it->second
                        : baselines::default_grid(m, features.size(), spec.seed);
        order.emplace_back(false, baseline_jobs.size());
        baseline_jobs.push_back(std::async(launch, run_baseline, std::cref(parts.train),
                                           std::cref(parts.test), target, m, features,
                                           std::move(grid), options.cv_folds, spec.seed));
      }
    }
  }

  std::vector<MummiCell> mummi_done;
  std::vector<BaselineCell> baseline_done;
  for (auto& f : mummi_jobs) mummi_done.push_back(f.get());
  for (auto& f : baseline_jobs) baseline_done.push_back(f.get());

  for (const auto& [is_mummi, idx] : order) {
    if (is_mummi) {
      auto& done = mummi_done[idx];
      if (done.ranking) report.rankings.push_back(std::move(*done.ranking));
      report.cells.push_back(std::move(done.cell));
    } else {
      auto& done = baseline_done[idx];
      if (done.importance)
        report.importance.push_back({done.cell.method, done.cell.target, std::move(*done.importance)});
      report.cells.push_back(std::move(done.cell));
    }
  }

  const bool any_ok =
      std::any_of(report.cells.begin(), report.cells.end(), [](const CellResult& c) { return c.ok; });
  if (!any_ok) {
    std::string why = report.cells.empty() ? "no cells" : report.cells.front().error;
    throw Error(ErrorKind::input, "every comparison cell failed; first error: " + why);
  }
  return report;
}

std::string long_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "method,target,sample_index,error_percent\n";
  for (const auto& c : r.cells) {
    if (!c.ok) continue;
    for (std::size_t i = 0; i < c.error_rates.size(); ++i)
      out << c.method << ',' << metric_name(c.target) << ',' << r.test_indices.at(i) << ','
          << fmt_double(c.error_rates[i]) << '\n';
  }
  return out.str();
}

std::string summary_csv(const ComparisonReport& r) {
  std::ostringstream out;
  out << "method,target,mean,q1,median,q3,min,max\n";
  for (const auto& c : r.cells) {
    if (!c.ok) continue;
    out << c.method << ',' << metric_name(c.target) << ',' << fmt_double(c.mean) << ','
        << fmt_double(c.quartiles.q1) << ',' << fmt_double(c.quartiles.median) << ','
        << fmt_double(c.quartiles.q3) << ',' << fmt_double(c.min) << ',' << fmt_double(c.max)
        << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> export_report(const ComparisonReport& r, ReportFormat format,
                                                 const std::filesystem::path& out_dir) {
  if (r.methods.empty() || r.cells.empty())
    throw Error(ErrorKind::input, "report has no methods; nothing to export");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + out_dir.string() + ": " + ec.message());

  auto write_text = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed: " + p.string());
  };

  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::json) {
    const auto p = out_dir / "report.json";
    write_json_file(json(r), p);
    written.push_back(p);
  } else {
    const auto long_path = out_dir / "errors_long.csv";
    const auto summary_path = out_dir / "errors_summary.csv";
    write_text(long_path, long_csv(r));
    write_text(summary_path, summary_csv(r));
    written.push_back(long_path);
    written.push_back(summary_path);
  }
  return written;
}

}  // namespace mummi::harness
