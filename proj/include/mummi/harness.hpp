#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mummi/baselines.hpp"
#include "mummi/dataset.hpp"
#include "mummi/model.hpp"
#include "mummi/stats.hpp"

namespace mummi::harness {

/// Name of the counter-model column in a comparison; the baselines use
/// their method names.
inline constexpr std::string_view kMummiMethod = "mummi";

/// "mummi" followed by every baseline name.
std::vector<std::string> all_method_names();

/// Validates a list of method names; throws a name error listing the valid
/// ones.
std::vector<std::string> parse_methods(const std::vector<std::string>& names);

struct ComparisonOptions {
  std::vector<std::string> methods = all_method_names();
  std::vector<Metric> targets = {kMetrics.begin(), kMetrics.end()};
  SelectionParams selection;
  /// Per-method tuning grids; methods without an entry use default_grid.
  std::map<baselines::Method, std::vector<baselines::Hyperparams>> grids;
  std::size_t cv_folds = 5;
  /// Baseline inputs; empty means every counter plus freq_ghz.
  std::vector<std::string> baseline_features;
  std::string dataset_id = "dataset";
  /// Run method-by-target cells on worker threads.
  bool parallel = true;
};

struct CellResult {
  std::string method;
  Metric target = Metric::runtime;
  bool ok = false;
  std::string error;
  nlohmann::json hyperparams;  // null for mummi
  std::vector<double> predictions;
  std::vector<double> baselines;    // measured test targets
  std::vector<double> error_rates;  // percent, aligned with test indices
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  stats::Quartiles quartiles;
  std::optional<stats::DensityCurve> density;
  std::string density_note;
};

struct ImportanceEntry {
  std::string method;
  Metric target = Metric::runtime;
  baselines::ImportanceReport report;
};

struct ComparisonReport {
  std::string dataset_id;
  SplitSpec split;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
  std::vector<std::string> methods;
  std::vector<Metric> targets;
  std::vector<CellResult> cells;  // method-major, then target order
  /// Counter-model rankings for every target whose fit succeeded.
  std::vector<ModelRanking> rankings;
  std::vector<ImportanceEntry> importance;

  const CellResult& cell(std::string_view method, Metric target) const;
};

/// One shared split; counter models and tuned baselines fitted on the
/// training side; signed error rates on the test side. A failing cell is
/// recorded and does not stop the others.
ComparisonReport run_comparison(const Dataset& d, const SplitSpec& spec,
                                const ComparisonOptions& options = {});

enum class ReportFormat { json, csv };

/// json writes report.json; csv writes errors_long.csv and
/// errors_summary.csv. Returns the files written.
std::vector<std::filesystem::path> export_report(const ComparisonReport& r, ReportFormat format,
                                                 const std::filesystem::path& out_dir);

/// method,target,sample_index,error_percent
std::string long_csv(const ComparisonReport& r);
/// method,target,mean,q1,median,q3,min,max
std::string summary_csv(const ComparisonReport& r);

}  // namespace mummi::harness
