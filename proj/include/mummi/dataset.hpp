#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mummi {

/// The four modeled metrics.
enum class Metric { runtime, node_power, cpu_power, mem_power };

inline constexpr std::array<Metric, 4> kMetrics = {
    Metric::runtime, Metric::node_power, Metric::cpu_power, Metric::mem_power};

/// Column name of a metric: runtime_s, node_power_w, cpu_power_w, mem_power_w.
std::string_view metric_name(Metric m);
std::optional<Metric> parse_metric(std::string_view name);

/// Regressor derived from CPU frequency: 1/f for runtime, f^3 for power.
enum class FreqTerm { inverse, cubed };

std::string_view freq_term_name(FreqTerm t);
std::optional<FreqTerm> parse_freq_term(std::string_view name);
double frequency_regressor(FreqTerm t, double freq_ghz);
FreqTerm default_freq_term(Metric m);

/// Normalization divisor for every other counter.
inline constexpr std::string_view kCycleCounter = "TOT_CYC";

/// The 32 PAPI-style counters collected on Shepard.
extern const std::array<std::string_view, 32> kPapiCounters;

/// One application run.
struct CounterSample {
  std::string app_name;
  std::string system_name;
  int num_cores = 1;
  std::map<std::string, double> config_params;
  double cpu_freq_ghz = 0.0;
  std::map<std::string, double> counters;
  std::map<Metric, double> targets;

  double counter(std::string_view name) const;
  double target(Metric m) const;

  /// Counter, target, config parameter, or one of freq_ghz / cores.
  double feature(std::string_view name) const;

  friend bool operator==(const CounterSample&, const CounterSample&) = default;
};

/// Ordered, immutable collection of samples sharing one counter schema.
///
/// Column identity is by name. A dataset either carries all four targets on
/// every sample or none (prediction-only input).
class Dataset {
 public:
  Dataset() = default;

  /// Validates every sample against the declared schema; throws Error.
  Dataset(std::vector<CounterSample> samples,
          std::vector<std::string> counter_names, bool has_targets,
          bool normalized);

  const std::vector<CounterSample>& samples() const { return samples_; }
  const CounterSample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

  const std::vector<std::string>& counter_names() const {
    return counter_names_;
  }
  std::vector<std::string> target_names() const;
  bool has_targets() const { return has_targets_; }
  bool normalized() const { return normalized_; }
  bool has_counter(std::string_view name) const;

  /// Values of a counter, target or metadata column across all samples.
  std::vector<double> column(std::string_view name) const;
  std::vector<double> target_column(Metric m) const;

  /// Samples at the given indices, in the given order.
  Dataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<CounterSample> samples_;
  std::vector<std::string> counter_names_;
  bool has_targets_ = false;
  bool normalized_ = false;
};

/// Column roles for CSV ingestion.
struct CsvSchema {
  /// Counter columns to read. Empty means every column that is not
  /// metadata (app, system, cores, freq_ghz, config_*) or a target.
  std::vector<std::string> counters;
  /// When false, inputs without target columns are accepted.
  bool require_targets = true;
};

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});
Dataset parse_csv(std::istream& in, const CsvSchema& schema = {},
                  std::string_view source = "<input>");
Dataset parse_csv(std::string_view text, const CsvSchema& schema = {},
                  std::string_view source = "<input>");

/// Columns: app, system, cores, freq_ghz, config_* (sorted), counters in
/// declared order, targets. Numbers use the shortest round-trip form.
std::string to_csv(const Dataset& d);
void write_csv(const Dataset& d, const std::filesystem::path& path);

/// Divides each counter by TOT_CYC and drops the TOT_CYC column.
Dataset normalize_counters(const Dataset& d);

/// Normalizes when a TOT_CYC column is present; otherwise the counters are
/// taken to be rates already and only the flag is set.
Dataset ensure_normalized(const Dataset& d);

struct SplitSpec {
  double test_fraction = 0.2;
  std::uint64_t seed = 3456;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_indices;  // ascending
  std::vector<std::size_t> test_indices;   // ascending
};

/// floor(test_fraction * n), the number of samples held out.
std::size_t test_size(std::size_t n, double test_fraction);

SplitResult split(const Dataset& d, const SplitSpec& spec);

/// One target's generating model for synthetic data.
struct PlantedModel {
  std::map<std::string, double> coefficients;
  double intercept = 0.0;
  double freq_coefficient = 0.0;
  std::optional<FreqTerm> freq_term;  // unset: 1/f for runtime, f^3 otherwise
};

struct SynthSpec {
  std::size_t n_samples = 100;
  std::size_t n_counters = 8;
  /// Names for the generated counters; defaults to c1..cN.
  std::vector<std::string> counter_names;
  /// Applied to every metric without an entry in per_target.
  PlantedModel model;
  std::map<Metric, PlantedModel> per_target;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> frequencies = {1.2, 1.5, 1.8, 2.1, 2.3};
  /// Emit raw counts with a power-of-two TOT_CYC so normalization
  /// reproduces the planted rates exactly.
  bool with_cycles = false;
  std::string app_name = "synthetic";
  std::string system_name = "synthetic";
};

/// Counter rates are uniform on [0, 1); frequency is drawn uniformly from
/// spec.frequencies; each target is its planted linear form plus
/// N(0, noise_sigma^2) noise.
Dataset synth_generate(const SynthSpec& spec);

std::vector<std::string> synth_counter_names(const SynthSpec& spec);

}  // namespace mummi
