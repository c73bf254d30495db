#include "mummi/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mummi/error.hpp"
#include "mummi/random.hpp"

namespace mummi {

namespace {

constexpr std::string_view kAppColumn = "app";
constexpr std::string_view kSystemColumn = "system";
constexpr std::string_view kCoresColumn = "cores";
constexpr std::string_view kFreqColumn = "freq_ghz";
constexpr std::string_view kConfigPrefix = "config_";

bool is_metadata_column(std::string_view name) {
  return name == kAppColumn || name == kSystemColumn || name == kCoresColumn ||
         name == kFreqColumn || name.starts_with(kConfigPrefix);
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    return std::nullopt;
  return v;
}

// Splits one CSV record. Double-quoted fields may contain commas and "".
std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string quote_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::schema: return "schema";
    case ErrorKind::parse: return "parse";
    case ErrorKind::empty: return "empty";
    case ErrorKind::state: return "state";
    case ErrorKind::domain: return "domain";
    case ErrorKind::split: return "split";
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::name: return "name";
    case ErrorKind::input: return "input";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::unsupported: return "unsupported";
    case ErrorKind::degenerate: return "degenerate";
    case ErrorKind::selection: return "selection";
    case ErrorKind::io: return "io";
    case ErrorKind::internal: return "internal";
  }
  return "internal";
}

const std::array<std::string_view, 32> kPapiCounters = {
    "TOT_CYC", "TOT_INS", "L1_TCM", "L2_TCM", "L3_TCM", "CA_SHR", "BR_CN",
    "BR_TKN",  "BR_NTK",  "BR_MSP", "CA_CLN", "CA_ITV", "RES_STL", "L2_TCA",
    "L1_STM",  "L2_TCW",  "L1_LDM", "L2_DCA", "L2_DCR", "L2_DCW", "L1_ICM",
    "BR_INS",  "L1_DCM",  "L2_ICA", "TLB_DM", "TLB_IM", "L2_DCM", "L2_ICM",
    "LD_INS",  "SR_INS",  "L2_LDM", "L2_STM"};

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::runtime: return "runtime_s";
    case Metric::node_power: return "node_power_w";
    case Metric::cpu_power: return "cpu_power_w";
    case Metric::mem_power: return "mem_power_w";
  }
  return "runtime_s";
}

std::optional<Metric> parse_metric(std::string_view name) {
  for (Metric m : kMetrics)
    if (metric_name(m) == name) return m;
  return std::nullopt;
}

std::string_view freq_term_name(FreqTerm t) {
  return t == FreqTerm::inverse ? "inverse" : "cubed";
}

std::optional<FreqTerm> parse_freq_term(std::string_view name) {
  if (name == "inverse") return FreqTerm::inverse;
  if (name == "cubed") return FreqTerm::cubed;
  return std::nullopt;
}

double frequency_regressor(FreqTerm t, double freq_ghz) {
  return t == FreqTerm::inverse ? 1.0 / freq_ghz
                                : freq_ghz * freq_ghz * freq_ghz;
}

FreqTerm default_freq_term(Metric m) {
  return m == Metric::runtime ? FreqTerm::inverse : FreqTerm::cubed;
}

double CounterSample::counter(std::string_view name) const {
  auto it = counters.find(std::string(name));
  if (it == counters.end())
    throw Error(ErrorKind::name, "unknown counter: " + std::string(name));
  return it->second;
}

double CounterSample::target(Metric m) const {
  auto it = targets.find(m);
  if (it == targets.end())
    throw Error(ErrorKind::name,
                "sample has no target " + std::string(metric_name(m)));
  return it->second;
}

double CounterSample::feature(std::string_view name) const {
  if (name == kFreqColumn) return cpu_freq_ghz;
  if (name == kCoresColumn) return static_cast<double>(num_cores);
  if (auto it = counters.find(std::string(name)); it != counters.end())
    return it->second;
  if (auto it = config_params.find(std::string(name)); it != config_params.end())
    return it->second;
  if (auto m = parse_metric(name)) return target(*m);
  throw Error(ErrorKind::name, "unknown column: " + std::string(name));
}

Dataset::Dataset(std::vector<CounterSample> samples,
                 std::vector<std::string> counter_names, bool has_targets,
                 bool normalized)
    : samples_(std::move(samples)),
      counter_names_(std::move(counter_names)),
      has_targets_(has_targets),
      normalized_(normalized) {
  std::set<std::string> unique(counter_names_.begin(), counter_names_.end());
  if (unique.size() != counter_names_.size())
    throw Error(ErrorKind::schema, "duplicate counter name in schema");
  const bool check_cycles = !normalized_ && unique.contains(std::string(kCycleCounter));

  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    const std::string where = "sample " + std::to_string(i);
    if (!(s.cpu_freq_ghz > 0.0))
      throw Error(ErrorKind::domain, where + ": cpu_freq_ghz must be > 0");
    if (s.num_cores < 1)
      throw Error(ErrorKind::domain, where + ": cores must be >= 1");
    if (s.counters.size() != counter_names_.size())
      throw Error(ErrorKind::schema, where + ": counter set does not match schema");
    for (const auto& name : counter_names_) {
      auto it = s.counters.find(name);
      if (it == s.counters.end())
        throw Error(ErrorKind::schema, where + ": missing counter " + name);
      if (!(it->second >= 0.0) || !std::isfinite(it->second))
        throw Error(ErrorKind::domain, where + ": counter " + name + " must be >= 0");
    }
    if (check_cycles && !(s.counters.at(std::string(kCycleCounter)) > 0.0))
      throw Error(ErrorKind::domain, where + ": TOT_CYC must be > 0");
    if (has_targets_) {
      if (s.targets.size() != kMetrics.size())
        throw Error(ErrorKind::schema, where + ": expected all four targets");
      for (Metric m : kMetrics) {
        auto it = s.targets.find(m);
        if (it == s.targets.end())
          throw Error(ErrorKind::schema,
                      where + ": missing target " + std::string(metric_name(m)));
        if (!(it->second > 0.0) || !std::isfinite(it->second))
          throw Error(ErrorKind::domain, where + ": target " +
                                             std::string(metric_name(m)) +
                                             " must be > 0");
      }
    } else if (!s.targets.empty()) {
      throw Error(ErrorKind::schema, where + ": unexpected targets");
    }
  }
}

std::vector<std::string> Dataset::target_names() const {
  std::vector<std::string> names;
  if (has_targets_)
    for (Metric m : kMetrics) names.emplace_back(metric_name(m));
  return names;
}

bool Dataset::has_counter(std::string_view name) const {
  return std::find(counter_names_.begin(), counter_names_.end(), name) !=
         counter_names_.end();
}

std::vector<double> Dataset::column(std::string_view name) const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.feature(name));
  return out;
}

std::vector<double> Dataset::target_column(Metric m) const {
  std::vector<double> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.target(m));
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<CounterSample> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples_.size())
      throw Error(ErrorKind::dimension, "subset index out of range");
    picked.push_back(samples_[i]);
  }
  Dataset out;
  out.samples_ = std::move(picked);
  out.counter_names_ = counter_names_;
  out.has_targets_ = has_targets_;
  out.normalized_ = normalized_;
  return out;
}

Dataset parse_csv(std::istream& in, const CsvSchema& schema,
                  std::string_view source) {
  const std::string src(source);
  std::string line;
  std::size_t line_no = 0;
  bool got_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!is_blank(line)) {
      got_header = true;
      break;
    }
  }
  if (!got_header) throw Error(ErrorKind::empty, src + ": empty file");

  const std::vector<std::string> header = split_record(line);
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    std::string h = header[i];
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    while (!h.empty() && (h.front() == ' ' || h.front() == '\t')) h.erase(0, 1);
    if (!col.emplace(h, i).second)
      throw Error(ErrorKind::schema, src + ": duplicate column " + h);
  }
  auto require = [&](std::string_view name) {
    auto it = col.find(std::string(name));
    if (it == col.end())
      throw Error(ErrorKind::schema,
                  src + ": missing column " + std::string(name));
    return it->second;
  };

  const std::size_t freq_col = require(kFreqColumn);
  std::optional<std::size_t> app_col, system_col, cores_col;
  if (col.contains(std::string(kAppColumn))) app_col = col[std::string(kAppColumn)];
  if (col.contains(std::string(kSystemColumn)))
    system_col = col[std::string(kSystemColumn)];
  if (col.contains(std::string(kCoresColumn)))
    cores_col = col[std::string(kCoresColumn)];

  std::vector<std::pair<std::string, std::size_t>> target_cols;
  std::size_t targets_present = 0;
  for (Metric m : kMetrics)
    if (col.contains(std::string(metric_name(m)))) ++targets_present;
  const bool has_targets = schema.require_targets || targets_present > 0;
  if (has_targets)
    for (Metric m : kMetrics)
      target_cols.emplace_back(std::string(metric_name(m)), require(metric_name(m)));

  std::vector<std::string> counter_names;
  std::vector<std::pair<std::string, std::size_t>> config_cols;
  if (!schema.counters.empty()) {
    counter_names = schema.counters;
    for (const auto& c : counter_names) require(c);
  } else {
    for (const auto& h : header) {
      std::string name = h;
      while (!name.empty() && (name.back() == ' ' || name.back() == '\t')) name.pop_back();
      while (!name.empty() && (name.front() == ' ' || name.front() == '\t'))
        name.erase(0, 1);
      if (is_metadata_column(name) || parse_metric(name)) continue;
      counter_names.push_back(name);
    }
  }
  for (const auto& [name, idx] : col)
    if (name.starts_with(kConfigPrefix)) config_cols.emplace_back(name, idx);
  std::sort(config_cols.begin(), config_cols.end());

  std::vector<std::pair<std::string, std::size_t>> counter_cols;
  for (const auto& c : counter_names) counter_cols.emplace_back(c, col.at(c));

  std::vector<CounterSample> samples;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ++row;
    const auto fields = split_record(line);
    if (fields.size() != header.size())
      throw Error(ErrorKind::parse, src + ": row " + std::to_string(row) +
                                        " has " + std::to_string(fields.size()) +
                                        " fields, header has " +
                                        std::to_string(header.size()));
    auto number = [&](std::size_t idx, const std::string& name) {
      auto v = parse_double(fields[idx]);
      if (!v)
        throw Error(ErrorKind::parse, src + ": row " + std::to_string(row) +
                                          ", column " + name +
                                          ": not a number: '" + fields[idx] + "'");
      return *v;
    };

    CounterSample s;
    if (app_col) s.app_name = fields[*app_col];
    if (system_col) s.system_name = fields[*system_col];
    if (cores_col) {
      const double cores = number(*cores_col, std::string(kCoresColumn));
      if (cores < 1 || cores != std::floor(cores) || cores > 1e9)
        throw Error(ErrorKind::parse, src + ": row " + std::to_string(row) +
                                          ", column cores: not a positive integer");
      s.num_cores = static_cast<int>(cores);
    }
    s.cpu_freq_ghz = number(freq_col, std::string(kFreqColumn));
    for (const auto& [name, idx] : config_cols) s.config_params[name] = number(idx, name);
    for (const auto& [name, idx] : counter_cols) s.counters[name] = number(idx, name);
    for (std::size_t t = 0; t < target_cols.size(); ++t)
      s.targets[kMetrics[t]] = number(target_cols[t].second, target_cols[t].first);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw Error(ErrorKind::empty, src + ": no data rows");

  try {
    return Dataset(std::move(samples), std::move(counter_names), has_targets, false);
  } catch (const Error& e) {
    throw Error(e.kind(), src + ": " + e.what());
  }
}

Dataset parse_csv(std::string_view text, const CsvSchema& schema,
                  std::string_view source) {
  std::istringstream in{std::string(text)};
  return parse_csv(in, schema, source);
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io, "cannot open " + path.string());
  return parse_csv(in, schema, path.string());
}

std::string to_csv(const Dataset& d) {
  std::set<std::string> config_names;
  for (const auto& s : d.samples())
    for (const auto& [k, v] : s.config_params) config_names.insert(k);

  std::ostringstream out;
  out << kAppColumn << ',' << kSystemColumn << ',' << kCoresColumn << ','
      << kFreqColumn;
  for (const auto& c : config_names) out << ',' << quote_field(c);
  for (const auto& c : d.counter_names()) out << ',' << quote_field(c);
  for (const auto& t : d.target_names()) out << ',' << t;
  out << '\n';

  for (const auto& s : d.samples()) {
    out << quote_field(s.app_name) << ',' << quote_field(s.system_name) << ','
        << s.num_cores << ',' << format_double(s.cpu_freq_ghz);
    for (const auto& c : config_names) {
      auto it = s.config_params.find(c);
      if (it == s.config_params.end())
        throw Error(ErrorKind::schema, "config column " + c + " not present in every sample");
      out << ',' << format_double(it->second);
    }
    for (const auto& c : d.counter_names()) out << ',' << format_double(s.counters.at(c));
    if (d.has_targets())
      for (Metric m : kMetrics) out << ',' << format_double(s.targets.at(m));
    out << '\n';
  }
  return out.str();
}

void write_csv(const Dataset& d, const std::filesystem::path& path) {
  const std::string text = to_csv(d);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::io, "write failed: " + path.string());
}

Dataset normalize_counters(const Dataset& d) {
  if (d.normalized())
    throw Error(ErrorKind::state, "dataset is already normalized");
  const std::string cyc(kCycleCounter);
  if (!d.has_counter(cyc))
    throw Error(ErrorKind::schema, "missing column TOT_CYC");

  std::vector<std::string> names;
  for (const auto& c : d.counter_names())
    if (c != cyc) names.push_back(c);

  std::vector<CounterSample> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CounterSample s = d[i];
    const double cycles = s.counters.at(cyc);
    if (!(cycles > 0.0))
      throw Error(ErrorKind::domain, "TOT_CYC is not positive in row " + std::to_string(i));
    s.counters.erase(cyc);
    for (auto& [name, value] : s.counters) value /= cycles;
    out.push_back(std::move(s));
  }
  return Dataset(std::move(out), std::move(names), d.has_targets(), true);
}

Dataset ensure_normalized(const Dataset& d) {
  if (d.normalized()) return d;
  if (d.has_counter(kCycleCounter)) return normalize_counters(d);
  return Dataset(d.samples(), d.counter_names(), d.has_targets(), true);
}

std::size_t test_size(std::size_t n, double test_fraction) {
  // The epsilon absorbs representation error in products such as 0.2 * 80.
  return static_cast<std::size_t>(
      std::floor(test_fraction * static_cast<double>(n) + 1e-9));
}

SplitResult split(const Dataset& d, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0))
    throw Error(ErrorKind::validation, "test_fraction must lie in (0, 1)");
  const std::size_t n = d.size();
  if (n < 5)
    throw Error(ErrorKind::split, "split needs at least 5 samples, got " + std::to_string(n));
  const std::size_t n_test = test_size(n, spec.test_fraction);
  if (n_test == 0 || n_test >= n)
    throw Error(ErrorKind::split, "test size " + std::to_string(n_test) +
                                      " leaves an empty side for n=" + std::to_string(n));

  Rng rng(spec.seed);
  std::vector<std::size_t> order = rng.permutation(n);
  std::vector<std::size_t> test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  std::sort(test.begin(), test.end());
  std::vector<std::size_t> train;
  train.reserve(n - n_test);
  for (std::size_t i = 0, t = 0; i < n; ++i) {
    if (t < test.size() && test[t] == i) {
      ++t;
      continue;
    }
    train.push_back(i);
  }
  SplitResult r;
  r.train = d.subset(train);
  r.test = d.subset(test);
  r.train_indices = std::move(train);
  r.test_indices = std::move(test);
  return r;
}

std::vector<std::string> synth_counter_names(const SynthSpec& spec) {
  if (!spec.counter_names.empty()) return spec.counter_names;
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= spec.n_counters; ++i)
    names.push_back("c" + std::to_string(i));
  return names;
}

Dataset synth_generate(const SynthSpec& spec) {
  if (spec.n_samples == 0) throw Error(ErrorKind::validation, "n_samples must be positive");
  if (spec.n_counters == 0) throw Error(ErrorKind::validation, "n_counters must be positive");
  if (!spec.counter_names.empty() && spec.counter_names.size() != spec.n_counters)
    throw Error(ErrorKind::validation, "counter_names length must equal n_counters");
  if (!(spec.noise_sigma >= 0.0))
    throw Error(ErrorKind::validation, "noise_sigma must be >= 0");
  if (spec.frequencies.empty())
    throw Error(ErrorKind::validation, "frequencies must be nonempty");
  for (double f : spec.frequencies)
    if (!(f > 0.0)) throw Error(ErrorKind::validation, "frequencies must be > 0");

  const std::vector<std::string> names = synth_counter_names(spec);
  const std::set<std::string> name_set(names.begin(), names.end());
  if (name_set.contains(std::string(kCycleCounter)))
    throw Error(ErrorKind::validation, "TOT_CYC is reserved for the cycle divisor");

  std::array<PlantedModel, 4> planted;
  for (std::size_t t = 0; t < kMetrics.size(); ++t) {
    auto it = spec.per_target.find(kMetrics[t]);
    planted[t] = it != spec.per_target.end() ? it->second : spec.model;
    for (const auto& [name, coef] : planted[t].coefficients) {
      if (!name_set.contains(name))
        throw Error(ErrorKind::validation, "coefficient for unknown counter " + name);
      if (!(coef >= 0.0))
        throw Error(ErrorKind::validation, "coefficient for " + name + " must be >= 0");
    }
    if (!(planted[t].freq_coefficient >= 0.0))
      throw Error(ErrorKind::validation, "freq_coefficient must be >= 0");
  }

  static constexpr std::array<int, 6> kCores = {32, 64, 128, 256, 512, 1024};
  Rng rng(spec.seed);
  std::vector<CounterSample> samples;
  samples.reserve(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    CounterSample s;
    s.app_name = spec.app_name;
    s.system_name = spec.system_name;
    s.num_cores = kCores[rng.below(kCores.size())];
    s.cpu_freq_ghz = spec.frequencies[rng.below(spec.frequencies.size())];
    std::map<std::string, double> rates;
    for (const auto& name : names) rates[name] = rng.uniform();

    for (std::size_t t = 0; t < kMetrics.size(); ++t) {
      const PlantedModel& p = planted[t];
      const FreqTerm term = p.freq_term.value_or(default_freq_term(kMetrics[t]));
      double y = p.intercept;
      for (const auto& [name, coef] : p.coefficients) y += coef * rates.at(name);
      y += p.freq_coefficient * frequency_regressor(term, s.cpu_freq_ghz);
      if (spec.noise_sigma > 0.0) y += spec.noise_sigma * rng.normal();
      if (!(y > 0.0))
        throw Error(ErrorKind::validation,
                    "planted " + std::string(metric_name(kMetrics[t])) +
                        " is not positive for sample " + std::to_string(i) +
                        "; raise the intercept");
      s.targets[kMetrics[t]] = y;
    }

    if (spec.with_cycles) {
      const double cycles = std::ldexp(1.0, 30 + static_cast<int>(rng.below(4)));
      for (auto& [name, r] : rates) r *= cycles;
      rates[std::string(kCycleCounter)] = cycles;
    }
    s.counters = std::move(rates);
    samples.push_back(std::move(s));
  }

  std::vector<std::string> counter_names = names;
  if (spec.with_cycles) counter_names.insert(counter_names.begin(), std::string(kCycleCounter));
  return Dataset(std::move(samples), std::move(counter_names), true, !spec.with_cycles);
}

}  // namespace mummi
