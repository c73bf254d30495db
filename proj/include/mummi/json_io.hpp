#pragma once

// JSON documents exchanged by the CLI and the HTTP service.
//
// Top-level documents carry "format" and "version" fields:
//   mummi.modelset  v1  fitted four-metric model set
//   mummi.report    v1  comparison report
//   mummi.whatif    v1  what-if outcome
// Field names are stable within a version. See README.md for the layouts.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "mummi/baselines.hpp"
#include "mummi/dataset.hpp"
#include "mummi/harness.hpp"
#include "mummi/model.hpp"
#include "mummi/stats.hpp"
#include "mummi/whatif.hpp"

namespace mummi {

using nlohmann::json;

inline constexpr int kModelSetVersion = 1;
inline constexpr int kReportVersion = 1;
inline constexpr int kWhatIfVersion = 1;

void to_json(json& j, const SelectionParams& p);
void from_json(const json& j, SelectionParams& p);

void to_json(json& j, const FittedModel& m);
void from_json(const json& j, FittedModel& m);

void to_json(json& j, const Selection& s);
void from_json(const json& j, Selection& s);

void to_json(json& j, const ModelSet& ms);
void from_json(const json& j, ModelSet& ms);

void to_json(json& j, const ModelRanking& r);
void from_json(const json& j, ModelRanking& r);

void to_json(json& j, const WhatIfOutcome& o);
void from_json(const json& j, WhatIfOutcome& o);

void to_json(json& j, const PlantedModel& p);
void from_json(const json& j, PlantedModel& p);

void to_json(json& j, const SynthSpec& s);
void from_json(const json& j, SynthSpec& s);

/// A sample as {"counters": {...}, "cpu_freq_ghz": f, "targets": {...}, ...}.
void to_json(json& j, const CounterSample& s);
void from_json(const json& j, CounterSample& s);

namespace stats {
void to_json(json& j, const CorrelationMatrix& m);
void from_json(const json& j, CorrelationMatrix& m);
void to_json(json& j, const DensityCurve& c);
void from_json(const json& j, DensityCurve& c);
void to_json(json& j, const Quartiles& q);
void from_json(const json& j, Quartiles& q);
}  // namespace stats

namespace baselines {
/// {"method": "<name>", ...fields}
void to_json(json& j, const Hyperparams& hp);
void from_json(const json& j, Hyperparams& hp);
void to_json(json& j, const ImportanceReport& r);
void from_json(const json& j, ImportanceReport& r);
}  // namespace baselines

namespace harness {
void to_json(json& j, const ComparisonReport& r);
void from_json(const json& j, ComparisonReport& r);
}  // namespace harness

/// Parses a document and checks its format tag and version.
ModelSet model_set_from_json(const json& j);
harness::ComparisonReport report_from_json(const json& j);

json read_json_file(const std::filesystem::path& path);
/// Two-space indented, trailing newline.
void write_json_file(const json& j, const std::filesystem::path& path);
std::string dump_document(const json& j);

}  // namespace mummi
