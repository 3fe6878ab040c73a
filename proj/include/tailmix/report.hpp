#pragma once

// JSON / CSV serialization of fits, selections and experiment reports.
// Reports carry a schema version and the manifest of the run that made them;
// nothing time- or host-dependent is written, so reruns are byte-identical.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailmix/experiments.hpp"
#include "tailmix/select.hpp"

namespace tailmix {

inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::ordered_json;

std::string tool_version();

/// Reproducibility envelope embedded in every report.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  Json config = Json::object();
  std::uint64_t seed = 0;
  std::string version = tool_version();
};

Json to_json(const RunManifest& m);
Json to_json(const FitConfig& c);
Json to_json(const ModelSpec& s, const MixtureParams& p);
Json to_json(const FittedModel& fm);
Json to_json(const SelectionResult& sel);
Json to_json(const ExperimentPlan& plan);
Json to_json(const ExperimentReport& report);

/// Reads {"model", "weights", "lambdas", "alpha", "x_min"?, "exp_mode"?}. Also
/// accepts a fit-select report, taking the chosen model (or `model` if given).
struct ModelFile {
  ModelSpec spec;
  MixtureParams params;
};
ModelFile model_from_json(const Json& j, const std::string& model = "");

/// Inverse of to_json(ExperimentPlan); missing fields keep their defaults.
ExperimentPlan plan_from_json(const Json& j);

/// Per-series report written by `fit-select`.
Json series_report(const BinnedSeries& series, const SelectionResult& sel, const RunManifest& manifest);

/// Aggregate CSV row for one series (header via aggregate_csv_header()).
std::string aggregate_csv_header();
std::string aggregate_csv_row(const BinnedSeries& series, const SelectionResult* sel, const std::string& error);

/// Boxplot-ready long table: grid point, replicate, estimator, value.
void write_estimates_csv(std::ostream& out, const ExperimentReport& report);
/// Long table: row, n, replicate, log BF, chosen.
void write_selections_csv(std::ostream& out, const ExperimentReport& report);

/// Deterministic decimal rendering used in CSV output.
std::string format_double(double v);

}  // namespace tailmix
