#pragma once

// Synthetic validation experiments: tail-exponent recovery against a Hill
// baseline, and the sample-size / selection-strength study.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tailmix/select.hpp"

namespace tailmix {

/// Classic Hill estimator on the top k = ceil(tail_fraction * n) order
/// statistics, reported as a pmf exponent: 1 + k / sum log(X_(i) / X_(k+1)).
/// Requires n >= 50 and k >= 10; throws DataError for a degenerate tail.
double hill_estimate(std::span<const std::int64_t> sample, double tail_fraction = 0.1);
double hill_estimate(std::span<const double> sample, double tail_fraction = 0.1);

enum class ExperimentKind { alpha_recovery, selection_study };
enum class Comparison { ep_vs_p, eep_vs_ep };

std::string_view to_string(ExperimentKind k);
std::string_view to_string(Comparison c);

/// One selection-study row: data from `truth`, evidence measured for `comparison`.
struct SelectionRow {
  std::string name;
  ModelKind truth = ModelKind::EP;
  MixtureParams truth_params;
  Comparison comparison = Comparison::ep_vs_p;
  std::vector<std::size_t> sample_sizes;
  std::vector<Strength> expected;  ///< minimum strength in favour of the truth, per size
};

struct ExperimentPlan {
  std::string name;
  ExperimentKind kind = ExperimentKind::alpha_recovery;
  int replicates = 20;
  std::uint64_t seed = 1;

  // alpha recovery: EP data, lambda ~ U[lambda_lo, lambda_hi] per replicate.
  std::vector<double> alphas;
  double lambda_lo = 0.1;
  double lambda_hi = 0.3;
  double exp_weight = 0.5;
  std::size_t n = 10000;
  double hill_tail_fraction = 0.1;

  // selection study
  std::vector<SelectionRow> rows;

  SelectConfig select{};

  void validate() const;
};

struct Quantiles {
  double min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
  double iqr() const { return q75 - q25; }
};

/// Type-7 (linear interpolation) quantiles; empty input gives all-NaN.
Quantiles quantiles(std::vector<double> values);

struct EstimateRecord {
  std::size_t grid_index = 0;
  int replicate = 0;
  double true_alpha = 0;
  double true_lambda = 0;
  std::optional<double> mle_alpha;
  std::optional<double> mle_lambda;
  std::optional<double> mle_pareto_weight;
  std::optional<double> hill_alpha;
  std::string error;
};

struct GridSummary {
  double true_alpha = 0;
  Quantiles mle;
  Quantiles hill;
  double median_rel_error = 0;  ///< median |alpha_hat / alpha - 1| for the MLE
  int estimates = 0;
  int failures = 0;
};

struct SelectionRecord {
  std::size_t row = 0;
  std::size_t n = 0;
  int replicate = 0;
  std::optional<double> log_bf;  ///< natural log BF of the comparison (larger vs smaller)
  std::optional<ModelKind> chosen;
  std::string error;
};

struct RowSummary {
  std::size_t row = 0;
  std::string name;
  std::size_t n = 0;
  double median_log_bf = 0;    ///< natural log, larger vs smaller model
  double median_log10_bf = 0;
  double median_evidence_log10 = 0;  ///< signed towards the truth
  Strength median_strength = Strength::negligible;
  std::optional<Strength> expected;
  bool meets_expected = false;
  int chosen_p = 0, chosen_ep = 0, chosen_eep = 0;
  int failures = 0;
};

struct ExperimentReport {
  ExperimentPlan plan;
  std::vector<EstimateRecord> estimates;
  std::vector<GridSummary> grid;
  std::vector<SelectionRecord> selections;
  std::vector<RowSummary> rows;
  double runtime_seconds = 0;  ///< wall time; kept out of serialized reports
};

/// Replicates are independent and run in parallel; output order is fixed by
/// (grid point, replicate) so the report is reproducible for a given seed.
ExperimentReport run_alpha_recovery(const ExperimentPlan& plan);
ExperimentReport run_selection_study(const ExperimentPlan& plan);
ExperimentReport run_experiment(const ExperimentPlan& plan);

/// Truth parameters used by the built-in selection rows.
MixtureParams standard_ep_truth();
MixtureParams standard_eep_truth();

/// fig2-desk, fig2-paper, table2-desk, table2-paper.
std::vector<std::string> preset_names();
/// Throws DataError listing the valid names for an unknown preset.
ExperimentPlan preset_plan(const std::string& name);

}  // namespace tailmix
