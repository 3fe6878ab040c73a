#include "tailmix/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include "tailmix/rng.hpp"

namespace tailmix {
namespace {

constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kFitTag = 0xf17;
constexpr std::uint64_t kParamTag = 0x9a2a;

double hill_sorted_desc(std::vector<double>& xs, double tail_fraction) {
  if (xs.size() < 50) throw DataError("hill_estimate: need at least 50 observations");
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("hill_estimate: tail_fraction must be in (0, 1]");
  auto k = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(xs.size())));
  k = std::min(k, xs.size() - 1);
  if (k < 10) throw DataError("hill_estimate: tail fraction leaves fewer than 10 order statistics");
  std::sort(xs.begin(), xs.end(), std::greater<>());
  const double threshold = xs[k];
  if (!(threshold > 0.0)) throw DataError("hill_estimate: nonpositive order statistic");
  double sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) sum += std::log(xs[i] / threshold);
  if (!(sum > 0.0)) throw DataError("hill_estimate: degenerate tail (top order statistics are all equal)");
  return 1.0 + static_cast<double>(k) / sum;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelKind larger_model(Comparison c) { return c == Comparison::ep_vs_p ? ModelKind::EP : ModelKind::EEP; }

}  // namespace

double hill_estimate(std::span<const double> sample, double tail_fraction) {
  std::vector<double> xs(sample.begin(), sample.end());
  return hill_sorted_desc(xs, tail_fraction);
}

double hill_estimate(std::span<const std::int64_t> sample, double tail_fraction) {
  std::vector<double> xs(sample.size());
  std::transform(sample.begin(), sample.end(), xs.begin(), [](std::int64_t v) { return static_cast<double>(v); });
  return hill_sorted_desc(xs, tail_fraction);
}

std::string_view to_string(ExperimentKind k) {
  return k == ExperimentKind::alpha_recovery ? "alpha_recovery" : "selection_study";
}

std::string_view to_string(Comparison c) { return c == Comparison::ep_vs_p ? "EP_vs_P" : "EEP_vs_EP"; }

void ExperimentPlan::validate() const {
  if (replicates < 1) throw DataError("plan '" + name + "': replicates must be >= 1");
  if (kind == ExperimentKind::alpha_recovery) {
    if (alphas.empty()) throw DataError("plan '" + name + "': alpha grid is empty");
    if (n < 50) throw DataError("plan '" + name + "': n must be >= 50");
    if (!(lambda_lo > 0.0 && lambda_lo <= lambda_hi)) throw DataError("plan '" + name + "': bad lambda range");
    if (!(exp_weight > 0.0 && exp_weight < 1.0)) throw DataError("plan '" + name + "': exp_weight must be in (0, 1)");
  } else {
    if (rows.empty()) throw DataError("plan '" + name + "': no selection rows");
    for (const auto& r : rows) {
      if (r.sample_sizes.empty()) throw DataError("plan '" + name + "': row '" + r.name + "' has no sample sizes");
      if (!r.expected.empty() && r.expected.size() != r.sample_sizes.size())
        throw DataError("plan '" + name + "': row '" + r.name + "' expected strengths do not match sample sizes");
      tailmix::validate(ModelSpec::of(r.truth), r.truth_params);
    }
  }
}

Quantiles quantiles(std::vector<double> v) {
  Quantiles q;
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan, nan, nan};
  }
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  q.min = v.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = v.back();
  return q;
}

ExperimentReport run_alpha_recovery(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.kind != ExperimentKind::alpha_recovery) throw DataError("run_alpha_recovery: plan is not an alpha-recovery plan");
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t reps = static_cast<std::size_t>(plan.replicates);
  const std::size_t tasks = plan.alphas.size() * reps;
  const ModelSpec spec = ModelSpec::of(ModelKind::EP, ExpMode::discrete);

  ExperimentReport report;
  report.plan = plan;
  report.estimates.resize(tasks);

  const auto n_tasks = static_cast<std::int64_t>(tasks);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < n_tasks; ++t) {
    const auto g = static_cast<std::size_t>(t) / reps;
    const auto r = static_cast<std::size_t>(t) % reps;
    EstimateRecord& rec = report.estimates[static_cast<std::size_t>(t)];
    rec.grid_index = g;
    rec.replicate = static_cast<int>(r);
    rec.true_alpha = plan.alphas[g];
    try {
      Rng prng(derive_seed(plan.seed, {kParamTag, g, r}));
      rec.true_lambda = prng.uniform(plan.lambda_lo, plan.lambda_hi);
      const MixtureParams truth{{plan.exp_weight, 1.0 - plan.exp_weight}, {rec.true_lambda}, rec.true_alpha};
      BinnedSeries series;
      series.counts = sample_mixture(spec, truth, plan.n, derive_seed(plan.seed, {kDataTag, g, r}));
      series.source_id = "alpha-recovery";

      try {
        rec.hill_alpha = hill_estimate(std::span<const std::int64_t>(series.counts), plan.hill_tail_fraction);
      } catch (const Error& e) {
        rec.error = std::string("hill: ") + e.what();
      }
      FitConfig fc = plan.select.fit;
      fc.seed = derive_seed(plan.seed, {kFitTag, g, r});
      const FittedModel fm = fit_mle(series, spec, fc);
      rec.mle_alpha = fm.params.alpha;
      rec.mle_lambda = fm.params.lambdas[0];
      rec.mle_pareto_weight = fm.params.pareto_weight();
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  for (std::size_t g = 0; g < plan.alphas.size(); ++g) {
    GridSummary s;
    s.true_alpha = plan.alphas[g];
    std::vector<double> mle, hill, rel;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rec = report.estimates[g * reps + r];
      if (rec.mle_alpha) {
        mle.push_back(*rec.mle_alpha);
        rel.push_back(std::abs(*rec.mle_alpha / s.true_alpha - 1.0));
      } else {
        ++s.failures;
      }
      if (rec.hill_alpha) hill.push_back(*rec.hill_alpha);
    }
    s.estimates = static_cast<int>(mle.size());
    s.mle = quantiles(mle);
    s.hill = quantiles(hill);
    s.median_rel_error = quantiles(rel).median;
    report.grid.push_back(s);
  }
  report.runtime_seconds = seconds_since(t0);
  return report;
}

ExperimentReport run_selection_study(const ExperimentPlan& plan) {
  plan.validate();
  if (plan.kind != ExperimentKind::selection_study) throw DataError("run_selection_study: plan is not a selection plan");
  const auto t0 = std::chrono::steady_clock::now();

  struct Cell {
    std::size_t row, size_index;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < plan.rows.size(); ++i)
    for (std::size_t j = 0; j < plan.rows[i].sample_sizes.size(); ++j) cells.push_back({i, j});

  const auto reps = static_cast<std::size_t>(plan.replicates);
  ExperimentReport report;
  report.plan = plan;
  report.selections.resize(cells.size() * reps);

  const auto n_tasks = static_cast<std::int64_t>(report.selections.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t t = 0; t < n_tasks; ++t) {
    const Cell& cell = cells[static_cast<std::size_t>(t) / reps];
    const auto r = static_cast<std::size_t>(t) % reps;
    const SelectionRow& row = plan.rows[cell.row];
    SelectionRecord& rec = report.selections[static_cast<std::size_t>(t)];
    rec.row = cell.row;
    rec.n = row.sample_sizes[cell.size_index];
    rec.replicate = static_cast<int>(r);
    try {
      const ModelSpec truth_spec = ModelSpec::of(row.truth, ExpMode::discrete);
      BinnedSeries series;
      series.counts = sample_mixture(truth_spec, row.truth_params, rec.n,
                                     derive_seed(plan.seed, {kDataTag, cell.row, rec.n, r}));
      series.source_id = row.name;
      SelectConfig sc = plan.select;
      sc.exp_mode = ExpMode::discrete;
      sc.fit.seed = derive_seed(plan.seed, {kFitTag, cell.row, rec.n, r});
      const SelectionResult sel = select_nested(series, sc);
      rec.chosen = sel.chosen;
      if (row.comparison == Comparison::ep_vs_p) {
        rec.log_bf = sel.log_bf_ep_p;
      } else if (sel.log_bf_eep_ep) {
        rec.log_bf = *sel.log_bf_eep_ep;
      } else {
        // Selection stopped at P; the comparison still needs an EEP fit.
        const ModelSpec eep = ModelSpec::of(ModelKind::EEP, ExpMode::discrete);
        std::vector<MixtureParams> warm{embed_nested(sel.ep, eep, sc.fit)};
        rec.log_bf = log_bayes_factor(fit_mle(series, eep, sc.fit, warm), sel.ep);
      }
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  }

  for (std::size_t c = 0; c < cells.size(); ++c) {
    const SelectionRow& row = plan.rows[cells[c].row];
    const bool truth_is_larger = row.truth == larger_model(row.comparison);
    RowSummary s;
    s.row = cells[c].row;
    s.name = row.name;
    s.n = row.sample_sizes[cells[c].size_index];
    if (!row.expected.empty()) s.expected = row.expected[cells[c].size_index];
    std::vector<double> bfs;
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& rec = report.selections[c * reps + r];
      if (!rec.log_bf) {
        ++s.failures;
        continue;
      }
      bfs.push_back(*rec.log_bf);
      if (rec.chosen) {
        if (*rec.chosen == ModelKind::P) ++s.chosen_p;
        if (*rec.chosen == ModelKind::EP) ++s.chosen_ep;
        if (*rec.chosen == ModelKind::EEP) ++s.chosen_eep;
      }
    }
    s.median_log_bf = quantiles(bfs).median;
    s.median_log10_bf = s.median_log_bf / std::log(10.0);
    s.median_evidence_log10 = truth_is_larger ? s.median_log10_bf : -s.median_log10_bf;
    const StrengthLabel label = strength_label(s.median_evidence_log10, LogBase::log10);
    s.median_strength = label.strength;
    s.meets_expected = !s.expected || (label.sign > 0 && label.strength >= *s.expected);
    report.rows.push_back(s);
  }
  report.runtime_seconds = seconds_since(t0);
  return report;
}

ExperimentReport run_experiment(const ExperimentPlan& plan) {
  return plan.kind == ExperimentKind::alpha_recovery ? run_alpha_recovery(plan) : run_selection_study(plan);
}

MixtureParams standard_ep_truth() { return {{0.5, 0.5}, {0.2}, 1.6}; }

MixtureParams standard_eep_truth() { return {{0.3, 0.4, 0.3}, {1.5, 0.15}, 1.6}; }

std::vector<std::string> preset_names() { return {"fig2-desk", "fig2-paper", "table2-desk", "table2-paper"}; }

ExperimentPlan preset_plan(const std::string& name) {
  ExperimentPlan plan;
  plan.name = name;
  plan.seed = 20100101;
  if (name == "fig2-desk" || name == "fig2-paper") {
    plan.kind = ExperimentKind::alpha_recovery;
    if (name == "fig2-desk") {
      plan.alphas = {1.2, 1.4, 1.6, 1.8, 2.0};
      plan.replicates = 20;
    } else {
      plan.alphas = {1.125, 1.25, 1.375, 1.5, 1.625, 1.75, 1.875, 2.0};
      plan.replicates = 100;
    }
    plan.n = 10000;
    return plan;
  }
  if (name == "table2-desk" || name == "table2-paper") {
    plan.kind = ExperimentKind::selection_study;
    plan.replicates = name == "table2-desk" ? 20 : 100;
    plan.rows = {
        {"EP truth, EP vs P", ModelKind::EP, standard_ep_truth(), Comparison::ep_vs_p, {1000, 5000},
         {Strength::substantial, Strength::decisive}},
        {"EP truth, EEP vs EP", ModelKind::EP, standard_ep_truth(), Comparison::eep_vs_ep, {1000, 10000},
         {Strength::substantial, Strength::strong}},
        {"EEP truth, EEP vs EP", ModelKind::EEP, standard_eep_truth(), Comparison::eep_vs_ep, {9000},
         {Strength::substantial}},
    };
    return plan;
  }
  std::ostringstream os;
  os << "unknown preset '" << name << "'; valid presets:";
  for (const auto& p : preset_names()) os << ' ' << p;
  throw DataError(os.str());
}

}  // namespace tailmix
