#pragma once

// Constrained maximum likelihood for the mixture family via a log-barrier
// continuation with a quasi-Newton inner solver and random restarts.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tailmix/error.hpp"
#include "tailmix/kernels.hpp"
#include "tailmix/mixture.hpp"

namespace tailmix {

/// Decreasing barrier weights, one inner solve per entry.
struct BarrierSchedule {
  std::vector<double> weights{1e-2, 1e-5, 1e-8};

  /// `steps` weights spaced geometrically from `first` down to `last`.
  static BarrierSchedule geometric(double first, double last, int steps);
  void validate() const;
};

struct FitConfig {
  int restarts = 20;
  double alpha_max = 4.0;
  double lambda_max = 3.5;
  double inner_tol = 1e-6;
  int max_inner_iters = 500;
  std::uint64_t seed = 0;
  BarrierSchedule schedule{};

  void validate() const;
};

struct FitDiagnostics {
  int best_restart = -1;      ///< index into random restarts, then warm starts
  bool converged = false;     ///< final-stage inner solve met inner_tol
  double grad_norm = 0.0;     ///< max-norm of the per-observation objective gradient
  double barrier_residual = 0.0;  ///< |c * barrier| at the solution, final stage
  int inner_iterations = 0;   ///< summed over the stages of the best restart
  int failed_restarts = 0;
};

struct FittedModel {
  ModelSpec spec;
  MixtureParams params;
  double loglik = 0.0;
  double bic = 0.0;
  std::int64_t n = 0;
  std::uint64_t series_digest = 0;
  FitDiagnostics diagnostics;
};

/// Thrown when no restart produced a feasible solution.
class FitError : public Error {
 public:
  FitError(const std::string& what, FitDiagnostics diag) : Error(what), diagnostics(diag) {}
  FitDiagnostics diagnostics;
};

struct ObjectiveValue {
  double value = 0.0;
  std::vector<double> grad;  ///< d value / d free params; empty when infeasible
};

/// Free parameters [m_1..m_k, lambda_1..lambda_k, alpha]; Pareto weight implied.
std::vector<double> to_free(const ModelSpec& spec, const MixtureParams& theta);
MixtureParams from_free(const ModelSpec& spec, std::span<const double> free);

/// True when every barrier argument is strictly positive.
bool strictly_feasible(const ModelSpec& spec, std::span<const double> free, const FitConfig& cfg);

/// l(theta) + c * sum of log barrier arguments:
///   m_i, 1 - sum m_i, alpha - 1, alpha_max - alpha, lambda_i, lambda_max - lambda_i,
///   and lambda_1 - lambda_2 for EEP.
/// Returns -inf (and an empty gradient) outside the open feasible region.
ObjectiveValue penalized_objective(const CountHistogram& hist, const ModelSpec& spec,
                                   std::span<const double> free, double c, const FitConfig& cfg);
ObjectiveValue penalized_objective(const BinnedSeries& series, const ModelSpec& spec,
                                   std::span<const double> free, double c, const FitConfig& cfg = {});

/// Random strictly feasible start: weights from a flat Dirichlet clipped to
/// [0.02, 0.98], rates U[0.05, 3.0], alpha U[1.1, 3.5].
MixtureParams random_init(const ModelSpec& spec, std::uint64_t seed, std::uint64_t restart_index = 0);

/// Maximum-likelihood fit. `warm_starts` are extra starting points run after
/// the random restarts (infeasible ones are skipped). Restarts run in
/// parallel; the best raw log-likelihood wins, ties to the lowest index.
FittedModel fit_mle(const BinnedSeries& series, const ModelSpec& spec, const FitConfig& cfg = {},
                    std::span<const MixtureParams> warm_starts = {});

/// Starting point for `larger` that reproduces a fit of the next-smaller model
/// (P -> EP adds a small exponential; EP -> EEP splits the exponential).
MixtureParams embed_nested(const FittedModel& smaller, const ModelSpec& larger, const FitConfig& cfg);

}  // namespace tailmix
