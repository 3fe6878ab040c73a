#pragma once

// The nested mixture family P / EP / EEP: pmf, likelihood, responsibilities,
// tail threshold and hierarchical sampling.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailmix/dists.hpp"

namespace tailmix {

enum class ModelKind { P, EP, EEP };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
  int n_exp = 1;  ///< 0, 1 or 2 exponential components
  bool has_pareto = true;
  std::int64_t x_min = 1;
  ExpMode exp_mode = ExpMode::discrete;

  static ModelSpec of(ModelKind kind, ExpMode mode = ExpMode::discrete, std::int64_t x_min = 1);

  ModelKind kind() const;
  std::string label() const { return std::string(to_string(kind())); }
  int components() const { return n_exp + 1; }
  /// Free parameters: one rate per exponential, the tail exponent, and k-1 weights.
  int dof() const { return 2 * n_exp + 1; }

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void validate(const ModelSpec& spec);

/// Component order is [exponentials..., pareto] in both `weights` and
/// responsibilities. For EEP the canonical ordering is lambdas[0] >= lambdas[1].
struct MixtureParams {
  std::vector<double> weights;
  std::vector<double> lambdas;
  double alpha = 2.0;

  double pareto_weight() const { return weights.back(); }
};

/// Throws ContractError on length mismatch, DomainError on out-of-range values.
void validate(const ModelSpec& spec, const MixtureParams& theta);

/// Sorts EEP components by decreasing rate (label-switching canonical form).
MixtureParams canonicalize(const ModelSpec& spec, MixtureParams theta);

struct BinnedSeries {
  std::vector<std::int64_t> counts;
  double bin_seconds = 0.0;
  std::string source_id;

  std::size_t n() const { return counts.size(); }
};

/// FNV-1a digest of the counts; identifies "the same series" for Bayes-factor checks.
std::uint64_t series_digest(std::span<const std::int64_t> counts);

double mixture_log_pmf(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta);
double mixture_pmf(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta);

/// Sum of log mixture_pmf over the series. Throws DataError naming the first
/// index whose count is below x_min.
double log_likelihood(const BinnedSeries& series, const ModelSpec& spec, const MixtureParams& theta);

/// Posterior component probabilities m_i f_i(x) / f(x), ordered as the weights.
std::vector<double> responsibilities(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta);

/// Start of the tail regime: the smallest x* >= x_min such that the Pareto
/// responsibility is at least 0.5 at x* and at every larger count.
/// Throws UnsupportedError for a P-only spec.
std::int64_t tail_threshold(const ModelSpec& spec, const MixtureParams& theta);

/// Draws the component from the categorical law `weights`, then the value
/// from that component. Throws UnsupportedError in paper-literal mode.
std::vector<std::int64_t> sample_mixture(const ModelSpec& spec, const MixtureParams& theta, std::size_t n,
                                         std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace tailmix
