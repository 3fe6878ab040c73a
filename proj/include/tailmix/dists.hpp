#pragma once

// Component densities on the positive integers: discrete Pareto (Zeta law)
// and discrete exponential, plus their samplers.

#include <cstdint>
#include <string_view>
#include <vector>

#include "tailmix/rng.hpp"

namespace tailmix {

/// How the exponential component is evaluated.
///  - discrete: (1 - e^-lambda) e^(-lambda (x - x_min)), a geometric pmf.
///  - paper_literal: lambda e^(-lambda x), the continuous density sampled at
///    integers. Not normalized; kept for comparison with the printed formulas.
enum class ExpMode { discrete, paper_literal };

std::string_view to_string(ExpMode mode);
ExpMode parse_exp_mode(std::string_view text);

struct ParetoParams {
  double alpha = 2.0;
  std::int64_t x_min = 1;
};

struct ExpParams {
  double lambda = 1.0;
  ExpMode mode = ExpMode::discrete;
};

void validate(const ParetoParams& p);
void validate(const ExpParams& p);

double pareto_pmf(std::int64_t x, const ParetoParams& p);
double pareto_log_pmf(std::int64_t x, const ParetoParams& p);

/// P(X >= x) for the discrete Pareto, zeta(alpha, x) / zeta(alpha, x_min).
double pareto_survival(std::int64_t x, const ParetoParams& p);

double exp_pmf(std::int64_t x, const ExpParams& p, std::int64_t x_min = 1);
double exp_log_pmf(std::int64_t x, const ExpParams& p, std::int64_t x_min = 1);

/// Inverse-CDF sampler for the discrete Pareto.
///
/// The cumulative table is extended lazily, in blocks, only as far as the
/// largest uniform seen so far requires. It stops at cumulative mass 1 - 1e-12
/// or 2^20 entries; draws falling past the table take a rounded
/// continuous-Pareto draw conditioned on exceeding the last tabulated value.
/// Not thread-safe; use one per thread.
class ParetoSampler {
 public:
  explicit ParetoSampler(ParetoParams p);

  std::int64_t draw(Rng& rng);

  const ParetoParams& params() const { return params_; }
  std::size_t table_size() const { return cdf_.size(); }

 private:
  void extend_to(double u);
  std::int64_t draw_tail(double u);

  ParetoParams params_;
  double log_norm_ = 0.0;
  std::vector<double> cdf_;
  bool capped_ = false;
  double tail_mass_ = -1.0;  // cached survival past the table, < 0 when stale
};

/// One geometric draw on {x_min, x_min+1, ...} with P(X = x) = (1-q) q^(x-x_min), q = e^-lambda.
std::int64_t draw_geometric(double lambda, std::int64_t x_min, Rng& rng);

std::vector<std::int64_t> sample_pareto(const ParetoParams& p, std::size_t n, std::uint64_t seed,
                                        std::uint64_t stream = 0);

/// Throws UnsupportedError for ExpMode::paper_literal.
std::vector<std::int64_t> sample_exp(const ExpParams& p, std::int64_t x_min, std::size_t n,
                                     std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace tailmix
