#pragma once

// Log-likelihood and gradient kernels.
//
// The gradient is taken with respect to the free parameter layout used by the
// optimizer: [m_1 .. m_k, lambda_1 .. lambda_k, alpha] with k = n_exp and the
// Pareto weight implied as 1 - sum(m_i).
//
// `serial` walks every observation and is kept as the reference. `omp` works
// on the histogram of distinct counts, splits it into fixed-size chunks and
// reduces the chunk partials in chunk order, so its result does not depend on
// the number of OpenMP threads.

#include <cstdint>
#include <span>
#include <vector>

#include "tailmix/mixture.hpp"

namespace tailmix {

struct CountHistogram {
  std::vector<double> values;        ///< distinct counts, ascending
  std::vector<double> log_values;    ///< log of each distinct count
  std::vector<double> multiplicity;  ///< occurrences of each distinct count
  std::int64_t total = 0;            ///< number of observations

  /// Throws DataError naming the first index whose count is below x_min.
  static CountHistogram from(std::span<const std::int64_t> counts, std::int64_t x_min);

  std::size_t distinct() const { return values.size(); }
};

struct LikelihoodEval {
  double loglik = 0.0;
  std::vector<double> grad;  ///< empty unless requested
};

namespace serial {
LikelihoodEval loglik_grad(std::span<const std::int64_t> counts, const ModelSpec& spec,
                           const MixtureParams& theta, bool with_grad);
}  // namespace serial

namespace omp {
inline constexpr std::size_t kChunk = 256;

LikelihoodEval loglik_grad(const CountHistogram& hist, const ModelSpec& spec, const MixtureParams& theta,
                           bool with_grad);
}  // namespace omp

}  // namespace tailmix
