#include <omp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <sstream>

#include "tailmix/detail/components.hpp"
#include "tailmix/error.hpp"
#include "tailmix/kernels.hpp"

namespace tailmix {

CountHistogram CountHistogram::from(std::span<const std::int64_t> counts, std::int64_t x_min) {
  std::map<std::int64_t, double> tally;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] < x_min) {
      std::ostringstream os;
      os << "count " << counts[j] << " at index " << j << " is below x_min = " << x_min;
      throw DataError(os.str());
    }
    tally[counts[j]] += 1.0;
  }
  CountHistogram h;
  h.values.reserve(tally.size());
  h.log_values.reserve(tally.size());
  h.multiplicity.reserve(tally.size());
  for (const auto& [value, mult] : tally) {
    const double v = static_cast<double>(value);
    h.values.push_back(v);
    h.log_values.push_back(std::log(v));
    h.multiplicity.push_back(mult);
  }
  h.total = static_cast<std::int64_t>(counts.size());
  return h;
}

namespace omp {
namespace {

// loglik followed by up to 5 gradient slots.
using Partial = std::array<double, 6>;

void accumulate_chunk(const CountHistogram& hist, const detail::ComponentTable& table, std::size_t begin,
                      std::size_t end, bool with_grad, Partial& acc) {
  const int k = table.n_exp;
  const double inv_m_pareto = std::exp(-table.log_weight[k]);
  std::array<double, detail::kMaxComponents> terms{};
  for (std::size_t j = begin; j < end; ++j) {
    const double x = hist.values[j];
    const double lx = hist.log_values[j];
    const double w = hist.multiplicity[j];
    const double log_f = table.log_terms(x, lx, terms.data());
    acc[0] += w * log_f;
    if (!with_grad) continue;
    const double r_pareto = std::exp(terms[k] - log_f);
    for (int i = 0; i < k; ++i) {
      const double r = std::exp(terms[i] - log_f);
      acc[1 + i] += w * (r * std::exp(-table.log_weight[i]) - r_pareto * inv_m_pareto);
      const double dlog = table.dlog_norm[i] - (x - table.exp_origin);
      acc[1 + k + i] += w * r * dlog;
    }
    acc[1 + 2 * k] += w * r_pareto * (-lx - table.dlog_zeta);
  }
}

}  // namespace

LikelihoodEval loglik_grad(const CountHistogram& hist, const ModelSpec& spec, const MixtureParams& theta,
                           bool with_grad) {
  validate(spec, theta);
  const detail::ComponentTable table(spec, theta, with_grad);
  const std::size_t n = hist.distinct();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Partial> partial(chunks, Partial{});

  const auto n_chunks = static_cast<std::int64_t>(chunks);
#pragma omp parallel for schedule(static) if (chunks > 1 && !omp_in_parallel())
  for (std::int64_t c = 0; c < n_chunks; ++c) {
    const auto begin = static_cast<std::size_t>(c) * kChunk;
    accumulate_chunk(hist, table, begin, std::min(n, begin + kChunk), with_grad, partial[static_cast<std::size_t>(c)]);
  }

  Partial sum{};
  for (const auto& p : partial)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += p[i];

  LikelihoodEval out;
  out.loglik = sum[0];
  if (with_grad) out.grad.assign(sum.begin() + 1, sum.begin() + 1 + spec.dof());
  return out;
}

}  // namespace omp
}  // namespace tailmix
