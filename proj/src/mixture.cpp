#include "tailmix/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tailmix/detail/components.hpp"
#include "tailmix/error.hpp"
#include "tailmix/kernels.hpp"

namespace tailmix {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::P:
      return "P";
    case ModelKind::EP:
      return "EP";
    case ModelKind::EEP:
      return "EEP";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "P") return ModelKind::P;
  if (text == "EP") return ModelKind::EP;
  if (text == "EEP") return ModelKind::EEP;
  throw DataError("unknown model label '" + std::string(text) + "' (expected P, EP or EEP)");
}

ModelSpec ModelSpec::of(ModelKind kind, ExpMode mode, std::int64_t x_min) {
  ModelSpec s;
  s.n_exp = kind == ModelKind::P ? 0 : (kind == ModelKind::EP ? 1 : 2);
  s.has_pareto = true;
  s.x_min = x_min;
  s.exp_mode = mode;
  return s;
}

ModelKind ModelSpec::kind() const {
  validate(*this);
  return n_exp == 0 ? ModelKind::P : (n_exp == 1 ? ModelKind::EP : ModelKind::EEP);
}

void validate(const ModelSpec& spec) {
  if (!spec.has_pareto || spec.n_exp < 0 || spec.n_exp > 2)
    throw ContractError("model spec must be P, EP or EEP (0-2 exponentials plus a Pareto tail)");
  if (spec.x_min < 1) throw DomainError("model spec x_min must be >= 1");
}

void validate(const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec);
  const auto k = static_cast<std::size_t>(spec.n_exp);
  if (theta.weights.size() != k + 1 || theta.lambdas.size() != k) {
    std::ostringstream os;
    os << spec.label() << " expects " << k + 1 << " weights and " << k << " rates, got "
       << theta.weights.size() << " and " << theta.lambdas.size();
    throw ContractError(os.str());
  }
  double total = 0.0;
  for (double w : theta.weights) {
    if (!std::isfinite(w) || w < 0.0) throw DomainError("mixing weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "mixing weights must sum to 1, got " << total;
    throw DomainError(os.str());
  }
  for (double l : theta.lambdas) validate(ExpParams{l, spec.exp_mode});
  validate(ParetoParams{theta.alpha, spec.x_min});
}

MixtureParams canonicalize(const ModelSpec& spec, MixtureParams theta) {
  if (spec.n_exp == 2 && theta.lambdas[0] < theta.lambdas[1]) {
    std::swap(theta.lambdas[0], theta.lambdas[1]);
    std::swap(theta.weights[0], theta.weights[1]);
  }
  return theta;
}

std::uint64_t series_digest(std::span<const std::int64_t> counts) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::int64_t c : counts) {
    auto v = static_cast<std::uint64_t>(c);
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFFu;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

double mixture_log_pmf(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec, theta);
  if (x < spec.x_min) {
    std::ostringstream os;
    os << "mixture_pmf: x = " << x << " is below x_min = " << spec.x_min;
    throw DomainError(os.str());
  }
  const detail::ComponentTable table(spec, theta, false);
  std::array<double, detail::kMaxComponents> terms{};
  const double xd = static_cast<double>(x);
  return table.log_terms(xd, std::log(xd), terms.data());
}

double mixture_pmf(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta) {
  return std::exp(mixture_log_pmf(x, spec, theta));
}

double log_likelihood(const BinnedSeries& series, const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec, theta);
  if (series.counts.empty()) throw DataError("log_likelihood: series is empty");
  const auto hist = CountHistogram::from(series.counts, spec.x_min);
  return omp::loglik_grad(hist, spec, theta, false).loglik;
}

std::vector<double> responsibilities(std::int64_t x, const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec, theta);
  if (x < spec.x_min) {
    std::ostringstream os;
    os << "responsibilities: x = " << x << " is below x_min = " << spec.x_min;
    throw DomainError(os.str());
  }
  const detail::ComponentTable table(spec, theta, false);
  std::array<double, detail::kMaxComponents> terms{};
  const double xd = static_cast<double>(x);
  const double log_f = table.log_terms(xd, std::log(xd), terms.data());
  std::vector<double> r(static_cast<std::size_t>(table.components()));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(terms[i] - log_f);
  return r;
}

std::int64_t tail_threshold(const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec, theta);
  if (spec.n_exp == 0) throw UnsupportedError("tail_threshold: a Pareto-only model has no regime boundary");
  if (theta.pareto_weight() <= 0.0) throw DomainError("tail_threshold: Pareto weight must be positive");

  const detail::ComponentTable table(spec, theta, false);
  std::array<double, detail::kMaxComponents> terms{};
  auto in_tail = [&](std::int64_t x) {
    const double xd = static_cast<double>(x);
    const double log_f = table.log_terms(xd, std::log(xd), terms.data());
    return terms[static_cast<std::size_t>(spec.n_exp)] - log_f >= std::log(0.5);
  };

  // Past alpha / min(lambda) every exponential-to-Pareto ratio is falling, so
  // the Pareto responsibility only grows from there on.
  const double lambda_min = *std::min_element(theta.lambdas.begin(), theta.lambdas.end());
  constexpr std::int64_t kLimit = std::int64_t{1} << 60;
  const double bend = std::ceil(theta.alpha / lambda_min);
  const std::int64_t xc = std::max(spec.x_min, bend >= static_cast<double>(kLimit) ? kLimit : static_cast<std::int64_t>(bend));

  if (in_tail(xc)) {
    std::int64_t x = xc;
    while (x > spec.x_min && in_tail(x - 1)) --x;
    return x;
  }
  std::int64_t lo = xc, hi = xc;
  while (!in_tail(hi)) {
    if (hi >= kLimit) throw DomainError("tail_threshold: no crossing found");
    lo = hi;
    hi = std::min(kLimit, hi * 2);
  }
  while (hi - lo > 1) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    (in_tail(mid) ? hi : lo) = mid;
  }
  return hi;
}

std::vector<std::int64_t> sample_mixture(const ModelSpec& spec, const MixtureParams& theta, std::size_t n,
                                         std::uint64_t seed, std::uint64_t stream) {
  validate(spec, theta);
  if (spec.exp_mode != ExpMode::discrete)
    throw UnsupportedError("sample_mixture: the paper-literal mixture is not a pmf and cannot be sampled");
  if (n == 0) throw DataError("sample_mixture: n must be >= 1");

  std::vector<double> cumulative(theta.weights.size());
  std::partial_sum(theta.weights.begin(), theta.weights.end(), cumulative.begin());
  const double total = cumulative.back();

  ParetoSampler pareto(ParetoParams{theta.alpha, spec.x_min});
  Rng rng(seed, stream);
  std::vector<std::int64_t> out(n);
  const std::size_t pareto_index = theta.weights.size() - 1;
  for (auto& x : out) {
    const double u = rng.uniform() * total;
    std::size_t c = 0;
    while (c < pareto_index && !(u < cumulative[c])) ++c;
    // Zero-weight components are never selected.
    while (theta.weights[c] <= 0.0 && c > 0) --c;
    x = c == pareto_index ? pareto.draw(rng) : draw_geometric(theta.lambdas[c], spec.x_min, rng);
  }
  return out;
}

}  // namespace tailmix
