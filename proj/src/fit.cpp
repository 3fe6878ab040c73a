#include "tailmix/fit.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailmix/bfgs.hpp"
#include "tailmix/rng.hpp"
#include "tailmix/zeta.hpp"

namespace tailmix {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kInitStream = 0x1d17;

struct RestartOutcome {
  bool ok = false;
  std::vector<double> free;
  double loglik = kNegInf;
  double grad_norm = 0.0;
  double barrier_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Sum of log barrier arguments and its gradient; -inf when any argument is <= 0.
double barrier(const ModelSpec& spec, std::span<const double> free, const FitConfig& cfg, std::vector<double>* grad) {
  const int k = spec.n_exp;
  double total = 0.0;
  double m_sum = 0.0;
  auto add = [&](double arg) {
    if (!(arg > 0.0)) return false;
    total += std::log(arg);
    return true;
  };
  for (int i = 0; i < k; ++i) {
    const double m = free[static_cast<std::size_t>(i)];
    if (!add(m)) return kNegInf;
    m_sum += m;
  }
  const double m_pareto = 1.0 - m_sum;
  if (!add(m_pareto)) return kNegInf;
  for (int i = 0; i < k; ++i) {
    const double l = free[static_cast<std::size_t>(k + i)];
    if (!add(l) || !add(cfg.lambda_max - l)) return kNegInf;
  }
  if (k == 2 && !add(free[2] - free[3])) return kNegInf;
  const double alpha = free[static_cast<std::size_t>(2 * k)];
  if (!(alpha > kMinZetaExponent)) return kNegInf;
  if (!add(alpha - 1.0) || !add(cfg.alpha_max - alpha)) return kNegInf;

  if (grad) {
    grad->assign(free.size(), 0.0);
    for (int i = 0; i < k; ++i) (*grad)[static_cast<std::size_t>(i)] = 1.0 / free[static_cast<std::size_t>(i)] - 1.0 / m_pareto;
    for (int i = 0; i < k; ++i) {
      const double l = free[static_cast<std::size_t>(k + i)];
      (*grad)[static_cast<std::size_t>(k + i)] = 1.0 / l - 1.0 / (cfg.lambda_max - l);
    }
    if (k == 2) {
      const double gap = 1.0 / (free[2] - free[3]);
      (*grad)[2] += gap;
      (*grad)[3] -= gap;
    }
    (*grad)[static_cast<std::size_t>(2 * k)] = 1.0 / (alpha - 1.0) - 1.0 / (cfg.alpha_max - alpha);
  }
  return total;
}

MixtureParams clamp_to_box(const ModelSpec& spec, MixtureParams theta, const FitConfig& cfg) {
  theta.alpha = std::min(theta.alpha, 1.0 + 0.9 * (cfg.alpha_max - 1.0));
  for (double& l : theta.lambdas) l = std::min(l, 0.9 * cfg.lambda_max);
  if (spec.n_exp == 2 && !(theta.lambdas[0] > theta.lambdas[1])) theta.lambdas[1] = 0.5 * theta.lambdas[0];
  return theta;
}

RestartOutcome run_continuation(const CountHistogram& hist, const ModelSpec& spec, std::vector<double> x,
                                const FitConfig& cfg) {
  RestartOutcome out;
  if (!strictly_feasible(spec, x, cfg)) return out;
  const double inv_n = 1.0 / static_cast<double>(hist.total);
  BfgsOptions opt;
  opt.grad_tol = cfg.inner_tol;
  opt.max_iters = cfg.max_inner_iters;

  double c = 0.0;
  for (double weight : cfg.schedule.weights) {
    c = weight;
    // Minimize the negated per-observation objective; the maximizer is unchanged.
    const Objective stage = [&](std::span<const double> p, std::span<double> g) {
      const ObjectiveValue v = penalized_objective(hist, spec, p, c, cfg);
      if (!std::isfinite(v.value)) return std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] = -v.grad[i] * inv_n;
      return -v.value * inv_n;
    };
    BfgsResult r = minimize_bfgs(stage, x, opt);
    if (!std::isfinite(r.value)) return out;
    x = std::move(r.x);
    out.iterations += r.iterations;
    out.grad_norm = r.grad_norm;
    out.converged = r.converged;
  }
  if (!strictly_feasible(spec, x, cfg)) return out;
  const MixtureParams theta = from_free(spec, x);
  out.loglik = omp::loglik_grad(hist, spec, theta, false).loglik;
  out.barrier_residual = std::abs(c * barrier(spec, x, cfg, nullptr));
  out.free = std::move(x);
  out.ok = std::isfinite(out.loglik);
  return out;
}

}  // namespace

BarrierSchedule BarrierSchedule::geometric(double first, double last, int steps) {
  if (steps < 1 || !(first > 0.0) || !(last > 0.0)) throw DomainError("barrier schedule needs steps >= 1 and positive weights");
  BarrierSchedule s;
  s.weights.clear();
  if (steps == 1) {
    s.weights.push_back(last);
    return s;
  }
  const double ratio = std::log(last / first) / static_cast<double>(steps - 1);
  for (int i = 0; i < steps; ++i) s.weights.push_back(first * std::exp(ratio * static_cast<double>(i)));
  s.weights.back() = last;
  s.validate();
  return s;
}

void BarrierSchedule::validate() const {
  if (weights.empty()) throw DomainError("barrier schedule is empty");
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) throw DomainError("barrier weights must be positive");
    if (i > 0 && !(weights[i] < weights[i - 1])) throw DomainError("barrier weights must be strictly decreasing");
  }
}

void FitConfig::validate() const {
  if (restarts < 1) throw DomainError("restarts must be >= 1");
  if (!(alpha_max > 1.0)) throw DomainError("alpha_max must exceed 1");
  if (!(lambda_max > 0.0)) throw DomainError("lambda_max must be positive");
  if (!(inner_tol > 0.0)) throw DomainError("inner_tol must be positive");
  if (max_inner_iters < 1) throw DomainError("max_inner_iters must be >= 1");
  schedule.validate();
}

std::vector<double> to_free(const ModelSpec& spec, const MixtureParams& theta) {
  validate(spec, theta);
  std::vector<double> free;
  free.reserve(static_cast<std::size_t>(spec.dof()));
  for (int i = 0; i < spec.n_exp; ++i) free.push_back(theta.weights[static_cast<std::size_t>(i)]);
  for (double l : theta.lambdas) free.push_back(l);
  free.push_back(theta.alpha);
  return free;
}

MixtureParams from_free(const ModelSpec& spec, std::span<const double> free) {
  const auto k = static_cast<std::size_t>(spec.n_exp);
  if (free.size() != 2 * k + 1) throw ContractError("free parameter vector has the wrong length for " + spec.label());
  MixtureParams theta;
  double m_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    theta.weights.push_back(free[i]);
    m_sum += free[i];
  }
  theta.weights.push_back(1.0 - m_sum);
  theta.lambdas.assign(free.begin() + static_cast<std::ptrdiff_t>(k), free.begin() + static_cast<std::ptrdiff_t>(2 * k));
  theta.alpha = free[2 * k];
  return theta;
}

bool strictly_feasible(const ModelSpec& spec, std::span<const double> free, const FitConfig& cfg) {
  if (free.size() != static_cast<std::size_t>(spec.dof())) return false;
  return std::isfinite(barrier(spec, free, cfg, nullptr));
}

ObjectiveValue penalized_objective(const CountHistogram& hist, const ModelSpec& spec,
                                   std::span<const double> free, double c, const FitConfig& cfg) {
  std::vector<double> bgrad;
  const double b = barrier(spec, free, cfg, &bgrad);
  if (!std::isfinite(b)) return {kNegInf, {}};
  const MixtureParams theta = from_free(spec, free);
  LikelihoodEval ll = omp::loglik_grad(hist, spec, theta, true);
  ObjectiveValue out;
  if (c == 0.0) {
    out.value = ll.loglik;
    out.grad = std::move(ll.grad);
    return out;
  }
  out.value = ll.loglik + c * b;
  out.grad = std::move(ll.grad);
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += c * bgrad[i];
  return out;
}

ObjectiveValue penalized_objective(const BinnedSeries& series, const ModelSpec& spec,
                                   std::span<const double> free, double c, const FitConfig& cfg) {
  return penalized_objective(CountHistogram::from(series.counts, spec.x_min), spec, free, c, cfg);
}

MixtureParams random_init(const ModelSpec& spec, std::uint64_t seed, std::uint64_t restart_index) {
  validate(spec);
  Rng rng(derive_seed(seed, {kInitStream}), restart_index);
  const auto k = static_cast<std::size_t>(spec.n_exp);
  MixtureParams theta;

  std::vector<double> w(k + 1);
  for (double& v : w) v = rng.exponential();
  double total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v = std::clamp(v / total, 0.02, 0.98);
  total = 0.0;
  for (double v : w) total += v;
  for (double& v : w) v /= total;
  theta.weights = std::move(w);

  for (std::size_t i = 0; i < k; ++i) theta.lambdas.push_back(rng.uniform(0.05, 3.0));
  theta.alpha = rng.uniform(1.1, 3.5);
  if (k == 2) {
    if (theta.lambdas[0] < theta.lambdas[1]) std::swap(theta.lambdas[0], theta.lambdas[1]);
    if (theta.lambdas[0] - theta.lambdas[1] < 1e-3) theta.lambdas[0] += 1e-3;
  }
  return theta;
}

FittedModel fit_mle(const BinnedSeries& series, const ModelSpec& spec, const FitConfig& cfg,
                    std::span<const MixtureParams> warm_starts) {
  validate(spec);
  cfg.validate();
  const auto d = static_cast<std::size_t>(spec.dof());
  if (series.n() < d + 1) {
    std::ostringstream os;
    os << "fit_mle: " << spec.label() << " needs at least " << d + 1 << " observations, got " << series.n();
    throw DataError(os.str());
  }
  const CountHistogram hist = CountHistogram::from(series.counts, spec.x_min);

  const auto n_random = static_cast<std::size_t>(cfg.restarts);
  std::vector<std::vector<double>> starts;
  starts.reserve(n_random + warm_starts.size());
  for (std::size_t r = 0; r < n_random; ++r)
    starts.push_back(to_free(spec, clamp_to_box(spec, random_init(spec, cfg.seed, r), cfg)));
  for (const auto& w : warm_starts) {
    try {
      starts.push_back(to_free(spec, w));
    } catch (const Error&) {
      starts.emplace_back();  // counted as a failed restart
    }
  }

  std::vector<RestartOutcome> outcomes(starts.size());
  const auto n_starts = static_cast<std::int64_t>(starts.size());
#pragma omp parallel for schedule(dynamic) if (!omp_in_parallel())
  for (std::int64_t r = 0; r < n_starts; ++r) {
    try {
      outcomes[static_cast<std::size_t>(r)] = run_continuation(hist, spec, starts[static_cast<std::size_t>(r)], cfg);
    } catch (const std::exception&) {
      outcomes[static_cast<std::size_t>(r)] = RestartOutcome{};
    }
  }

  FitDiagnostics diag;
  std::size_t best = outcomes.size();
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    if (!outcomes[r].ok) {
      ++diag.failed_restarts;
      continue;
    }
    if (best == outcomes.size() || outcomes[r].loglik > outcomes[best].loglik) best = r;
  }
  if (best == outcomes.size()) throw FitError("fit_mle: every restart failed for " + spec.label(), diag);

  const RestartOutcome& win = outcomes[best];
  diag.best_restart = static_cast<int>(best);
  diag.converged = win.converged;
  diag.grad_norm = win.grad_norm;
  diag.barrier_residual = win.barrier_residual;
  diag.inner_iterations = win.iterations;

  FittedModel fm;
  fm.spec = spec;
  fm.params = canonicalize(spec, from_free(spec, win.free));
  fm.loglik = win.loglik;
  fm.n = static_cast<std::int64_t>(series.n());
  fm.bic = fm.loglik - std::log(static_cast<double>(fm.n)) * static_cast<double>(spec.dof()) / 2.0;
  fm.series_digest = series_digest(series.counts);
  fm.diagnostics = diag;
  return fm;
}

MixtureParams embed_nested(const FittedModel& smaller, const ModelSpec& larger, const FitConfig& cfg) {
  if (larger.n_exp != smaller.spec.n_exp + 1) throw ContractError("embed_nested: models are not adjacent in the family");
  MixtureParams theta = smaller.params;
  if (smaller.spec.n_exp == 0) {
    constexpr double kSeedWeight = 0.01;
    theta.weights = {kSeedWeight, 1.0 - kSeedWeight};
    theta.lambdas = {std::min(1.0, 0.5 * cfg.lambda_max)};
    return theta;
  }
  const double m = theta.weights[0];
  const double l = theta.lambdas[0];
  const double spread = std::min(1e-3 * l, 0.5 * (cfg.lambda_max - l));
  theta.weights = {0.5 * m, 0.5 * m, theta.weights[1]};
  theta.lambdas = {l + spread, l - spread};
  return theta;
}

}  // namespace tailmix
