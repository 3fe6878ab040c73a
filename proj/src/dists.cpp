#include "tailmix/dists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "tailmix/error.hpp"
#include "tailmix/zeta.hpp"

namespace tailmix {
namespace {

constexpr std::size_t kTableBlock = 4096;
constexpr std::size_t kTableCap = std::size_t{1} << 20;
constexpr double kTableMass = 1.0 - 1e-12;
constexpr double kMaxDraw = 4.0e18;

void check_support(std::int64_t x, std::int64_t x_min, const char* who) {
  if (x < x_min) {
    std::ostringstream os;
    os << who << ": x = " << x << " is below the support minimum " << x_min;
    throw DomainError(os.str());
  }
}

}  // namespace

std::string_view to_string(ExpMode mode) {
  return mode == ExpMode::discrete ? "discrete" : "paper-literal";
}

ExpMode parse_exp_mode(std::string_view text) {
  if (text == "discrete" || text == "discrete-normalized") return ExpMode::discrete;
  if (text == "paper-literal" || text == "paper_literal" || text == "literal") return ExpMode::paper_literal;
  throw DataError("unknown exponential mode '" + std::string(text) + "' (expected discrete or paper-literal)");
}

void validate(const ParetoParams& p) {
  if (!std::isfinite(p.alpha) || p.alpha <= kMinZetaExponent) {
    std::ostringstream os;
    os << "Pareto exponent must be > 1, got " << p.alpha;
    throw DomainError(os.str());
  }
  if (p.x_min < 1) throw DomainError("Pareto x_min must be >= 1");
}

void validate(const ExpParams& p) {
  if (!std::isfinite(p.lambda) || p.lambda <= 0.0) {
    std::ostringstream os;
    os << "exponential rate must be > 0, got " << p.lambda;
    throw DomainError(os.str());
  }
}

double pareto_log_pmf(std::int64_t x, const ParetoParams& p) {
  validate(p);
  check_support(x, p.x_min, "pareto_pmf");
  return -p.alpha * std::log(static_cast<double>(x)) - std::log(hurwitz_zeta(p.alpha, p.x_min));
}

double pareto_pmf(std::int64_t x, const ParetoParams& p) { return std::exp(pareto_log_pmf(x, p)); }

double pareto_survival(std::int64_t x, const ParetoParams& p) {
  validate(p);
  if (x <= p.x_min) return 1.0;
  return hurwitz_zeta(p.alpha, x) / hurwitz_zeta(p.alpha, p.x_min);
}

double exp_log_pmf(std::int64_t x, const ExpParams& p, std::int64_t x_min) {
  validate(p);
  check_support(x, x_min, "exp_pmf");
  const double xd = static_cast<double>(x);
  if (p.mode == ExpMode::paper_literal) return std::log(p.lambda) - p.lambda * xd;
  return std::log1p(-std::exp(-p.lambda)) - p.lambda * (xd - static_cast<double>(x_min));
}

double exp_pmf(std::int64_t x, const ExpParams& p, std::int64_t x_min) {
  return std::exp(exp_log_pmf(x, p, x_min));
}

ParetoSampler::ParetoSampler(ParetoParams p) : params_(p) {
  validate(params_);
  log_norm_ = std::log(hurwitz_zeta(params_.alpha, params_.x_min));
  cdf_.reserve(kTableBlock);
}

void ParetoSampler::extend_to(double u) {
  while (!capped_ && (cdf_.empty() || cdf_.back() <= u)) {
    double acc = cdf_.empty() ? 0.0 : cdf_.back();
    const std::int64_t start = params_.x_min + static_cast<std::int64_t>(cdf_.size());
    for (std::size_t i = 0; i < kTableBlock; ++i) {
      const double x = static_cast<double>(start + static_cast<std::int64_t>(i));
      acc += std::exp(-params_.alpha * std::log(x) - log_norm_);
      cdf_.push_back(acc);
    }
    tail_mass_ = -1.0;
    if (acc >= kTableMass || cdf_.size() >= kTableCap) capped_ = true;
  }
}

std::int64_t ParetoSampler::draw_tail(double u) {
  const std::int64_t last = params_.x_min + static_cast<std::int64_t>(cdf_.size()) - 1;
  if (tail_mass_ < 0.0) tail_mass_ = pareto_survival(last + 1, params_);
  if (tail_mass_ <= 0.0) return last;
  // Conditional survival of the continuous approximation:
  // P(X >= x | X > last) ~ ((x - 1/2) / (last + 1/2))^(1 - alpha).
  const double v = std::clamp((1.0 - u) / tail_mass_, std::numeric_limits<double>::min(), 1.0);
  const double scale = static_cast<double>(last) + 0.5;
  double x = std::floor(scale * std::pow(v, -1.0 / (params_.alpha - 1.0)) + 0.5);
  if (!(x < kMaxDraw)) x = kMaxDraw;
  return std::max(last + 1, static_cast<std::int64_t>(x));
}

std::int64_t ParetoSampler::draw(Rng& rng) {
  const double u = rng.uniform();
  extend_to(u);
  if (u < cdf_.back()) {
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return params_.x_min + static_cast<std::int64_t>(it - cdf_.begin());
  }
  return draw_tail(u);
}

std::int64_t draw_geometric(double lambda, std::int64_t x_min, Rng& rng) {
  // Inverse CDF: P(X - x_min >= k) = e^(-lambda k).
  const double k = std::floor(-std::log(rng.uniform_open()) / lambda);
  if (!(k < kMaxDraw)) return x_min + static_cast<std::int64_t>(kMaxDraw);
  return x_min + static_cast<std::int64_t>(k);
}

std::vector<std::int64_t> sample_pareto(const ParetoParams& p, std::size_t n, std::uint64_t seed,
                                        std::uint64_t stream) {
  if (n == 0) throw DataError("sample_pareto: n must be >= 1");
  ParetoSampler sampler(p);
  Rng rng(seed, stream);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = sampler.draw(rng);
  return out;
}

std::vector<std::int64_t> sample_exp(const ExpParams& p, std::int64_t x_min, std::size_t n,
                                     std::uint64_t seed, std::uint64_t stream) {
  validate(p);
  if (p.mode != ExpMode::discrete)
    throw UnsupportedError("sample_exp: the paper-literal exponential is not a pmf and cannot be sampled");
  if (n == 0) throw DataError("sample_exp: n must be >= 1");
  if (x_min < 1) throw DomainError("sample_exp: x_min must be >= 1");
  Rng rng(seed, stream);
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = draw_geometric(p.lambda, x_min, rng);
  return out;
}

}  // namespace tailmix
