#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "tailmix/bfgs.hpp"
#include "tailmix/fit.hpp"

using namespace tailmix;

namespace {

const ModelSpec kP = ModelSpec::of(ModelKind::P);
const ModelSpec kEP = ModelSpec::of(ModelKind::EP);
const ModelSpec kEEP = ModelSpec::of(ModelKind::EEP);

BinnedSeries ep_series(std::size_t n, std::uint64_t seed) {
  return {sample_mixture(kEP, {{0.5, 0.5}, {0.2}, 1.6}, n, seed), 4.0, "ep"};
}

}  // namespace

TEST_SUITE("bfgs") {

TEST_CASE("rosenbrock") {
  const Objective f = [](std::span<const double> x, std::span<double> g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  BfgsOptions opt;
  opt.max_iters = 2000;
  opt.grad_tol = 1e-9;
  const auto r = minimize_bfgs(f, {-1.2, 1.0}, opt);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("respects an infinite wall") {
  // minimum of (x-3)^2 restricted to x < 2 by returning +inf beyond
  const Objective f = [](std::span<const double> x, std::span<double> g) {
    if (x[0] >= 2.0) return std::numeric_limits<double>::infinity();
    g[0] = 2 * (x[0] - 3) - 1e-3 / (2.0 - x[0]);
    return (x[0] - 3) * (x[0] - 3) + 1e-3 * -std::log(2.0 - x[0]);
  };
  const auto r = minimize_bfgs(f, {0.0});
  CHECK(r.x[0] < 2.0);
  CHECK(r.x[0] > 1.99);
}

}

TEST_SUITE("fit") {

TEST_CASE("free parameter round trip") {
  const MixtureParams t{{0.2, 0.3, 0.5}, {1.5, 0.1}, 1.7};
  const auto x = to_free(kEEP, t);
  CHECK(x == std::vector<double>{0.2, 0.3, 1.5, 0.1, 1.7});
  const auto back = from_free(kEEP, x);
  CHECK(back.weights[2] == doctest::Approx(0.5));
  CHECK(back.lambdas == t.lambdas);
  CHECK_THROWS_AS(from_free(kEP, x), ContractError);
}

TEST_CASE("feasibility") {
  const FitConfig cfg;
  CHECK(strictly_feasible(kEP, std::vector<double>{0.5, 0.2, 1.6}, cfg));
  CHECK_FALSE(strictly_feasible(kEP, std::vector<double>{0.0, 0.2, 1.6}, cfg));
  CHECK_FALSE(strictly_feasible(kEP, std::vector<double>{1.0, 0.2, 1.6}, cfg));
  CHECK_FALSE(strictly_feasible(kEP, std::vector<double>{0.5, 3.6, 1.6}, cfg));
  CHECK_FALSE(strictly_feasible(kEP, std::vector<double>{0.5, 0.2, 1.0}, cfg));
  CHECK_FALSE(strictly_feasible(kEP, std::vector<double>{0.5, 0.2, 4.0}, cfg));
  CHECK_FALSE(strictly_feasible(kEEP, std::vector<double>{0.3, 0.3, 0.1, 0.2, 1.6}, cfg));
  CHECK(strictly_feasible(kEEP, std::vector<double>{0.3, 0.3, 0.2, 0.1, 1.6}, cfg));
}

TEST_CASE("zero barrier weight is the log-likelihood") {
  const auto s = ep_series(2000, 1);
  const MixtureParams t{{0.4, 0.6}, {0.3}, 1.7};
  const auto v = penalized_objective(s, kEP, to_free(kEP, t), 0.0);
  CHECK(v.value == doctest::Approx(log_likelihood(s, kEP, t)).epsilon(1e-13));
}

TEST_CASE("barrier objective diverges near the boundary") {
  const auto s = ep_series(2000, 2);
  double prev = INFINITY;
  for (double gap : {1e-1, 1e-3, 1e-6, 1e-8}) {
    const auto v = penalized_objective(s, kEP, std::vector<double>{0.5, 0.2, 1.0 + gap}, 1e-2);
    CHECK(v.value < prev);
    prev = v.value;
  }
  CHECK(penalized_objective(s, kEP, std::vector<double>{0.5, 0.2, 1.0 + 1e-12}, 1e-2).value == -INFINITY);
  CHECK(penalized_objective(s, kEP, std::vector<double>{0.5, 0.2, 0.9}, 1e-2).value == -INFINITY);
  CHECK(penalized_objective(s, kEP, std::vector<double>{-0.1, 0.2, 1.5}, 1e-2).value == -INFINITY);
}

TEST_CASE("analytic gradient against finite differences") {
  const auto counts = sample_mixture(kEEP, {{0.3, 0.4, 0.3}, {1.5, 0.15}, 1.6}, 3000, 9);
  const BinnedSeries s{counts, 4.0, ""};
  for (ModelKind k : {ModelKind::P, ModelKind::EP, ModelKind::EEP}) {
    for (double c : {0.0, 1e-2}) {
      const auto r = gradcheck::run(s, ModelSpec::of(k), 20, c, 31);
      CAPTURE(to_string(k));
      CAPTURE(c);
      CHECK(r.points == 20);
      CHECK(r.worst_rel <= 1e-5);
    }
  }
  const auto r = gradcheck::run(s, ModelSpec::of(ModelKind::EP, ExpMode::paper_literal), 20, 1e-2, 31);
  CHECK(r.worst_rel <= 1e-5);
}

TEST_CASE("random initial points") {
  const FitConfig cfg;
  for (ModelKind k : {ModelKind::P, ModelKind::EP, ModelKind::EEP}) {
    const auto spec = ModelSpec::of(k);
    std::set<std::vector<double>> seen;
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto t = random_init(spec, 17, i);
      const auto x = to_free(spec, t);
      REQUIRE(strictly_feasible(spec, x, cfg));
      for (double w : t.weights) CHECK(w >= 0.02 / 1.1);
      for (double l : t.lambdas) CHECK((l >= 0.05 && l <= 3.0));
      CHECK((t.alpha >= 1.1 && t.alpha <= 3.5));
      seen.insert(x);
    }
    CHECK(seen.size() == 50);
    CHECK(to_free(spec, random_init(spec, 17, 3)) == to_free(spec, random_init(spec, 17, 3)));
  }
}

TEST_CASE("pure pareto fit against a one-dimensional oracle") {
  const std::size_t n = 10000;
  const BinnedSeries s{sample_pareto({2.0, 1}, n, 42), 4.0, ""};
  const auto fm = fit_mle(s, kP);
  CHECK(std::abs(fm.params.alpha - 2.0) < 0.05);

  double sum_log = 0.0;
  for (auto x : s.counts) sum_log += std::log(static_cast<double>(x));
  const auto ll = [&](double a) { return -a * sum_log - n * std::log(oracle::zeta(a, 1, 200'000)); };
  const double a_star = oracle::golden_max(ll, 1.5, 2.5);
  CHECK(std::abs(fm.params.alpha - a_star) < 1e-6);
  CHECK(fm.loglik == doctest::Approx(ll(a_star)).epsilon(1e-10));
  CHECK(fm.bic == doctest::Approx(fm.loglik - std::log(static_cast<double>(n)) / 2).epsilon(1e-14));
  CHECK(fm.n == static_cast<std::int64_t>(n));
  CHECK(fm.diagnostics.converged);
}

TEST_CASE("EP fit recovers the generating parameters") {
  const auto s = ep_series(10000, 3);
  const auto fm = fit_mle(s, kEP);
  CHECK(std::abs(fm.params.alpha / 1.6 - 1) < 0.05);
  CHECK(std::abs(fm.params.lambdas[0] - 0.2) < 0.05);
  CHECK(std::abs(fm.params.pareto_weight() - 0.5) < 0.1);
  CHECK(fm.diagnostics.converged);
  CHECK(fm.diagnostics.grad_norm <= 1e-6);
}

TEST_CASE("fit does not lose likelihood against the truth") {
  const auto s = ep_series(5000, 4);
  const MixtureParams truth{{0.5, 0.5}, {0.2}, 1.6};
  const auto fm = fit_mle(s, kEP, FitConfig{}, std::span<const MixtureParams>(&truth, 1));
  CHECK(fm.loglik >= log_likelihood(s, kEP, truth) - 1e-9);
}

TEST_CASE("deterministic given the seed") {
  const auto s = ep_series(3000, 5);
  FitConfig cfg;
  cfg.seed = 99;
  const auto a = fit_mle(s, kEEP, cfg);
  const auto b = fit_mle(s, kEEP, cfg);
  CHECK(a.loglik == b.loglik);
  CHECK(a.params.weights == b.params.weights);
  CHECK(a.params.lambdas == b.params.lambdas);
  CHECK(a.params.alpha == b.params.alpha);
  CHECK(a.params.lambdas[0] >= a.params.lambdas[1]);
}

TEST_CASE("nested embedding keeps the likelihood") {
  const auto s = ep_series(3000, 6);
  const FitConfig cfg;
  const auto p = fit_mle(s, kP, cfg);
  const auto ep_start = embed_nested(p, kEP, cfg);
  CHECK(strictly_feasible(kEP, to_free(kEP, ep_start), cfg));
  CHECK(log_likelihood(s, kEP, ep_start) == doctest::Approx(p.loglik).epsilon(0.02));
  const auto ep = fit_mle(s, kEP, cfg);
  const auto eep_start = embed_nested(ep, kEEP, cfg);
  CHECK(strictly_feasible(kEEP, to_free(kEEP, eep_start), cfg));
  CHECK(std::abs(log_likelihood(s, kEEP, eep_start) - ep.loglik) < 1e-3);
}

TEST_CASE("consistency as n grows") {
  std::vector<double> med;
  for (std::size_t n : {1000, 5000, 20000}) {
    std::vector<double> err;
    for (std::uint64_t r = 0; r < 20; ++r) {
      const BinnedSeries s{sample_mixture(kEP, {{0.5, 0.5}, {0.2}, 1.6}, n, 1000 + r), 4.0, ""};
      FitConfig cfg;
      cfg.restarts = 5;
      err.push_back(std::abs(fit_mle(s, kEP, cfg).params.alpha - 1.6));
    }
    std::sort(err.begin(), err.end());
    med.push_back(0.5 * (err[9] + err[10]));
  }
  CHECK(med[1] < med[0]);
  CHECK(med[2] < med[1]);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(fit_mle({{1, 2, 3}, 4.0, ""}, kEP), DataError);
  CHECK_THROWS_AS(fit_mle({{0, 2, 3, 4, 5}, 4.0, ""}, kP), DataError);
  FitConfig bad;
  bad.restarts = 0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  const BarrierSchedule rising{{1e-2, 1e-1}};
  CHECK_THROWS_AS(rising.validate(), DomainError);
  const auto g = BarrierSchedule::geometric(1e-2, 1e-8, 4);
  REQUIRE(g.weights.size() == 4);
  CHECK(g.weights[1] == doctest::Approx(1e-4));
  CHECK(g.weights[3] == 1e-8);
}

}
