#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "tailmix/dists.hpp"
#include "tailmix/error.hpp"

using namespace tailmix;

namespace {

const double kSixOverPiSq = 6.0 / (std::numbers::pi * std::numbers::pi);

// Partial sum to X plus the midpoint-rule tail integral, with the integral
// bracket [X+1, inf) <= tail <= [X, inf) checked alongside.
struct PartialMass {
  double estimate, lower, upper;
};

PartialMass pareto_mass(double alpha, std::int64_t x_min, std::int64_t X) {
  const ParetoParams p{alpha, x_min};
  double partial = 0.0;
  for (std::int64_t x = X; x >= x_min; --x) partial += pareto_pmf(x, p);
  const double z = oracle::zeta(alpha, x_min, 200'000);
  auto tail_from = [&](double a) { return std::pow(a, 1.0 - alpha) / (alpha - 1.0) / z; };
  return {partial + tail_from(X + 0.5), partial + tail_from(X + 1.0), partial + tail_from(static_cast<double>(X))};
}

}  // namespace

TEST_SUITE("dists") {

TEST_CASE("pareto pmf values") {
  CHECK(pareto_pmf(1, {2.0, 1}) == doctest::Approx(kSixOverPiSq).epsilon(1e-12));
  CHECK(pareto_pmf(2, {2.0, 1}) == doctest::Approx(kSixOverPiSq / 4.0).epsilon(1e-12));
  CHECK(pareto_log_pmf(7, {1.5, 1}) == doctest::Approx(std::log(oracle::pareto(7, 1.5, oracle::zeta(1.5)))).epsilon(1e-12));
  CHECK(pareto_pmf(3, {2.5, 3}) == doctest::Approx(std::pow(3.0, -2.5) / oracle::zeta(2.5, 3, 200'000)).epsilon(1e-11));
}

TEST_CASE("exponential pmf values") {
  const ExpParams half{std::numbers::ln2, ExpMode::discrete};
  CHECK(exp_pmf(1, half) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(exp_pmf(2, half) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(exp_pmf(5, half, 3) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(exp_pmf(1, {1.0, ExpMode::paper_literal}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(exp_log_pmf(4, {0.3, ExpMode::paper_literal}) == doctest::Approx(std::log(0.3) - 1.2).epsilon(1e-14));
  CHECK(exp_log_pmf(9, {0.7, ExpMode::discrete}) == doctest::Approx(std::log(oracle::geometric(9, 0.7))).epsilon(1e-13));
}

TEST_CASE("pareto normalization across the grid") {
  for (double alpha : {1.1, 1.5, 2.0, 3.0}) {
    for (std::int64_t x_min : {1, 4}) {
      CAPTURE(alpha);
      CAPTURE(x_min);
      const auto m = pareto_mass(alpha, x_min, 3000);
      CHECK(std::abs(m.estimate - 1.0) < 1e-8);
      CHECK(m.lower <= 1.0 + 1e-12);
      CHECK(m.upper >= 1.0 - 1e-12);
    }
  }
}

TEST_CASE("geometric normalization") {
  for (double lambda : {0.1, 1.0, 3.0}) {
    const ExpParams p{lambda, ExpMode::discrete};
    double partial = 0.0;
    const std::int64_t X = 1000;
    for (std::int64_t x = X; x >= 1; --x) partial += exp_pmf(x, p);
    const double tail = std::exp(-lambda * static_cast<double>(X));
    CAPTURE(lambda);
    CHECK(std::abs(partial + tail - 1.0) < 1e-12);
  }
}

TEST_CASE("strictly decreasing on the support") {
  for (double alpha : {1.1, 2.0, 3.0})
    for (std::int64_t x = 1; x < 500; ++x) CHECK(pareto_pmf(x + 1, {alpha, 1}) < pareto_pmf(x, {alpha, 1}));
  for (double lambda : {0.1, 1.0, 3.0})
    for (std::int64_t x = 1; x < 200; ++x) {
      const ExpParams p{lambda, ExpMode::discrete};
      CHECK(exp_pmf(x + 1, p) < exp_pmf(x, p));
    }
}

TEST_CASE("survival function") {
  const ParetoParams p{1.8, 1};
  double below = 0.0;
  for (std::int64_t x = 1; x < 10; ++x) below += pareto_pmf(x, p);
  CHECK(pareto_survival(10, p) == doctest::Approx(1.0 - below).epsilon(1e-10));
  CHECK(pareto_survival(1, p) == doctest::Approx(1.0));
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(pareto_pmf(0, {2.0, 1}), DomainError);
  CHECK_THROWS_AS(pareto_pmf(2, {2.0, 3}), DomainError);
  CHECK_THROWS_AS(pareto_pmf(2, {1.0, 1}), DomainError);
  CHECK_THROWS_AS(exp_pmf(0, {1.0, ExpMode::discrete}), DomainError);
  CHECK_THROWS_AS(exp_pmf(2, {0.0, ExpMode::discrete}), DomainError);
  CHECK_THROWS_AS(exp_pmf(2, {-1.0, ExpMode::discrete}), DomainError);
  CHECK(parse_exp_mode("paper-literal") == ExpMode::paper_literal);
  CHECK(parse_exp_mode(to_string(ExpMode::discrete)) == ExpMode::discrete);
}

TEST_CASE("pareto sampler frequency at one") {
  const auto draws = sample_pareto({2.0, 1}, 1'000'000, 11);
  const auto ones = std::count(draws.begin(), draws.end(), 1);
  const double freq = static_cast<double>(ones) / 1e6;
  CHECK(std::abs(freq - 0.6079) < 0.002);
  const double sigma = std::sqrt(kSixOverPiSq * (1 - kSixOverPiSq) / 1e6);
  CHECK(std::abs(freq - kSixOverPiSq) < 3 * sigma);
}

TEST_CASE("pareto sampler chi-square on 1..50") {
  const ParetoParams p{2.0, 1};
  const std::size_t n = 1'000'000;
  const auto draws = sample_pareto(p, n, 2024);
  std::vector<double> observed(51, 0.0);  // last cell collects x > 50
  for (auto x : draws) ++observed[static_cast<std::size_t>(std::min<std::int64_t>(x, 51) - 1)];
  const double z = oracle::zeta(2.0, 1, 200'000);
  double chi2 = 0.0, mass = 0.0;
  for (std::int64_t x = 1; x <= 50; ++x) {
    const double e = n * oracle::pareto(x, 2.0, z);
    mass += oracle::pareto(x, 2.0, z);
    chi2 += (observed[x - 1] - e) * (observed[x - 1] - e) / e;
  }
  const double e_tail = n * (1.0 - mass);
  chi2 += (observed[50] - e_tail) * (observed[50] - e_tail) / e_tail;
  // upper 1e-4 point of chi-square with 50 degrees of freedom
  CHECK(chi2 < 95.9687);
}

TEST_CASE("pareto sampler reaches the far tail") {
  const ParetoParams p{1.2, 1};
  const auto draws = sample_pareto(p, 200'000, 5);
  const auto big = *std::max_element(draws.begin(), draws.end());
  CHECK(big > 100'000);
  // P(X >= 1000) from the oracle against the empirical fraction
  const double want = oracle::zeta(1.2, 1000, 200'000) / oracle::zeta(1.2, 1, 200'000);
  const double got = static_cast<double>(std::count_if(draws.begin(), draws.end(), [](auto x) { return x >= 1000; })) / 2e5;
  CHECK(std::abs(got - want) < 4 * std::sqrt(want * (1 - want) / 2e5));
}

TEST_CASE("geometric sampler mean") {
  const auto draws = sample_exp({std::numbers::ln2, ExpMode::discrete}, 1, 1'000'000, 3);
  double sum = 0.0;
  for (auto x : draws) sum += static_cast<double>(x);
  CHECK(std::abs(sum / 1e6 - 2.0) < 0.01);
}

TEST_CASE("determinism and support") {
  CHECK(sample_pareto({1.7, 1}, 1000, 9) == sample_pareto({1.7, 1}, 1000, 9));
  CHECK(sample_pareto({1.7, 1}, 1000, 9) != sample_pareto({1.7, 1}, 1000, 10));
  CHECK(sample_pareto({1.7, 1}, 1000, 9, 0) != sample_pareto({1.7, 1}, 1000, 9, 1));
  CHECK(sample_exp({0.4, ExpMode::discrete}, 3, 1000, 9) == sample_exp({0.4, ExpMode::discrete}, 3, 1000, 9));
  for (auto x : sample_pareto({1.3, 5}, 20000, 1)) REQUIRE(x >= 5);
  for (auto x : sample_exp({2.5, ExpMode::discrete}, 7, 20000, 1)) REQUIRE(x >= 7);
}

TEST_CASE("unsupported sampling") {
  CHECK_THROWS_AS(sample_exp({1.0, ExpMode::paper_literal}, 1, 10, 1), UnsupportedError);
}

}
