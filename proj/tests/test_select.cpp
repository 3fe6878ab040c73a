#include <doctest.h>

#include <cmath>

#include "tailmix/select.hpp"

using namespace tailmix;

namespace {

FittedModel fake(double loglik, std::int64_t n, ModelKind k, std::uint64_t digest = 7) {
  FittedModel m;
  m.spec = ModelSpec::of(k);
  m.loglik = loglik;
  m.n = n;
  m.bic = bic(loglik, n, m.spec.dof());
  m.series_digest = digest;
  return m;
}

}  // namespace

TEST_SUITE("select") {

TEST_CASE("BIC") {
  CHECK(bic(-5000.0, 9771, 3) == doctest::Approx(-5000.0 - 1.5 * std::log(9771.0)).epsilon(1e-15));
  CHECK(std::abs(bic(-5000.0, 9771, 3) - (-5013.780761140916)) < 1e-9);
  CHECK(bic(-12.5, 100, 0) == -12.5);
  CHECK(bic(-10.0, 2000, 5) - bic(-10.0, 4000, 5) == doctest::Approx(std::log(2.0) * 2.5).epsilon(1e-12));
}

TEST_CASE("log Bayes factor") {
  const auto a = fake(-1000.0, 500, ModelKind::EP);
  const auto b = fake(-1010.0, 500, ModelKind::P);
  CHECK(log_bayes_factor(a, a) == 0.0);
  CHECK(log_bayes_factor(a, b) == -log_bayes_factor(b, a));
  CHECK(log_bayes_factor(a, b) == doctest::Approx(10.0 - std::log(500.0)).epsilon(1e-14));
  CHECK_THROWS_AS(log_bayes_factor(a, fake(-1010.0, 501, ModelKind::P)), ContractError);
  CHECK_THROWS_AS(log_bayes_factor(a, fake(-1010.0, 500, ModelKind::P, 8)), ContractError);
  auto literal = b;
  literal.spec.exp_mode = ExpMode::paper_literal;
  CHECK_THROWS_AS(log_bayes_factor(a, literal), ContractError);
}

TEST_CASE("strength labels") {
  CHECK(strength_label(1.3, LogBase::log10).strength == Strength::substantial);
  CHECK(strength_label(3.0, LogBase::log10).strength == Strength::decisive);
  CHECK(strength_label(2.0, LogBase::log10).strength == Strength::strong);
  CHECK(strength_label(1.2999, LogBase::log10).strength == Strength::negligible);
  CHECK(strength_label(2.9999, LogBase::log10).strength == Strength::strong);
  CHECK(strength_label(3.0).strength == Strength::substantial);
  CHECK(strength_label(4.5).strength == Strength::strong);
  CHECK(strength_label(7.0).strength == Strength::decisive);
  CHECK(strength_label(6.99).strength == Strength::strong);
  const auto zero = strength_label(0.0);
  CHECK(zero.strength == Strength::negligible);
  CHECK(zero.sign == 0);
  const auto neg = strength_label(-8.0);
  CHECK(neg.strength == Strength::decisive);
  CHECK(neg.sign == -1);
  CHECK(strength_label(5.0).sign == 1);
  CHECK(to_string(Strength::substantial) == "substantial");
}

TEST_CASE("labels cover the real line") {
  for (double v = -20.0; v <= 20.0; v += 0.01) {
    const auto s = strength_label(v).strength;
    const double a = std::abs(v);
    const Strength want = a < 3 ? Strength::negligible : a < 4.5 ? Strength::substantial : a < 7 ? Strength::strong : Strength::decisive;
    REQUIRE(s == want);
  }
}

TEST_CASE("decision rule") {
  CHECK(decide(15.0, 2.0) == ModelKind::EP);
  CHECK(decide(-4.0, std::nullopt) == ModelKind::P);
  CHECK(decide(10.0, std::nullopt) == ModelKind::P);
  CHECK(decide(10.5, 10.5) == ModelKind::EEP);
  CHECK(decide(10.5, 10.0) == ModelKind::EP);
  CHECK(decide(3.0, 2.0, 2.5) == ModelKind::EP);
}

TEST_CASE("pure pareto data selects P without fitting EEP") {
  const BinnedSeries s{sample_pareto({1.6, 1}, 3000, 8), 4.0, ""};
  const auto r = select_nested(s);
  CHECK(r.chosen == ModelKind::P);
  CHECK_FALSE(r.eep.has_value());
  CHECK_FALSE(r.log_bf_eep_ep.has_value());
  CHECK(r.log_bf_ep_p == doctest::Approx(log_bayes_factor(r.ep, r.p)));
}

TEST_CASE("EP data selects EP") {
  const auto spec = ModelSpec::of(ModelKind::EP);
  const BinnedSeries s{sample_mixture(spec, {{0.5, 0.5}, {0.2}, 1.6}, 5000, 8), 4.0, ""};
  const auto r = select_nested(s);
  CHECK(r.chosen == ModelKind::EP);
  REQUIRE(r.eep.has_value());
  CHECK(r.log_bf_ep_p / std::log(10.0) >= 3.0);
  CHECK(r.strength_ep_p.strength == Strength::decisive);
  CHECK(r.eep->loglik >= r.ep.loglik - 1e-6);
  CHECK(r.ep.loglik >= r.p.loglik - 1e-6);
  const auto again = select_nested(s);
  CHECK(again.log_bf_ep_p == r.log_bf_ep_p);
  CHECK(again.log_bf_eep_ep == r.log_bf_eep_ep);
}

}
