#include "tailmix/select.hpp"

#include <cmath>

namespace tailmix {

double bic(double loglik, std::int64_t n, int d) {
  return loglik - std::log(static_cast<double>(n)) * static_cast<double>(d) / 2.0;
}

double log_bayes_factor(const FittedModel& a, const FittedModel& b) {
  if (a.n != b.n || a.series_digest != b.series_digest)
    throw ContractError("log_bayes_factor: models were fitted on different series");
  if (a.spec.exp_mode != b.spec.exp_mode || a.spec.x_min != b.spec.x_min)
    throw ContractError("log_bayes_factor: models use different exponential modes or supports");
  return a.bic - b.bic;
}

std::string_view to_string(Strength s) {
  switch (s) {
    case Strength::negligible:
      return "negligible";
    case Strength::substantial:
      return "substantial";
    case Strength::strong:
      return "strong";
    case Strength::decisive:
      return "decisive";
  }
  return "?";
}

StrengthLabel strength_label(double log_bf, LogBase base) {
  static constexpr double kNatural[3] = {3.0, 4.5, 7.0};
  static constexpr double kLog10[3] = {1.3, 2.0, 3.0};
  const double* cut = base == LogBase::natural ? kNatural : kLog10;

  StrengthLabel out;
  out.sign = log_bf > 0.0 ? 1 : (log_bf < 0.0 ? -1 : 0);
  const double mag = std::abs(log_bf);
  if (mag >= cut[2]) {
    out.strength = Strength::decisive;
  } else if (mag >= cut[1]) {
    out.strength = Strength::strong;
  } else if (mag >= cut[0]) {
    out.strength = Strength::substantial;
  } else {
    out.strength = Strength::negligible;  // includes NaN
  }
  return out;
}

ModelKind decide(double log_bf_ep_p, std::optional<double> log_bf_eep_ep, double threshold) {
  if (!(log_bf_ep_p > threshold)) return ModelKind::P;
  if (log_bf_eep_ep && *log_bf_eep_ep > threshold) return ModelKind::EEP;
  return ModelKind::EP;
}

SelectionResult select_nested(const BinnedSeries& series, const SelectConfig& cfg) {
  const ModelSpec spec_p = ModelSpec::of(ModelKind::P, cfg.exp_mode);
  const ModelSpec spec_ep = ModelSpec::of(ModelKind::EP, cfg.exp_mode);
  const ModelSpec spec_eep = ModelSpec::of(ModelKind::EEP, cfg.exp_mode);

  std::optional<FittedModel> p;
  std::optional<FittedModel> ep;
  try {
    p = fit_mle(series, spec_p, cfg.fit);
    std::vector<MixtureParams> warm;
    if (cfg.nested_warm_start) warm.push_back(embed_nested(*p, spec_ep, cfg.fit));
    ep = fit_mle(series, spec_ep, cfg.fit, warm);
  } catch (const Error& e) {
    throw SelectionError(std::string("select_nested: ") + e.what(), p, ep);
  }

  SelectionResult res;
  res.p = *p;
  res.ep = *ep;
  res.log_bf_ep_p = log_bayes_factor(res.ep, res.p);
  res.strength_ep_p = strength_label(res.log_bf_ep_p, LogBase::natural);
  res.chosen = decide(res.log_bf_ep_p, std::nullopt, cfg.threshold);
  if (res.chosen == ModelKind::P) return res;

  try {
    std::vector<MixtureParams> warm;
    if (cfg.nested_warm_start) warm.push_back(embed_nested(res.ep, spec_eep, cfg.fit));
    res.eep = fit_mle(series, spec_eep, cfg.fit, warm);
  } catch (const Error& e) {
    res.eep_failure = e.what();
    return res;
  }
  res.log_bf_eep_ep = log_bayes_factor(*res.eep, res.ep);
  res.strength_eep_ep = strength_label(*res.log_bf_eep_ep, LogBase::natural);
  res.chosen = decide(res.log_bf_ep_p, res.log_bf_eep_ep, cfg.threshold);
  return res;
}

}  // namespace tailmix
