#pragma once

// BIC, Bayes factors, strength labels and the nested P -> EP -> EEP rule.

#include <optional>
#include <string>
#include <string_view>

#include "tailmix/fit.hpp"

namespace tailmix {

/// loglik - ln(n) * d / 2.
double bic(double loglik, std::int64_t n, int d);

/// BIC(a) - BIC(b), natural log. Both fits must come from the same series and exp mode.
double log_bayes_factor(const FittedModel& a, const FittedModel& b);

enum class LogBase { natural, log10 };
enum class Strength { negligible, substantial, strong, decisive };

std::string_view to_string(Strength s);

struct StrengthLabel {
  Strength strength = Strength::negligible;
  int sign = 0;  ///< +1 favours the first model, -1 the second, 0 neutral
};

/// Magnitude cut points (half-open, lower bound inclusive):
/// log10 1.3 / 2 / 3, natural 3 / 4.5 / 7.
StrengthLabel strength_label(double log_bf, LogBase base = LogBase::natural);

struct SelectConfig {
  FitConfig fit{};
  double threshold = 10.0;  ///< natural-log Bayes factor needed to accept the larger model
  ExpMode exp_mode = ExpMode::discrete;
  bool nested_warm_start = true;  ///< seed each larger fit with the smaller fit embedded
};

struct SelectionResult {
  ModelKind chosen = ModelKind::P;
  double log_bf_ep_p = 0.0;
  std::optional<double> log_bf_eep_ep;
  StrengthLabel strength_ep_p;
  std::optional<StrengthLabel> strength_eep_ep;
  FittedModel p;
  FittedModel ep;
  std::optional<FittedModel> eep;
  std::optional<std::string> eep_failure;  ///< set when the EEP fit failed and EP was kept
};

/// The decision rule alone: EP over P needs ln BF > threshold; EEP over EP is
/// only considered after EP was chosen. Ties go to the simpler model.
ModelKind decide(double log_bf_ep_p, std::optional<double> log_bf_eep_ep, double threshold = 10.0);

/// Thrown when the P or EP fit fails; carries whatever was fitted before.
class SelectionError : public Error {
 public:
  SelectionError(const std::string& what, std::optional<FittedModel> p, std::optional<FittedModel> ep)
      : Error(what), partial_p(std::move(p)), partial_ep(std::move(ep)) {}
  std::optional<FittedModel> partial_p;
  std::optional<FittedModel> partial_ep;
};

SelectionResult select_nested(const BinnedSeries& series, const SelectConfig& cfg = {});

}  // namespace tailmix
