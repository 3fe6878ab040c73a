#pragma once

// Per-evaluation constants for the mixture components, shared by the pmf
// routines and the likelihood kernels.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "tailmix/mixture.hpp"
#include "tailmix/zeta.hpp"

namespace tailmix::detail {

inline constexpr int kMaxComponents = 3;

struct ComponentTable {
  int n_exp = 0;
  ExpMode mode = ExpMode::discrete;
  double x_min = 1.0;
  std::array<double, kMaxComponents> log_weight{};
  std::array<double, kMaxComponents - 1> lambda{};
  std::array<double, kMaxComponents - 1> exp_log_norm{};  // log(1 - e^-l) or log(l)
  std::array<double, kMaxComponents - 1> dlog_norm{};     // d exp_log_norm / d lambda
  double exp_origin = 1.0;                                 // x_min (discrete) or 0 (literal)
  double alpha = 2.0;
  double log_zeta = 0.0;
  double dlog_zeta = 0.0;  // zeta'(alpha) / zeta(alpha)

  ComponentTable(const ModelSpec& spec, const MixtureParams& theta, bool with_deriv) {
    n_exp = spec.n_exp;
    mode = spec.exp_mode;
    x_min = static_cast<double>(spec.x_min);
    exp_origin = mode == ExpMode::discrete ? x_min : 0.0;
    for (int i = 0; i <= n_exp; ++i) log_weight[i] = std::log(theta.weights[i]);
    for (int i = 0; i < n_exp; ++i) {
      const double l = theta.lambdas[i];
      lambda[i] = l;
      if (mode == ExpMode::discrete) {
        exp_log_norm[i] = std::log1p(-std::exp(-l));
        dlog_norm[i] = 1.0 / std::expm1(l);
      } else {
        exp_log_norm[i] = std::log(l);
        dlog_norm[i] = 1.0 / l;
      }
    }
    alpha = theta.alpha;
    if (with_deriv) {
      const ZetaValue z = hurwitz_zeta_with_deriv(alpha, spec.x_min);
      log_zeta = std::log(z.value);
      dlog_zeta = z.derivative / z.value;
    } else {
      log_zeta = std::log(hurwitz_zeta(alpha, spec.x_min));
    }
  }

  int components() const { return n_exp + 1; }

  /// out[i] = log m_i + log f_i(x); returns log f(x) (max-shifted log-sum-exp).
  double log_terms(double x, double log_x, double* out) const {
    double top = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_exp; ++i) {
      out[i] = log_weight[i] + exp_log_norm[i] - lambda[i] * (x - exp_origin);
      top = std::max(top, out[i]);
    }
    out[n_exp] = log_weight[n_exp] - alpha * log_x - log_zeta;
    top = std::max(top, out[n_exp]);
    if (!std::isfinite(top)) return top;
    double acc = 0.0;
    for (int i = 0; i <= n_exp; ++i) acc += std::exp(out[i] - top);
    return top + std::log(acc);
  }
};

}  // namespace tailmix::detail
