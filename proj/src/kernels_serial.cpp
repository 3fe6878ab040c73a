#include <cmath>
#include <string>

#include "tailmix/error.hpp"
#include "tailmix/kernels.hpp"
#include "tailmix/zeta.hpp"

namespace tailmix::serial {

// Reference path: plain probabilities per observation, no histogram, no log-space mixing.
LikelihoodEval loglik_grad(std::span<const std::int64_t> counts, const ModelSpec& spec,
                           const MixtureParams& theta, bool with_grad) {
  validate(spec, theta);
  const int k = spec.n_exp;
  const ZetaValue zeta = hurwitz_zeta_with_deriv(theta.alpha, spec.x_min);
  const double m_pareto = theta.weights[static_cast<std::size_t>(k)];

  LikelihoodEval out;
  if (with_grad) out.grad.assign(static_cast<std::size_t>(2 * k + 1), 0.0);

  for (std::size_t j = 0; j < counts.size(); ++j) {
    const std::int64_t xi = counts[j];
    if (xi < spec.x_min) throw DataError("serial::loglik_grad: count below x_min at index " + std::to_string(j));
    const double x = static_cast<double>(xi);

    double e[2] = {0.0, 0.0};
    double de[2] = {0.0, 0.0};
    for (int i = 0; i < k; ++i) {
      const double l = theta.lambdas[static_cast<std::size_t>(i)];
      if (spec.exp_mode == ExpMode::discrete) {
        const double q = std::exp(-l);
        e[i] = (1.0 - q) * std::pow(q, x - static_cast<double>(spec.x_min));
        de[i] = e[i] * (q / (1.0 - q) - (x - static_cast<double>(spec.x_min)));
      } else {
        e[i] = l * std::exp(-l * x);
        de[i] = e[i] * (1.0 / l - x);
      }
    }
    const double p = std::pow(x, -theta.alpha) / zeta.value;
    double f = m_pareto * p;
    for (int i = 0; i < k; ++i) f += theta.weights[static_cast<std::size_t>(i)] * e[i];
    out.loglik += std::log(f);

    if (with_grad) {
      for (int i = 0; i < k; ++i) {
        out.grad[static_cast<std::size_t>(i)] += (e[i] - p) / f;
        out.grad[static_cast<std::size_t>(k + i)] += theta.weights[static_cast<std::size_t>(i)] * de[i] / f;
      }
      const double dp = p * (-std::log(x) - zeta.derivative / zeta.value);
      out.grad[static_cast<std::size_t>(2 * k)] += m_pareto * dp / f;
    }
  }
  return out;
}

}  // namespace tailmix::serial
