#include "tailmix/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailmix/error.hpp"

namespace tailmix {
namespace {

constexpr std::int64_t kMinDirectTerms = 100;
constexpr std::int64_t kMaxDirectTerms = 1000;

void check_domain(double s, std::int64_t q) {
  if (!std::isfinite(s) || s <= kMinZetaExponent) {
    std::ostringstream os;
    os << "hurwitz_zeta: exponent must be finite and > 1, got " << s;
    throw DomainError(os.str());
  }
  if (q < 1) {
    std::ostringstream os;
    os << "hurwitz_zeta: offset must be >= 1, got " << q;
    throw DomainError(os.str());
  }
}

std::int64_t direct_terms(double s) {
  const double want = std::ceil(10.0 / (s - 1.0));
  if (!(want < static_cast<double>(kMaxDirectTerms))) return kMaxDirectTerms;
  return std::max(kMinDirectTerms, static_cast<std::int64_t>(want));
}

ZetaValue evaluate(double s, std::int64_t q, bool want_deriv) {
  check_domain(s, q);
  const std::int64_t k = direct_terms(s);

  // Direct part, summed smallest-first.
  double sum = 0.0;
  double dsum = 0.0;
  for (std::int64_t n = k - 1; n >= 0; --n) {
    const double x = static_cast<double>(n + q);
    const double lx = std::log(x);
    const double term = std::exp(-s * lx);
    sum += term;
    if (want_deriv) dsum -= lx * term;
  }

  // Euler-Maclaurin tail from N = k + q onward.
  const double big_n = static_cast<double>(k + q);
  const double ln_n = std::log(big_n);
  const double pow_s = std::exp(-s * ln_n);  // N^-s
  const double t1 = big_n * pow_s / (s - 1.0);
  const double t2 = 0.5 * pow_s;
  const double pow_s1 = pow_s / big_n;             // N^-(s+1)
  const double pow_s3 = pow_s1 / (big_n * big_n);  // N^-(s+3)
  const double t3 = s * pow_s1 / 12.0;
  const double poly = s * (s + 1.0) * (s + 2.0);
  const double t4 = -poly * pow_s3 / 720.0;
  const double tail = t1 + t2 + t3 + t4;

  ZetaValue out{sum + tail, 0.0};
  if (want_deriv) {
    const double dpoly = 3.0 * s * s + 6.0 * s + 2.0;
    const double dt1 = -ln_n * t1 - t1 / (s - 1.0);
    const double dt2 = -ln_n * t2;
    const double dt3 = pow_s1 / 12.0 - ln_n * t3;
    const double dt4 = -dpoly * pow_s3 / 720.0 - ln_n * t4;
    out.derivative = dsum + dt1 + dt2 + dt3 + dt4;
  }
  return out;
}

}  // namespace

double hurwitz_zeta(double s, std::int64_t q) { return evaluate(s, q, false).value; }

double zeta_deriv_alpha(double s, std::int64_t q) { return evaluate(s, q, true).derivative; }

ZetaValue hurwitz_zeta_with_deriv(double s, std::int64_t q) { return evaluate(s, q, true); }

}  // namespace tailmix
