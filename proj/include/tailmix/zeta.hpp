#pragma once

#include <cstdint>

namespace tailmix {

/// Smallest exponent accepted by the zeta routines.
inline constexpr double kMinZetaExponent = 1.0 + 1e-9;

struct ZetaValue {
  double value;       ///< zeta(s, q)
  double derivative;  ///< d zeta(s, q) / ds
};

/// Hurwitz zeta function zeta(s, q) = sum_{n>=0} (n + q)^-s for integer q >= 1.
///
/// Sums the first K = max(100, ceil(10/(s-1))) terms (K capped at 1000) and adds
/// an Euler-Maclaurin tail through the B4 term. Absolute error is below 1e-12
/// across s in (1, 50].
///
/// Throws DomainError if s <= 1 + 1e-9, s is not finite, or q < 1.
double hurwitz_zeta(double s, std::int64_t q = 1);

/// d zeta(s, q) / ds, differentiating the same truncated series and tail term by term.
double zeta_deriv_alpha(double s, std::int64_t q = 1);

/// Both of the above from one pass over the direct terms.
ZetaValue hurwitz_zeta_with_deriv(double s, std::int64_t q = 1);

}  // namespace tailmix
