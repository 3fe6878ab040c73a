#include "tailmix/bfgs.hpp"

#include <algorithm>
#include <cmath>

namespace tailmix {
namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const Vec& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct InverseHessian {
  std::size_t n;
  Vec h;  // row-major n x n
  bool fresh = true;

  explicit InverseHessian(std::size_t dim) : n(dim), h(dim * dim, 0.0) { reset(1.0); }

  void reset(double scale) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
    fresh = true;
  }

  Vec apply(const Vec& v) const {
    Vec out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out[i] += h[i * n + j] * v[j];
    return out;
  }

  // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
  void update(const Vec& s, const Vec& y, double sy) {
    if (fresh) {
      reset(sy / dot(y, y));
      fresh = false;
    }
    const double rho = 1.0 / sy;
    const Vec hy = apply(y);
    const double yhy = dot(y, hy);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
  }
};

}  // namespace

BfgsResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opt) {
  const std::size_t n = x0.size();
  BfgsResult res;
  res.x = std::move(x0);
  Vec g(n, 0.0);
  res.value = f(res.x, g);
  if (!std::isfinite(res.value)) {
    res.grad_norm = INFINITY;
    return res;
  }

  InverseHessian hess(n);
  Vec x_new(n), g_new(n), s(n), y(n);
  int stalls = 0;

  for (res.iterations = 0; res.iterations < opt.max_iters; ++res.iterations) {
    res.grad_norm = max_abs(g);
    if (res.grad_norm <= opt.grad_tol) {
      res.converged = true;
      return res;
    }

    Vec p = hess.apply(g);
    for (double& v : p) v = -v;
    double slope = dot(g, p);
    if (!(slope < 0.0)) {
      hess.reset(1.0);
      p = g;
      for (double& v : p) v = -v;
      slope = dot(g, p);
    }

    // Parameters live in O(1) boxes; never try a first step longer than 1 in any coordinate.
    double t = std::min(1.0, 1.0 / std::max(max_abs(p), 1e-300));
    double f_new = INFINITY;
    bool accepted = false;
    for (int b = 0; b < opt.max_backtracks; ++b) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + t * p[i];
      f_new = f(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.value + opt.armijo * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!hess.fresh) {
        hess.reset(1.0);
        continue;
      }
      break;
    }

    for (std::size_t i = 0; i < n; ++i) {
      s[i] = x_new[i] - res.x[i];
      y[i] = g_new[i] - g[i];
    }
    const double delta_f = res.value - f_new;
    res.x = x_new;
    g = g_new;
    res.value = f_new;

    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) hess.update(s, y, sy);

    // Progress below round-off for several steps in a row: nothing left to gain.
    stalls = delta_f <= 1e-15 * std::max(1.0, std::abs(res.value)) ? stalls + 1 : 0;
    if (stalls >= 5) break;
  }
  res.grad_norm = max_abs(g);
  res.converged = res.grad_norm <= opt.grad_tol;
  return res;
}

}  // namespace tailmix
