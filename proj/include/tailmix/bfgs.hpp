#pragma once

#include <functional>
#include <span>
#include <vector>

namespace tailmix {

/// Objective for minimization: returns f(x) and writes the gradient into `grad`.
/// A non-finite return value marks x as infeasible; the line search backs off.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct BfgsOptions {
  double grad_tol = 1e-6;  ///< stop when max |g_i| <= grad_tol
  int max_iters = 500;
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;  ///< max-norm of the final gradient
  int iterations = 0;
  bool converged = false;
};

/// Dense inverse-Hessian BFGS with backtracking (Armijo) line search.
/// `x0` must be feasible (finite objective).
BfgsResult minimize_bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& opt = {});

}  // namespace tailmix
