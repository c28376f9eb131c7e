#pragma once

#include <Eigen/Dense>
#include <functional>

namespace ginn {

struct OptimOptions {
  int max_iterations = 500;
  // stop when |f_new - f| <= value_rel_tol * (|f| + 1e-12)
  double value_rel_tol = 1e-8;
  // or when the gradient sup-norm drops below this
  double grad_tol = 1e-6;
  // central-difference step, scaled by max(1, |x_i|) per coordinate
  double fd_step = 1e-5;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

// Minimizes f with BFGS (inverse-Hessian update), central-difference
// gradients and an Armijo backtracking line search. Fully deterministic:
// same f and x0 give the same iterate sequence. Non-finite objective values
// are treated as +inf so the line search backs away from them.
OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                          Eigen::VectorXd x0, const OptimOptions& options = {});

}  // namespace ginn
