#include "optim.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace ginn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& f,
                 const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : kInf;
}

Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double fp = safe_eval(f, probe);
    probe[i] = x[i] - h;
    const double fm = safe_eval(f, probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

OptimResult minimize_bfgs(const std::function<double(const Eigen::VectorXd&)>& f,
                          Eigen::VectorXd x0, const OptimOptions& options) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw std::invalid_argument("minimize_bfgs: empty start point");

  OptimResult res;
  res.x = std::move(x0);
  res.value = safe_eval(f, res.x);
  if (!std::isfinite(res.value)) {
    throw NumericError("objective not finite at the starting point");
  }
  res.gradient = central_gradient(f, res.x, options.fd_step);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (res.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol) {
      res.converged = true;
      return res;
    }

    Eigen::VectorXd d = -(H * res.gradient);
    double slope = d.dot(res.gradient);
    if (!(slope < 0.0)) {
      // curvature information went bad, restart from steepest descent
      H.setIdentity();
      d = -res.gradient;
      slope = d.dot(res.gradient);
    }

    // Armijo backtracking
    double t = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int ls = 0; ls < 48; ++ls) {
      x_new = res.x + t * d;
      f_new = safe_eval(f, x_new);
      if (f_new <= res.value + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      // no progress possible along d at any representable step
      res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol;
      return res;
    }

    const Eigen::VectorXd g_new = central_gradient(f, x_new, options.fd_step);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd Hy = H * y;
      // BFGS inverse update: H <- (I - rho s y')H(I - rho y s') + rho s s'
      H -= rho * (s * Hy.transpose() + Hy * s.transpose());
      H += rho * (rho * y.dot(Hy) + 1.0) * (s * s.transpose());
    }

    const double df = std::abs(f_new - res.value);
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    if (df <= options.value_rel_tol * (std::abs(res.value) + 1e-12)) {
      ++res.iterations;
      res.converged = true;
      return res;
    }
  }
  res.converged = res.gradient.lpNorm<Eigen::Infinity>() <= options.grad_tol;
  return res;
}

}  // namespace ginn
