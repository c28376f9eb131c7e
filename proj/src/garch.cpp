#include "garch.hpp"

#include <cmath>
#include <numbers>

#include <json.hpp>

#include "errors.hpp"
#include "market_data.hpp"
#include "mean_model.hpp"
#include "optim.hpp"

namespace ginn {
namespace {

// E|N(0,1)|, the factor linking |shock| terms to volatility units
const double kAbsNormalMean = std::sqrt(2.0 / std::numbers::pi_v<double>);

double mean_square(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return s / static_cast<double>(xs.size());
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// Unconstrained coordinates -> valid parameters.
//
// GARCH      u = (ln alpha0, logit pi, logit rho):
//            alpha + beta = pi < 1, alpha = pi * rho.
// GJR/TGARCH u = (ln alpha0, logit s, l1, l2) with (p1, p2, p3) the softmax
//            of (l1, l2, 0). Writing a+ for the positive-shock weight and
//            a- for the negative-shock weight (a- = alpha + gamma):
//              GJR:    a+ = 2 s p1, a- = 2 s p2, beta = s p3
//                      so alpha + gamma/2 + beta = s < 1.
//              TGARCH: same split of the mean volatility drift
//                      kappa (a+ + a-)/2 + beta = s < 1, kappa = E|N(0,1)|.
// All sign invariants (alpha0 > 0, alpha >= 0, beta >= 0, alpha + gamma >= 0)
// hold by construction for every u.
GarchParams params_from_unconstrained(const Eigen::VectorXd& u, GarchVariant variant) {
  GarchParams p;
  p.variant = variant;
  p.alpha0 = std::exp(std::clamp(u[0], -300.0, 300.0));
  if (variant == GarchVariant::kGarch) {
    const double pi = sigmoid(u[1]);
    const double rho = sigmoid(u[2]);
    p.alpha = pi * rho;
    p.beta = pi * (1.0 - rho);
    p.gamma = 0.0;
    return p;
  }
  const double s = sigmoid(u[1]);
  const double m = std::max({u[2], u[3], 0.0});
  const double e1 = std::exp(u[2] - m);
  const double e2 = std::exp(u[3] - m);
  const double e3 = std::exp(-m);
  const double z = e1 + e2 + e3;
  const double p1 = e1 / z, p2 = e2 / z, p3 = e3 / z;
  const double scale = variant == GarchVariant::kTgarch ? kAbsNormalMean : 1.0;
  const double a_plus = 2.0 * s * p1 / scale;
  const double a_minus = 2.0 * s * p2 / scale;
  p.alpha = a_plus;
  p.gamma = a_minus - a_plus;
  p.beta = s * p3;
  return p;
}

// Fixed multi-start schedule: a high-persistence, a moderate and a
// low-persistence initial point. alpha0 targets the sample variance (or
// volatility) as the unconditional level.
std::vector<Eigen::VectorXd> fit_starts(GarchVariant variant, double svar) {
  struct Start {
    double pi;    // persistence / drift budget
    double frac;  // share of the budget on the shock term
  };
  const Start starts[3] = {{0.90, 1.0 / 9.0}, {0.50, 0.5}, {0.05, 0.5}};
  const bool vol_units = variant == GarchVariant::kTgarch;
  const int dim = variant == GarchVariant::kGarch ? 3 : 4;
  std::vector<Eigen::VectorXd> out;
  for (const Start& s : starts) {
    Eigen::VectorXd u(dim);
    const double level = vol_units ? std::sqrt(svar) : svar;
    u[0] = std::log(std::max(level * (1.0 - s.pi), 1e-300));
    u[1] = logit(s.pi);
    if (variant == GarchVariant::kGarch) {
      u[2] = logit(s.frac);
    } else {
      // symmetric start: gamma = 0, shock share frac of the budget
      const double l = std::log(s.frac / (2.0 * (1.0 - s.frac)));
      u[2] = l;
      u[3] = l;
    }
    out.push_back(std::move(u));
  }
  return out;
}

void check_residuals(std::span<const double> residuals) {
  for (double e : residuals) {
    if (!std::isfinite(e)) throw std::invalid_argument("residuals must be finite");
  }
}

}  // namespace

const char* to_string(GarchVariant v) {
  switch (v) {
    case GarchVariant::kGarch: return "garch";
    case GarchVariant::kGjrGarch: return "gjr";
    case GarchVariant::kTgarch: return "tgarch";
  }
  return "?";
}

GarchVariant garch_variant_from_string(std::string_view name) {
  if (name == "garch") return GarchVariant::kGarch;
  if (name == "gjr") return GarchVariant::kGjrGarch;
  if (name == "tgarch") return GarchVariant::kTgarch;
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "', expected garch, gjr or tgarch");
}

void validate(const GarchParams& p) {
  if (!std::isfinite(p.alpha0) || !std::isfinite(p.alpha) || !std::isfinite(p.gamma) ||
      !std::isfinite(p.beta) || !std::isfinite(p.mean)) {
    throw std::invalid_argument("non-finite parameter");
  }
  if (p.alpha0 <= 0.0) throw std::invalid_argument("alpha0 must be positive");
  if (p.alpha < 0.0) throw std::invalid_argument("alpha must be non-negative");
  if (p.beta < 0.0) throw std::invalid_argument("beta must be non-negative");
  if (p.alpha + p.gamma < 0.0) {
    throw std::invalid_argument("alpha + gamma must be non-negative");
  }
  if (p.variant == GarchVariant::kGarch && p.gamma != 0.0) {
    throw std::invalid_argument("plain GARCH has no gamma term");
  }
}

double persistence(const GarchParams& p) {
  if (p.variant != GarchVariant::kGarch) {
    throw std::invalid_argument("persistence is defined for the plain GARCH variant");
  }
  return p.alpha + p.beta;
}

std::vector<double> variance_path(const GarchParams& p, std::span<const double> residuals,
                                  double sigma0_sq) {
  validate(p);
  if (!(sigma0_sq > 0.0) || !std::isfinite(sigma0_sq)) {
    throw std::invalid_argument("sigma0_sq must be positive");
  }
  check_residuals(residuals);
  std::vector<double> path(residuals.size());
  if (p.variant == GarchVariant::kTgarch) {
    // volatility units; squared on output
    double abs_e = std::sqrt(sigma0_sq);
    double sig = std::sqrt(sigma0_sq);
    double ind = 0.5;  // pre-sample indicator expectation
    for (size_t t = 0; t < residuals.size(); ++t) {
      sig = p.alpha0 + (p.alpha + p.gamma * ind) * abs_e + p.beta * sig;
      path[t] = sig * sig;
      abs_e = std::abs(residuals[t]);
      ind = residuals[t] < 0.0 ? 1.0 : 0.0;
    }
    return path;
  }
  double e2 = sigma0_sq;
  double s2 = sigma0_sq;
  double ind = 0.5;
  for (size_t t = 0; t < residuals.size(); ++t) {
    if (p.variant == GarchVariant::kGarch) {
      s2 = p.alpha0 + p.alpha * e2 + p.beta * s2;
    } else {
      s2 = p.alpha0 + (p.alpha + p.gamma * ind) * e2 + p.beta * s2;
    }
    path[t] = s2;
    e2 = residuals[t] * residuals[t];
    ind = residuals[t] < 0.0 ? 1.0 : 0.0;
  }
  return path;
}

double log_likelihood(const GarchParams& p, std::span<const double> residuals,
                      double sigma0_sq) {
  const std::vector<double> path = variance_path(p, residuals, sigma0_sq);
  const double neg_half_log_2pi = -0.5 * std::log(2.0 * std::numbers::pi_v<double>);
  double ll = 0.0;
  for (size_t t = 0; t < residuals.size(); ++t) {
    const double s2 = path[t];
    if (!(s2 > 0.0) || !std::isfinite(s2)) {
      throw NumericError("variance path left the positive domain");
    }
    ll += neg_half_log_2pi - 0.5 * std::log(s2) - residuals[t] * residuals[t] / (2.0 * s2);
  }
  return ll;
}

double log_likelihood(const GarchParams& p, std::span<const double> residuals) {
  if (residuals.empty()) throw std::invalid_argument("no residuals");
  const double s0 = mean_square(residuals);
  if (!(s0 > 0.0)) throw DataError("degenerate window: zero sample variance");
  return log_likelihood(p, residuals, s0);
}

GarchFit fit_mle(std::span<const double> residuals, GarchVariant variant,
                 const FitOptions& options) {
  if (residuals.size() < 10) {
    throw std::invalid_argument("fit_mle needs at least 10 residuals");
  }
  check_residuals(residuals);
  const double svar = mean_square(residuals);
  if (!(svar > 0.0)) throw DataError("degenerate window: zero sample variance");

  const auto objective = [&](const Eigen::VectorXd& u) -> double {
    const GarchParams p = params_from_unconstrained(u, variant);
    try {
      return -log_likelihood(p, residuals, svar);
    } catch (const NumericError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  OptimOptions opt;
  opt.max_iterations = options.max_iterations;
  opt.value_rel_tol = options.ll_rel_tol;
  opt.grad_tol = options.grad_tol;

  OptimResult best;
  bool have_best = false;
  for (const Eigen::VectorXd& start : fit_starts(variant, svar)) {
    OptimResult r = minimize_bfgs(objective, start, opt);
    if (!have_best || r.value < best.value) {
      best = std::move(r);
      have_best = true;
    }
  }

  GarchFit fit;
  fit.params = params_from_unconstrained(best.x, variant);
  fit.log_likelihood = -best.value;
  fit.sigma0_sq = svar;
  fit.converged = best.converged;
  fit.iterations = best.iterations;
  return fit;
}

double forecast_one_step(const GarchFit& fit, std::span<const double> residuals) {
  if (residuals.empty()) throw std::invalid_argument("empty residual window");
  const double s0 = mean_square(residuals);
  if (!(s0 > 0.0)) throw DataError("degenerate window: zero sample variance");
  const GarchParams& p = fit.params;
  const std::vector<double> path = variance_path(p, residuals, s0);
  const double e = residuals.back();
  const double ind = e < 0.0 ? 1.0 : 0.0;
  if (p.variant == GarchVariant::kTgarch) {
    const double sig =
        p.alpha0 + (p.alpha + p.gamma * ind) * std::abs(e) + p.beta * std::sqrt(path.back());
    return sig * sig;
  }
  if (p.variant == GarchVariant::kGarch) {
    return p.alpha0 + p.alpha * (e * e) + p.beta * path.back();
  }
  return p.alpha0 + (p.alpha + p.gamma * ind) * (e * e) + p.beta * path.back();
}

RollingForecastResult rolling_forecast(const ReturnSeries& series, GarchVariant variant,
                                       const RollingOptions& options) {
  if (options.window_len < 10) {
    throw std::invalid_argument("rolling window must cover at least 10 returns");
  }
  if (options.refit_every < 1) throw std::invalid_argument("refit_every must be >= 1");

  const auto windows = rolling_windows(series, options.window_len);
  RollingForecastResult res;
  res.windows_total = windows.size();

  std::vector<Date> dates;
  std::vector<double> values;
  std::vector<double> resid;
  GarchFit fit;
  bool have_fit = false;

  for (size_t j = 0; j < windows.size(); ++j) {
    const auto& w = windows[j];
    resid.clear();
    if (options.mean_mode == MeanMode::kWindowMean) {
      double mean = 0.0;
      for (double v : w.values) mean += v;
      mean /= static_cast<double>(w.values.size());
      for (double v : w.values) resid.push_back(v - mean);
      fit.params.mean = mean;  // recorded for reporting only
    } else {
      const ArModel ar = fit_ar(w.values);
      for (size_t i = 1; i < w.values.size(); ++i) {
        resid.push_back(w.values[i] - predict_mean(ar, w.values[i - 1]));
      }
    }

    try {
      if (j % static_cast<size_t>(options.refit_every) == 0 || !have_fit) {
        const double mean_kept = fit.params.mean;
        fit = fit_mle(resid, variant, options.fit);
        fit.params.mean = mean_kept;
        have_fit = true;
        ++res.refits;
        if (!fit.converged) ++res.not_converged;
      }
      const double fc = forecast_one_step(fit, resid);
      if (!(fc > 0.0) || !std::isfinite(fc)) {
        throw NumericError("forecast left the positive domain");
      }
      dates.push_back(w.target_date);
      values.push_back(fc);
      res.last_fit = fit;
    } catch (const std::exception& e) {
      have_fit = false;  // do not reuse a fit from a failed refit group
      res.skipped.push_back({w.target_date, e.what()});
    }
  }
  res.forecasts = VarianceSeries(std::move(dates), std::move(values));
  return res;
}

std::string fit_report_json(const GarchFit& fit) {
  nlohmann::ordered_json j;
  j["variant"] = to_string(fit.params.variant);
  j["alpha0"] = fit.params.alpha0;
  j["alpha"] = fit.params.alpha;
  j["gamma"] = fit.params.gamma;
  j["beta"] = fit.params.beta;
  j["mean"] = fit.params.mean;
  if (fit.params.variant == GarchVariant::kGarch) {
    j["persistence"] = persistence(fit.params);
  }
  j["log_likelihood"] = fit.log_likelihood;
  j["sigma0_sq"] = fit.sigma0_sq;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  return j.dump(2);
}

}  // namespace ginn
