#pragma once

#include <span>
#include <string>
#include <vector>

#include "series.hpp"

namespace ginn {

enum class GarchVariant { kGarch, kGjrGarch, kTgarch };

const char* to_string(GarchVariant v);
// Recognizes "garch", "gjr", "tgarch". Throws std::invalid_argument.
GarchVariant garch_variant_from_string(std::string_view name);

// Parameters of a (1,1)-order volatility recursion. For GARCH and GJR the
// recursion runs in variance units; for TGARCH alpha0 and the recursion have
// volatility units and the path is squared on output.
struct GarchParams {
  double alpha0 = 1e-6;  // constant term, > 0
  double alpha = 0.0;    // shock weight, >= 0
  double gamma = 0.0;    // extra weight on negative shocks, alpha + gamma >= 0
  double beta = 0.0;     // memory weight, >= 0
  double mean = 0.0;     // constant mean removed when the window was demeaned
  GarchVariant variant = GarchVariant::kGarch;
};

// Checks the sign invariants above (stationarity is enforced at fit time,
// not here). Throws std::invalid_argument.
void validate(const GarchParams& params);

// alpha + beta. Defined for the plain GARCH variant only.
double persistence(const GarchParams& params);

// Conditional variance path, one entry per residual. The recursion state
// starts from a backcast: pre-sample squared shock and variance both equal
// sigma0_sq (for TGARCH, their square roots), and the pre-sample
// negative-shock indicator is its symmetric expectation 1/2. So path[0] is
// already one recursion step, and alpha = beta = gamma = 0 collapses the
// whole path to alpha0 (TGARCH: alpha0^2).
std::vector<double> variance_path(const GarchParams& params,
                                  std::span<const double> residuals, double sigma0_sq);

// Gaussian log-likelihood of the residuals under the variance path.
double log_likelihood(const GarchParams& params, std::span<const double> residuals,
                      double sigma0_sq);
// Same, seeding sigma0_sq with the mean square of the residuals.
double log_likelihood(const GarchParams& params, std::span<const double> residuals);

struct FitOptions {
  int max_iterations = 500;
  double ll_rel_tol = 1e-8;
  double grad_tol = 1e-6;
};

struct GarchFit {
  GarchParams params;
  double log_likelihood = 0.0;
  double sigma0_sq = 0.0;  // recursion seed used during fitting
  bool converged = false;
  int iterations = 0;
};

// Maximum likelihood in an unconstrained reparameterization (log for
// alpha0, logistic for the stationarity budget, softmax for its split),
// minimized with BFGS from 3 fixed starting points. Deterministic.
// Residuals are used as given; demeaning is the caller's job. On hitting
// the iteration cap the best point found is returned with converged=false.
GarchFit fit_mle(std::span<const double> residuals, GarchVariant variant,
                 const FitOptions& options = {});

// Runs the recursion over the window and applies it once more, giving the
// variance forecast for the day after the window.
double forecast_one_step(const GarchFit& fit, std::span<const double> residuals);

enum class MeanMode {
  kWindowMean,  // subtract the window average (default)
  kArResidual,  // subtract a rolling first-order autoregression's forecasts
};

struct RollingOptions {
  size_t window_len = 90;
  int refit_every = 1;  // 1 = refit each step; k reuses a fit for k targets
  MeanMode mean_mode = MeanMode::kWindowMean;
  FitOptions fit;
};

struct RollingDiagnostic {
  Date date;
  std::string message;
};

struct RollingForecastResult {
  VarianceSeries forecasts;          // one entry per target day that produced a value
  std::vector<RollingDiagnostic> skipped;  // hard failures, never silently filled
  size_t windows_total = 0;
  size_t refits = 0;
  size_t not_converged = 0;  // fits that hit the iteration cap (still used)
  GarchFit last_fit;         // most recent successful fit
};

// One-step-ahead variance forecasts across the whole series: for each target
// day, demean the window_len preceding returns, fit, forecast. Windows with
// a failed fit are skipped with a diagnostic.
RollingForecastResult rolling_forecast(const ReturnSeries& series, GarchVariant variant,
                                       const RollingOptions& options = {});

// Fit report (variant, parameters, log-likelihood, convergence, iterations)
// as a JSON object text.
std::string fit_report_json(const GarchFit& fit);

}  // namespace ginn
