#pragma once

#include <span>

#include "series.hpp"

namespace ginn {

// First-order autoregression r_t = intercept + coefficient * r_{t-1}, fitted
// by least squares on the (r_{k-1}, r_k) pairs of a rolling window. Used to
// strip the predictable mean out of returns before squaring the remainder
// into the variance proxy.
struct ArModel {
  double intercept = 0.0;
  double coefficient = 0.0;
  // True when the regressor had zero variance and the fit fell back to the
  // plain window mean (coefficient 0).
  bool degenerate = false;
};

// Needs at least 3 observations so the regression has 2+ pairs.
ArModel fit_ar(std::span<const double> window);

double predict_mean(const ArModel& model, double last_value);

// Squared demeaned return, the observable stand-in for latent variance.
inline double realized_variance(double realized_return, double mean_forecast) {
  const double e = realized_return - mean_forecast;
  return e * e;
}

// Walks the return series with a rolling window: for each target day t, fit
// the autoregression on the preceding window_len returns, predict the mean
// of day t, emit (r_t - mu_hat_t)^2. Output starts window_len entries into
// the input.
VarianceSeries ground_truth_variance(const ReturnSeries& returns, size_t window_len = 90);

}  // namespace ginn
