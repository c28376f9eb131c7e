#include "mean_model.hpp"

#include <cmath>
#include <stdexcept>

#include "market_data.hpp"

namespace ginn {

ArModel fit_ar(std::span<const double> window) {
  const size_t n = window.size();
  if (n < 3) throw std::invalid_argument("fit_ar needs at least 3 observations");
  const size_t m = n - 1;  // number of (lag, value) pairs
  double mean_x = 0.0, mean_y = 0.0;
  for (size_t k = 0; k < m; ++k) {
    mean_x += window[k];
    mean_y += window[k + 1];
  }
  mean_x /= static_cast<double>(m);
  mean_y /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (size_t k = 0; k < m; ++k) {
    const double dx = window[k] - mean_x;
    sxx += dx * dx;
    sxy += dx * (window[k + 1] - mean_y);
  }
  ArModel model;
  const double slope = sxy / sxx;
  if (sxx <= 0.0 || !std::isfinite(slope)) {
    // constant regressor: no usable lag signal, keep the window mean
    double mean = 0.0;
    for (double v : window) mean += v;
    model.intercept = mean / static_cast<double>(n);
    model.coefficient = 0.0;
    model.degenerate = true;
    return model;
  }
  model.coefficient = slope;
  model.intercept = mean_y - slope * mean_x;
  return model;
}

double predict_mean(const ArModel& model, double last_value) {
  return model.intercept + model.coefficient * last_value;
}

VarianceSeries ground_truth_variance(const ReturnSeries& returns, size_t window_len) {
  if (window_len < 3) throw std::invalid_argument("window_len must be at least 3");
  const auto windows = rolling_windows(returns, window_len);
  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(windows.size());
  values.reserve(windows.size());
  for (const auto& w : windows) {
    const ArModel model = fit_ar(w.values);
    const double mu = predict_mean(model, w.values.back());
    dates.push_back(w.target_date);
    values.push_back(realized_variance(returns.value(w.target_index), mu));
  }
  return VarianceSeries(std::move(dates), std::move(values));
}

}  // namespace ginn
