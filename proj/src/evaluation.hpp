#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "series.hpp"

namespace ginn {

// Out-of-sample score card for one model on one evaluation range.
struct EvaluationReport {
  std::string model;
  double r2 = 0.0;   // 1 - SS_res / SS_tot, test-set mean baseline
  double mse = 0.0;  // variance^2 units
  double mae = 0.0;  // variance units
  size_t n = 0;      // scored days
};

// All metrics require the two series to cover exactly the same dates, in the
// same order, and throw DataError otherwise. r_squared additionally needs at
// least two points and a non-constant truth (the baseline variance would be
// zero); mse/mae work from one point up.
double r_squared(const DatedSeries& truth, const DatedSeries& pred);
double mean_squared_error(const DatedSeries& truth, const DatedSeries& pred);
double mean_absolute_error(const DatedSeries& truth, const DatedSeries& pred);

EvaluationReport evaluate_model(std::string model, const DatedSeries& truth,
                                const DatedSeries& pred);

std::string to_json(const EvaluationReport& report);

// One-sided amplitude spectrum of the forecast residual (pred - truth).
// Amplitudes are |X_k| / n with the interior bins doubled, so bin 0 carries
// the mean residual, a unit sinusoid shows amplitude 1 in its own bin, and
// the energy identity sum(residual^2) = n * (A_0^2 + 0.5 * sum(interior A^2)
// [+ A_{n/2}^2 for even n]) holds to rounding.
struct SpectrumReport {
  std::vector<double> frequencies;  // cycles per day, k/n
  std::vector<double> amplitudes;   // non-negative, length floor(n/2) + 1
};

// Needs at least 8 aligned points to say anything about frequency content.
SpectrumReport residual_spectrum(const DatedSeries& truth, const DatedSeries& pred);

std::string to_csv(const SpectrumReport& spectrum);

}  // namespace ginn
