#include "evaluation.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "market_data.hpp"

namespace ginn {

namespace {

void check_aligned(const DatedSeries& truth, const DatedSeries& pred,
                   size_t min_n, const char* op) {
  if (truth.size() != pred.size()) {
    throw DataError(std::string(op) + ": series lengths differ (" +
                    std::to_string(truth.size()) + " vs " +
                    std::to_string(pred.size()) + ")");
  }
  if (truth.size() < min_n) {
    throw DataError(std::string(op) + ": needs at least " +
                    std::to_string(min_n) + " points, got " +
                    std::to_string(truth.size()));
  }
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth.date(i) != pred.date(i)) {
      throw DataError(std::string(op) + ": date mismatch at index " +
                      std::to_string(i) + " (" + truth.date(i).to_string() +
                      " vs " + pred.date(i).to_string() + ")");
    }
  }
}

}  // namespace

double r_squared(const DatedSeries& truth, const DatedSeries& pred) {
  check_aligned(truth, pred, 2, "r_squared");
  const auto n = truth.size();
  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += truth.value(i);
  mean /= static_cast<double>(n);
  double ss_tot = 0.0, ss_res = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = truth.value(i) - mean;
    ss_tot += d * d;
    const double e = truth.value(i) - pred.value(i);
    ss_res += e * e;
  }
  if (!(ss_tot > 0.0)) {
    throw DataError("r_squared: truth series is constant, baseline undefined");
  }
  return 1.0 - ss_res / ss_tot;
}

double mean_squared_error(const DatedSeries& truth, const DatedSeries& pred) {
  check_aligned(truth, pred, 1, "mse");
  double acc = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double e = truth.value(i) - pred.value(i);
    acc += e * e;
  }
  return acc / static_cast<double>(truth.size());
}

double mean_absolute_error(const DatedSeries& truth, const DatedSeries& pred) {
  check_aligned(truth, pred, 1, "mae");
  double acc = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    acc += std::abs(truth.value(i) - pred.value(i));
  }
  return acc / static_cast<double>(truth.size());
}

EvaluationReport evaluate_model(std::string model, const DatedSeries& truth,
                                const DatedSeries& pred) {
  EvaluationReport report;
  report.model = std::move(model);
  report.r2 = r_squared(truth, pred);
  report.mse = mean_squared_error(truth, pred);
  report.mae = mean_absolute_error(truth, pred);
  report.n = truth.size();
  return report;
}

std::string to_json(const EvaluationReport& report) {
  nlohmann::ordered_json doc;
  doc["model"] = report.model;
  doc["r2"] = report.r2;
  doc["mse"] = report.mse;
  doc["mae"] = report.mae;
  doc["n"] = report.n;
  return doc.dump(2);
}

SpectrumReport residual_spectrum(const DatedSeries& truth, const DatedSeries& pred) {
  check_aligned(truth, pred, 8, "residual_spectrum");
  const size_t n = truth.size();
  std::vector<double> residual(n);
  for (size_t t = 0; t < n; ++t) {
    residual[t] = pred.value(t) - truth.value(t);
  }

  // direct transform with a precomputed twiddle table; k*t is reduced mod n
  std::vector<std::complex<double>> twiddle(n);
  for (size_t j = 0; j < n; ++j) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) /
                         static_cast<double>(n);
    twiddle[j] = {std::cos(angle), std::sin(angle)};
  }

  SpectrumReport out;
  const size_t bins = n / 2 + 1;
  out.frequencies.reserve(bins);
  out.amplitudes.reserve(bins);
  for (size_t k = 0; k < bins; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (size_t t = 0; t < n; ++t) {
      acc += residual[t] * twiddle[(k * t) % n];
    }
    double amp = std::abs(acc) / static_cast<double>(n);
    if (k > 0 && 2 * k < n) amp *= 2.0;  // fold the conjugate half in
    out.frequencies.push_back(static_cast<double>(k) / static_cast<double>(n));
    out.amplitudes.push_back(amp);
  }
  return out;
}

std::string to_csv(const SpectrumReport& spectrum) {
  std::ostringstream out;
  out << "frequency,amplitude\n";
  for (size_t k = 0; k < spectrum.frequencies.size(); ++k) {
    out << format_double(spectrum.frequencies[k]) << ','
        << format_double(spectrum.amplitudes[k]) << '\n';
  }
  return out.str();
}

}  // namespace ginn
