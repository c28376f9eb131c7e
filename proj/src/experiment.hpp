#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "series.hpp"
#include "simulator.hpp"
#include "training.hpp"

namespace ginn {

// Restrict two series to their common dates at or after `from` (all common
// dates when `from` is empty). Throws DataError when nothing overlaps.
std::pair<DatedSeries, DatedSeries> aligned_range(const DatedSeries& truth,
                                                  const DatedSeries& pred,
                                                  std::optional<Date> from);

// Score a forecast against the truth on their common dates at or after
// `from` (all common dates when `from` is empty). Throws DataError when the
// overlap is too small to score.
EvaluationReport score_on_range(std::string model, const DatedSeries& truth,
                                const DatedSeries& pred, std::optional<Date> from);

// One full train-and-evaluate pass: fit the normalizer on the truth values
// before `split`, build the hybrid training set (garch may be null when
// lambda is 1), train, roll predictions across the whole history, and score
// the dates at or after `split` (everything predicted when `split` is empty).
struct FitOutcome {
  VolatilityForecaster model;
  std::vector<double> loss_curve;
  VarianceSeries predictions;  // one per history date from input_window on
  EvaluationReport report;
};

FitOutcome fit_forecaster(const VarianceSeries& truth, const VarianceSeries* garch,
                          std::optional<Date> split, const TrainConfig& config,
                          const std::string& name);

// The study grid for the loss weight: 0.01 steps on [0, 0.2], then 0.05
// steps up to 1. 37 values.
std::vector<double> default_lambda_grid();

struct SweepCell {
  double lambda = 0.0;
  uint64_t seed = 0;
  EvaluationReport report;
};

struct LambdaSummary {
  double lambda = 0.0;
  double mean_r2 = 0.0;  // seed average
  double best_r2 = 0.0;  // best single seed
};

struct SweepResult {
  std::vector<SweepCell> cells;  // lambda-major, seed-minor order
  std::vector<LambdaSummary> summary;
  double best_lambda = 0.0;  // highest mean r2, ties broken by best run
};

SweepResult lambda_sweep(const VarianceSeries& truth, const VarianceSeries& garch,
                         Date split, const TrainConfig& base,
                         const std::vector<double>& lambdas,
                         const std::vector<uint64_t>& seeds);

std::string to_csv(const SweepResult& sweep);  // lambda,seed,r2,mse,mae

// Volatility memory regimes: [0.9, 1) counts as high persistence.
bool is_high_persistence(double pi);

// For every simulated process, a classical rolling forecast and one hybrid
// model per seed, each scored against the simulator's true conditional
// variance on the held-out 30%.
struct PersistenceRow {
  double pi = 0.0;
  std::string model;  // "garch" or "ginn"
  uint64_t seed = 0;  // 0 on the deterministic garch rows
  EvaluationReport report;
};

std::vector<PersistenceRow> persistence_experiment(
    const std::vector<SimulationSpec>& grid, const std::vector<uint64_t>& seeds,
    const TrainConfig& base);

std::string to_csv(const std::vector<PersistenceRow>& rows);  // pi,regime,model,...

}  // namespace ginn
