#include "experiment.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "garch.hpp"
#include "market_data.hpp"

namespace ginn {

std::pair<DatedSeries, DatedSeries> aligned_range(const DatedSeries& truth,
                                                  const DatedSeries& pred,
                                                  std::optional<Date> from) {
  std::vector<Date> dates = common_dates(truth, pred);
  if (from) {
    dates.erase(dates.begin(),
                std::lower_bound(dates.begin(), dates.end(), *from));
  }
  if (dates.empty()) {
    throw DataError("no common dates to score in the requested range");
  }
  return {restrict_to_dates(truth, dates), restrict_to_dates(pred, dates)};
}

EvaluationReport score_on_range(std::string model, const DatedSeries& truth,
                                const DatedSeries& pred, std::optional<Date> from) {
  const auto [t, p] = aligned_range(truth, pred, from);
  return evaluate_model(std::move(model), t, p);
}

FitOutcome fit_forecaster(const VarianceSeries& truth, const VarianceSeries* garch,
                          std::optional<Date> split, const TrainConfig& config,
                          const std::string& name) {
  config.validate();
  const auto window = static_cast<size_t>(config.network.input_window);
  const size_t train_end = split ? truth.lower_bound(*split) : truth.size();
  if (train_end < 2) {
    throw DataError("not enough history before the split to fit the normalizer");
  }
  const Normalizer norm = Normalizer::fit(truth.value_span(0, train_end));
  const Dataset data = make_training_set(truth, garch, norm, window, split);
  TrainResult trained = train(data, config);
  std::vector<double> curve = std::move(trained.loss_curve);
  VolatilityForecaster model(std::move(trained.network), norm, config);
  VarianceSeries predictions = model.rolling_predict(truth, window);
  EvaluationReport report = score_on_range(name, truth, predictions, split);
  return {std::move(model), std::move(curve), std::move(predictions),
          std::move(report)};
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  grid.reserve(37);
  for (int k = 0; k <= 20; ++k) grid.push_back(k / 100.0);
  for (int k = 25; k <= 100; k += 5) grid.push_back(k / 100.0);
  return grid;
}

SweepResult lambda_sweep(const VarianceSeries& truth, const VarianceSeries& garch,
                         Date split, const TrainConfig& base,
                         const std::vector<double>& lambdas,
                         const std::vector<uint64_t>& seeds) {
  if (lambdas.empty() || seeds.empty()) {
    throw std::invalid_argument("lambda_sweep needs at least one lambda and one seed");
  }
  SweepResult result;
  result.cells.reserve(lambdas.size() * seeds.size());
  result.summary.reserve(lambdas.size());
  for (double lambda : lambdas) {
    LambdaSummary summary;
    summary.lambda = lambda;
    summary.best_r2 = -std::numeric_limits<double>::infinity();
    for (uint64_t seed : seeds) {
      TrainConfig config = base;
      config.lambda = lambda;
      config.seed = seed;
      const FitOutcome outcome =
          fit_forecaster(truth, &garch, split, config, "ginn");
      summary.mean_r2 += outcome.report.r2;
      summary.best_r2 = std::max(summary.best_r2, outcome.report.r2);
      result.cells.push_back({lambda, seed, outcome.report});
    }
    summary.mean_r2 /= static_cast<double>(seeds.size());
    result.summary.push_back(summary);
  }
  // better seed-average wins; on an exact tie the stronger single run does
  const auto best = std::max_element(
      result.summary.begin(), result.summary.end(),
      [](const LambdaSummary& a, const LambdaSummary& b) {
        if (a.mean_r2 != b.mean_r2) return a.mean_r2 < b.mean_r2;
        return a.best_r2 < b.best_r2;
      });
  result.best_lambda = best->lambda;
  return result;
}

std::string to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "lambda,seed,r2,mse,mae\n";
  for (const SweepCell& cell : sweep.cells) {
    out << format_double(cell.lambda) << ',' << cell.seed << ','
        << format_double(cell.report.r2) << ',' << format_double(cell.report.mse)
        << ',' << format_double(cell.report.mae) << '\n';
  }
  return out.str();
}

bool is_high_persistence(double pi) { return pi >= 0.9 && pi < 1.0; }

std::vector<PersistenceRow> persistence_experiment(
    const std::vector<SimulationSpec>& grid, const std::vector<uint64_t>& seeds,
    const TrainConfig& base) {
  if (grid.empty() || seeds.empty()) {
    throw std::invalid_argument(
        "persistence_experiment needs at least one spec and one seed");
  }
  std::vector<PersistenceRow> rows;
  rows.reserve(grid.size() * (seeds.size() + 1));
  for (const SimulationSpec& spec : grid) {
    const Simulation sim = simulate_garch(spec);
    const double pi = spec.alpha + spec.beta;
    const VarianceSeries& truth = sim.true_variance;

    RollingOptions opts;
    opts.window_len = static_cast<size_t>(base.network.input_window);
    const RollingForecastResult rolled =
        rolling_forecast(sim.returns, GarchVariant::kGarch, opts);

    // hold out the last 30% of the simulated span
    const size_t split_index = truth.size() * 7 / 10;
    const Date split = truth.date(split_index);

    rows.push_back(
        {pi, "garch", 0,
         score_on_range("garch", truth, rolled.forecasts, split)});
    for (uint64_t seed : seeds) {
      TrainConfig config = base;
      config.seed = seed;
      const FitOutcome outcome =
          fit_forecaster(truth, &rolled.forecasts, split, config, "ginn");
      rows.push_back({pi, "ginn", seed, outcome.report});
    }
  }
  return rows;
}

std::string to_csv(const std::vector<PersistenceRow>& rows) {
  std::ostringstream out;
  out << "pi,regime,model,seed,r2,mse,mae\n";
  for (const PersistenceRow& row : rows) {
    out << format_double(row.pi) << ','
        << (is_high_persistence(row.pi) ? "high" : "low") << ',' << row.model
        << ',' << row.seed << ',' << format_double(row.report.r2) << ','
        << format_double(row.report.mse) << ',' << format_double(row.report.mae)
        << '\n';
  }
  return out.str();
}

}  // namespace ginn
