#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "evaluation.hpp"
#include "experiment.hpp"
#include "garch.hpp"
#include "rng.hpp"
#include "series.hpp"
#include "simulator.hpp"
#include "training.hpp"

using namespace ginn;

namespace {

std::vector<Date> day_range(int start, int count) {
  std::vector<Date> dates;
  dates.reserve(count);
  for (int k = 0; k < count; ++k) dates.push_back(Date::from_days(start + k));
  return dates;
}

DatedSeries series_of(const std::vector<double>& values, int start = 0) {
  return DatedSeries(day_range(start, static_cast<int>(values.size())), values);
}

bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("metrics on hand-checkable series") {
  const DatedSeries truth = series_of({1.0, 2.0, 3.0, 4.0});
  SUBCASE("perfect prediction") {
    CHECK(r_squared(truth, truth) == 1.0);
    CHECK(mean_squared_error(truth, truth) == 0.0);
    CHECK(mean_absolute_error(truth, truth) == 0.0);
  }
  SUBCASE("predicting the mean scores zero") {
    const DatedSeries mean_pred = series_of({2.5, 2.5, 2.5, 2.5});
    CHECK(r_squared(truth, mean_pred) == 0.0);
  }
  SUBCASE("errors of +1 and -1") {
    const DatedSeries pred = series_of({2.0, 1.0, 4.0, 3.0});
    CHECK(mean_squared_error(truth, pred) == 1.0);
    CHECK(mean_absolute_error(truth, pred) == 1.0);
  }
  SUBCASE("errors of 0 and 2 separate the two means") {
    const DatedSeries t2 = series_of({1.0, 1.0});
    const DatedSeries p2 = series_of({1.0, 3.0});
    CHECK(mean_squared_error(t2, p2) == 2.0);
    CHECK(mean_absolute_error(t2, p2) == 1.0);
  }
}

TEST_CASE("metrics agree with the high-precision fixture") {
  // frozen from an independent 50-digit computation over these exact doubles
  const DatedSeries truth = series_of(
      {1.9255616698314029, 2.065380521358083, 2.3225969903824675,
       1.935678570540809, 1.0228680274599302, 1.18076505842185,
       2.427425092238813, 0.8631140142480391, 1.777553732103447,
       1.074715877752793});
  const DatedSeries pred = series_of(
      {1.6802291015222028, 0.6534161113120107, 3.608015674159514,
       0.3513509449539982, -0.6510530305626556, 3.066862477570303,
       3.322304786518866, 0.2175417927550618, 1.5331616801603842,
       -0.523653188524777});
  CHECK(close_rel(r_squared(truth, pred), -4.532229530387299, 1e-12));
  CHECK(close_rel(mean_squared_error(truth, pred), 1.6407686272604616, 1e-12));
  CHECK(close_rel(mean_absolute_error(truth, pred), 1.147027479888383, 1e-12));

  const EvaluationReport report = evaluate_model("fixture", truth, pred);
  CHECK(report.model == "fixture");
  CHECK(report.n == 10);
  CHECK(report.r2 == r_squared(truth, pred));
  CHECK(report.mse == mean_squared_error(truth, pred));
  CHECK(report.mae == mean_absolute_error(truth, pred));
}

TEST_CASE("squared mean error never beats mean squared error") {
  Rng rng(404);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(40));
    std::vector<double> tv(n), pv(n);
    for (int k = 0; k < n; ++k) {
      tv[k] = 4.0 * rng.uniform() - 2.0;
      pv[k] = 4.0 * rng.uniform() - 2.0;
    }
    const DatedSeries t = series_of(tv), p = series_of(pv);
    const double mse = mean_squared_error(t, p);
    const double mae = mean_absolute_error(t, p);
    CHECK(mse >= 0.0);
    CHECK(mae >= 0.0);
    CHECK(mae * mae <= mse + 1e-15);
  }
}

TEST_CASE("metrics depend on values only, not the calendar") {
  Rng rng(7);
  std::vector<double> tv(12), pv(12);
  for (size_t k = 0; k < tv.size(); ++k) {
    tv[k] = rng.uniform() + 0.1;
    pv[k] = rng.uniform() + 0.1;
  }
  const DatedSeries t1 = series_of(tv, 0), p1 = series_of(pv, 0);
  // same pairs on a shifted, stretched calendar
  std::vector<Date> stretched;
  for (int k = 0; k < 12; ++k) stretched.push_back(Date::from_days(500 + 3 * k));
  const DatedSeries t2(stretched, tv), p2(stretched, pv);
  CHECK(r_squared(t1, p1) == r_squared(t2, p2));
  CHECK(mean_squared_error(t1, p1) == mean_squared_error(t2, p2));
  CHECK(mean_absolute_error(t1, p1) == mean_absolute_error(t2, p2));
}

TEST_CASE("metrics reject misaligned or degenerate input") {
  const DatedSeries a = series_of({1.0, 2.0, 3.0});
  const DatedSeries shorter = series_of({1.0, 2.0});
  const DatedSeries shifted = series_of({1.0, 2.0, 3.0}, 1);
  CHECK_THROWS_AS(mean_squared_error(a, shorter), DataError);
  CHECK_THROWS_AS(mean_absolute_error(a, shifted), DataError);
  CHECK_THROWS_AS(r_squared(a, shifted), DataError);
  // single point: averages fine, correlation meaningless
  const DatedSeries one = series_of({2.0});
  CHECK(mean_squared_error(one, one) == 0.0);
  CHECK_THROWS_AS(r_squared(one, one), DataError);
  // constant truth has no baseline variance
  const DatedSeries flat = series_of({0.5, 0.5, 0.5});
  CHECK_THROWS_AS(r_squared(flat, a), DataError);
}

TEST_CASE("spectrum of a zero residual is identically zero") {
  Rng rng(11);
  std::vector<double> v(20);
  for (auto& x : v) x = rng.uniform();
  const DatedSeries t = series_of(v);
  const SpectrumReport spectrum = residual_spectrum(t, t);
  REQUIRE(spectrum.amplitudes.size() == 11);  // 20/2 + 1
  for (double a : spectrum.amplitudes) CHECK(a == 0.0);
}

TEST_CASE("spectrum shapes, frequencies, and degenerate input") {
  const DatedSeries t8 = series_of({1, 2, 3, 4, 5, 6, 7, 8});
  const DatedSeries p8 = series_of({2, 1, 4, 3, 6, 5, 8, 7});
  const SpectrumReport even = residual_spectrum(t8, p8);
  REQUIRE(even.frequencies.size() == 5);  // floor(8/2)+1
  for (size_t k = 0; k < 5; ++k) {
    CHECK(even.frequencies[k] == static_cast<double>(k) / 8.0);
    CHECK(even.amplitudes[k] >= 0.0);
  }

  const DatedSeries t9 = series_of({1, 2, 3, 4, 5, 6, 7, 8, 9});
  const SpectrumReport odd = residual_spectrum(t9, series_of({2, 1, 4, 3, 6, 5, 8, 7, 9}));
  CHECK(odd.frequencies.size() == 5);  // floor(9/2)+1

  const DatedSeries t7 = series_of({1, 2, 3, 4, 5, 6, 7});
  CHECK_THROWS_AS(residual_spectrum(t7, t7), DataError);
}

TEST_CASE("constant residual concentrates at frequency zero") {
  std::vector<double> tv(16, 1.0), pv(16, 1.5);
  const SpectrumReport spectrum = residual_spectrum(series_of(tv), series_of(pv));
  CHECK(std::abs(spectrum.amplitudes[0] - 0.5) < 1e-12);
  for (size_t k = 1; k < spectrum.amplitudes.size(); ++k) {
    CHECK(spectrum.amplitudes[k] < 1e-9);
  }
}

TEST_CASE("a pure sinusoid lights up exactly its own bin") {
  const int n = 64;
  const size_t cycles = 5;
  std::vector<double> tv(n, 0.0), pv(n);
  for (int t = 0; t < n; ++t) {
    pv[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(cycles) * t / n);
  }
  const SpectrumReport spectrum = residual_spectrum(series_of(tv), series_of(pv));
  CHECK(std::abs(spectrum.amplitudes[cycles] - 1.0) < 1e-9);
  double off_bin = 0.0;
  for (size_t k = 0; k < spectrum.amplitudes.size(); ++k) {
    if (k != cycles) off_bin = std::max(off_bin, spectrum.amplitudes[k]);
  }
  CHECK(off_bin < 1e-9);
  CHECK(spectrum.frequencies[cycles] == static_cast<double>(cycles) / 64.0);
}

TEST_CASE("spectrum matches the independently computed fixture") {
  // residual and one-sided amplitudes frozen from two independent transforms
  const std::vector<double> residual = {
      -1.5616855760580215, -0.9384588163290486, 1.5424959706739192,
      1.3429496387191207,  -0.6974757531247584, 0.24188892225370617,
      1.175473740646244,   -0.4340244997346874, 1.2607174271483066,
      -1.247325856871008,  1.9599805311995548,  1.9322284190498595,
      -1.3534286512367535, 1.304440529673251,   -0.08818920467348335,
      -0.6690516243912699};
  const std::vector<double> expected = {
      0.23565844980905823, 0.4702949481248688, 0.6140129590012433,
      0.28864795170080304, 0.9361751517869328, 0.21364481820891928,
      0.9670967087800457,  0.6220955978852165, 0.04407761076281777};
  const std::vector<double> zeros(residual.size(), 0.0);
  const SpectrumReport spectrum =
      residual_spectrum(series_of(zeros), series_of(residual));
  REQUIRE(spectrum.amplitudes.size() == expected.size());
  for (size_t k = 0; k < expected.size(); ++k) {
    CHECK(close_rel(spectrum.amplitudes[k], expected[k], 1e-12));
  }
}

TEST_CASE("spectrum preserves residual energy") {
  for (int n : {33, 64, 128}) {
    Rng rng(1000 + n);
    std::vector<double> tv(n), pv(n);
    for (int k = 0; k < n; ++k) {
      tv[k] = rng.uniform();
      pv[k] = rng.uniform() * 2.0;
    }
    const DatedSeries t = series_of(tv), p = series_of(pv);
    const SpectrumReport s = residual_spectrum(t, p);

    double time_energy = 0.0;
    for (int k = 0; k < n; ++k) {
      const double r = pv[k] - tv[k];
      time_energy += r * r;
    }
    double freq_energy = s.amplitudes[0] * s.amplitudes[0];
    const bool has_nyquist = n % 2 == 0;
    const size_t last = s.amplitudes.size() - 1;
    for (size_t k = 1; k < s.amplitudes.size(); ++k) {
      const bool interior = k < last || !has_nyquist;
      const double a2 = s.amplitudes[k] * s.amplitudes[k];
      freq_energy += interior ? 0.5 * a2 : a2;
    }
    freq_energy *= n;
    CHECK(close_rel(time_energy, freq_energy, 1e-9));
  }
}

TEST_CASE("spectrum csv is plot ready") {
  const DatedSeries t = series_of({1, 2, 3, 4, 5, 6, 7, 8});
  const std::string csv = to_csv(residual_spectrum(t, series_of({0, 2, 3, 4, 5, 6, 7, 8})));
  CHECK(csv.rfind("frequency,amplitude\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);  // header + 5 bins
}

TEST_CASE("report serializes to json with all fields") {
  EvaluationReport report;
  report.model = "garch";
  report.r2 = 0.25;
  report.mse = 1.5e-8;
  report.mae = 9e-5;
  report.n = 123;
  const nlohmann::json doc = nlohmann::json::parse(to_json(report));
  CHECK(doc["model"] == "garch");
  CHECK(doc["r2"].get<double>() == 0.25);
  CHECK(doc["mse"].get<double>() == 1.5e-8);
  CHECK(doc["mae"].get<double>() == 9e-5);
  CHECK(doc["n"].get<size_t>() == 123);
}

TEST_CASE("the loss weight study grid steps fine then coarse") {
  const std::vector<double> grid = default_lambda_grid();
  REQUIRE(grid.size() == 37);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[1] == 0.01);
  CHECK(grid[20] == 0.2);
  CHECK(grid[21] == 0.25);
  for (size_t k = 1; k < grid.size(); ++k) {
    CHECK(grid[k] > grid[k - 1]);
    const double step = grid[k] - grid[k - 1];
    const double expected = k <= 20 ? 0.01 : 0.05;
    CHECK(std::abs(step - expected) < 1e-12);
  }
  for (double v : grid) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("scoring a perfect oracle forecaster gives r squared one") {
  SimulationSpec spec;
  spec.length = 120;
  spec.seed = 9;
  const Simulation sim = simulate_garch(spec);
  const EvaluationReport report = score_on_range(
      "oracle", sim.true_variance, sim.true_variance, sim.true_variance.date(80));
  CHECK(report.r2 == 1.0);
  CHECK(report.mse == 0.0);
  CHECK(report.n == 40);
}

TEST_CASE("range scoring trims to the common dates after the boundary") {
  const DatedSeries truth = series_of({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  // forecasts only exist from day 4, with a hole at day 6
  std::vector<Date> pd = {Date::from_days(4), Date::from_days(5),
                          Date::from_days(7), Date::from_days(8),
                          Date::from_days(9)};
  const DatedSeries pred(pd, {5.0, 6.0, 8.0, 9.0, 10.0});
  const EvaluationReport all = score_on_range("m", truth, pred, std::nullopt);
  CHECK(all.n == 5);
  const EvaluationReport tail =
      score_on_range("m", truth, pred, Date::from_days(7));
  CHECK(tail.n == 3);
  CHECK_THROWS_AS(score_on_range("m", truth, pred, Date::from_days(11)), DataError);
}

namespace {

struct SweepFixture {
  VarianceSeries truth;
  VarianceSeries garch;
  Date split;
  TrainConfig base;

  SweepFixture()
      : truth(VarianceSeries({Date::from_days(0)}, {1.0})),
        garch(truth),
        split(Date::from_days(0)) {
    SimulationSpec spec;
    spec.length = 160;
    spec.seed = 31;
    const Simulation sim = simulate_garch(spec);
    RollingOptions opts;
    opts.window_len = 20;
    truth = sim.true_variance;
    garch = rolling_forecast(sim.returns, GarchVariant::kGarch, opts).forecasts;
    split = truth.date(truth.size() * 7 / 10);
    base.network.num_lstm_layers = 1;
    base.network.hidden_width = 8;
    base.network.input_window = 20;
    base.epochs = 3;
    base.batch_size = 32;
  }
};

}  // namespace

TEST_CASE("lambda sweep emits one scored row per cell and picks the best average") {
  const SweepFixture fx;
  const std::vector<double> lambdas = {0.0, 1.0};
  const std::vector<uint64_t> seeds = {1, 2};
  const SweepResult sweep =
      lambda_sweep(fx.truth, fx.garch, fx.split, fx.base, lambdas, seeds);

  REQUIRE(sweep.cells.size() == 4);
  REQUIRE(sweep.summary.size() == 2);
  // lambda-major, seed-minor order
  CHECK(sweep.cells[0].lambda == 0.0);
  CHECK(sweep.cells[0].seed == 1);
  CHECK(sweep.cells[1].lambda == 0.0);
  CHECK(sweep.cells[1].seed == 2);
  CHECK(sweep.cells[2].lambda == 1.0);
  for (const SweepCell& cell : sweep.cells) {
    CHECK(cell.report.n > 0);
    CHECK(cell.report.mse >= 0.0);
    CHECK(cell.report.mae * cell.report.mae <= cell.report.mse + 1e-15);
  }
  // recompute the selection rule from the emitted rows
  for (int li = 0; li < 2; ++li) {
    const double mean =
        0.5 * (sweep.cells[2 * li].report.r2 + sweep.cells[2 * li + 1].report.r2);
    CHECK(close_rel(sweep.summary[li].mean_r2, mean, 1e-15));
  }
  const double expected_best = sweep.summary[0].mean_r2 >= sweep.summary[1].mean_r2
                                   ? sweep.summary[0].lambda
                                   : sweep.summary[1].lambda;
  CHECK(sweep.best_lambda == expected_best);

  const std::string csv = to_csv(sweep);
  CHECK(csv.rfind("lambda,seed,r2,mse,mae\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  // repeat run is bit-identical (training is seeded, garch fit deterministic)
  const SweepResult again =
      lambda_sweep(fx.truth, fx.garch, fx.split, fx.base, lambdas, seeds);
  CHECK(to_csv(again) == csv);
}

TEST_CASE("a single cell sweep has exactly one row") {
  const SweepFixture fx;
  const SweepResult sweep =
      lambda_sweep(fx.truth, fx.garch, fx.split, fx.base, {0.5}, {3});
  CHECK(sweep.cells.size() == 1);
  CHECK(sweep.cells[0].lambda == 0.5);
  CHECK(sweep.best_lambda == 0.5);
  CHECK_THROWS_AS(lambda_sweep(fx.truth, fx.garch, fx.split, fx.base, {}, {1}),
                  std::invalid_argument);
}

TEST_CASE("persistence regimes split at 0.9") {
  CHECK(is_high_persistence(0.9));
  CHECK(is_high_persistence(0.95));
  CHECK_FALSE(is_high_persistence(0.7));
  CHECK_FALSE(is_high_persistence(0.89999));
  CHECK_FALSE(is_high_persistence(1.0));  // nonstationary, not "high"
}

TEST_CASE("persistence experiment scores garch and the hybrid on each cell") {
  SimulationSpec high;
  high.alpha = 0.1;
  high.beta = 0.8;
  high.length = 160;
  high.seed = 51;
  SimulationSpec low;
  low.alpha = 0.2;
  low.beta = 0.5;
  low.length = 160;
  low.seed = 52;

  TrainConfig base;
  base.network.num_lstm_layers = 1;
  base.network.hidden_width = 8;
  base.network.input_window = 20;
  base.epochs = 3;
  base.batch_size = 32;

  const auto rows = persistence_experiment({high, low}, {7}, base);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].pi == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(rows[0].model == "garch");
  CHECK(rows[1].model == "ginn");
  CHECK(rows[1].seed == 7);
  CHECK(rows[2].pi == doctest::Approx(0.7).epsilon(1e-12));
  for (const PersistenceRow& row : rows) {
    CHECK(row.report.n > 0);
    CHECK(row.report.r2 <= 1.0);
  }

  const std::string csv = to_csv(rows);
  CHECK(csv.rfind("pi,regime,model,seed,r2,mse,mae\n", 0) == 0);
  CHECK(csv.find("high,garch") != std::string::npos);
  CHECK(csv.find("low,garch") != std::string::npos);
  CHECK(csv.find("high,ginn") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}

TEST_CASE("fit pipeline trains, predicts over the history, and scores the holdout") {
  const SweepFixture fx;
  TrainConfig config = fx.base;
  config.lambda = 0.01;
  config.seed = 2;
  const FitOutcome outcome =
      fit_forecaster(fx.truth, &fx.garch, fx.split, config, "ginn");
  CHECK(outcome.loss_curve.size() == 3);
  CHECK(outcome.predictions.size() == fx.truth.size() - 20);
  CHECK(outcome.report.model == "ginn");
  // every scored day is in the holdout
  CHECK(outcome.report.n > 0);
  CHECK(outcome.report.n <= fx.truth.size() - fx.truth.lower_bound(fx.split));
  // the trained model reproduces the emitted predictions
  const VarianceSeries again = outcome.model.rolling_predict(fx.truth, 20);
  REQUIRE(again.size() == outcome.predictions.size());
  for (size_t k = 0; k < again.size(); ++k) {
    CHECK(again.value(k) == outcome.predictions.value(k));
  }
  // lambda below one without garch targets is rejected end to end
  CHECK_THROWS_AS(fit_forecaster(fx.truth, nullptr, fx.split, config, "x"),
                  std::invalid_argument);
  TrainConfig pure = config;
  pure.lambda = 1.0;
  CHECK_NOTHROW(fit_forecaster(fx.truth, nullptr, fx.split, pure, "lstm"));
}
