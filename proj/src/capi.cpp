#include "ginn/ginn.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "evaluation.hpp"
#include "experiment.hpp"
#include "garch.hpp"
#include "market_data.hpp"
#include "mean_model.hpp"
#include "series.hpp"
#include "simulator.hpp"
#include "training.hpp"

struct ginn_series {
  ginn::DatedSeries series;
};

struct ginn_model {
  ginn::VolatilityForecaster model;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& message) { g_last_error = message; }

// every exception type the core throws, folded onto the C status codes
template <class F>
ginn_status wrap(F&& body) noexcept {
  try {
    g_last_error.clear();
    body();
    return GINN_OK;
  } catch (const ginn::DataError& e) {
    set_error(e.what());
    return GINN_ERR_DATA;
  } catch (const ginn::NumericError& e) {
    set_error(e.what());
    return GINN_ERR_NUMERIC;
  } catch (const std::logic_error& e) {
    set_error(e.what());
    return GINN_ERR_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return GINN_ERR_INTERNAL;
  } catch (...) {
    set_error("unknown failure");
    return GINN_ERR_INTERNAL;
  }
}

ginn_status argument_error(const std::string& message) {
  set_error(message);
  return GINN_ERR_ARGUMENT;
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

ginn_series* make_series(ginn::DatedSeries series) {
  return new ginn_series{std::move(series)};
}

ginn::VarianceSeries to_variance(const ginn::DatedSeries& series) {
  return ginn::VarianceSeries(series.dates(), series.values());
}

// strict parse: unknown keys are caller mistakes, every value type checked
ginn::TrainConfig train_config_from_json(const char* text) {
  ginn::TrainConfig config;
  if (text == nullptr || *text == '\0') return config;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (const auto& [section, body] : doc.items()) {
      if (section == "network") {
        for (const auto& [key, value] : body.items()) {
          if (key == "num_lstm_layers") config.network.num_lstm_layers = value.get<int>();
          else if (key == "hidden_width") config.network.hidden_width = value.get<int>();
          else if (key == "dropout_rate") config.network.dropout_rate = value.get<double>();
          else if (key == "input_window") config.network.input_window = value.get<int>();
          else throw std::invalid_argument("unknown network config key: " + key);
        }
      } else if (section == "training") {
        for (const auto& [key, value] : body.items()) {
          if (key == "lambda") config.lambda = value.get<double>();
          else if (key == "epochs") config.epochs = value.get<size_t>();
          else if (key == "batch_size") config.batch_size = value.get<size_t>();
          else if (key == "learning_rate") config.learning_rate = value.get<double>();
          else if (key == "beta1") config.beta1 = value.get<double>();
          else if (key == "beta2") config.beta2 = value.get<double>();
          else if (key == "weight_decay") config.weight_decay = value.get<double>();
          else if (key == "epsilon") config.epsilon = value.get<double>();
          else if (key == "seed") config.seed = value.get<uint64_t>();
          else throw std::invalid_argument("unknown training config key: " + key);
        }
      } else {
        throw std::invalid_argument("unknown config section: " + section);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  config.validate();
  return config;
}

std::optional<ginn::Date> optional_day(int32_t day, int has_day) {
  if (has_day == 0) return std::nullopt;
  return ginn::Date::from_days(day);
}

std::string loss_curve_csv(const std::vector<double>& curve) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (size_t k = 0; k < curve.size(); ++k) {
    out << (k + 1) << ',' << ginn::format_double(curve[k]) << '\n';
  }
  return out.str();
}

}  // namespace

extern "C" {

const char* ginn_version(void) { return "0.1.0"; }

const char* ginn_last_error(void) { return g_last_error.c_str(); }

void ginn_string_free(char* text) { std::free(text); }

ginn_status ginn_date_parse(const char* text, int32_t* day_out) {
  if (text == nullptr || day_out == nullptr) {
    return argument_error("ginn_date_parse: null argument");
  }
  return wrap([&] { *day_out = ginn::Date::parse(text).days_since_epoch(); });
}

ginn_status ginn_date_to_string(int32_t day, char** text_out) {
  if (text_out == nullptr) {
    return argument_error("ginn_date_to_string: null argument");
  }
  return wrap([&] {
    *text_out = dup_string(ginn::Date::from_days(day).to_string());
  });
}

ginn_status ginn_format_double(double value, char** text_out) {
  if (text_out == nullptr) {
    return argument_error("ginn_format_double: null argument");
  }
  return wrap([&] { *text_out = dup_string(ginn::format_double(value)); });
}

ginn_status ginn_series_create(const int32_t* days, const double* values, size_t n,
                               ginn_series** out) {
  if (days == nullptr || values == nullptr || out == nullptr) {
    return argument_error("ginn_series_create: null argument");
  }
  return wrap([&] {
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return days[a] < days[b]; });
    std::vector<ginn::Date> dates;
    std::vector<double> sorted_values;
    dates.reserve(n);
    sorted_values.reserve(n);
    for (size_t i : order) {
      dates.push_back(ginn::Date::from_days(days[i]));
      sorted_values.push_back(values[i]);
    }
    *out = make_series(ginn::DatedSeries(std::move(dates), std::move(sorted_values)));
  });
}

void ginn_series_free(ginn_series* series) { delete series; }

size_t ginn_series_size(const ginn_series* series) {
  return series == nullptr ? 0 : series->series.size();
}

ginn_status ginn_series_get(const ginn_series* series, size_t index,
                            int32_t* day_out, double* value_out) {
  if (series == nullptr || day_out == nullptr || value_out == nullptr) {
    return argument_error("ginn_series_get: null argument");
  }
  if (index >= series->series.size()) {
    return argument_error("ginn_series_get: index " + std::to_string(index) +
                          " out of range for size " +
                          std::to_string(series->series.size()));
  }
  *day_out = series->series.date(index).days_since_epoch();
  *value_out = series->series.value(index);
  g_last_error.clear();
  return GINN_OK;
}

ginn_status ginn_series_save_csv(const ginn_series* series, const char* path,
                                 const char* value_header) {
  if (series == nullptr || path == nullptr || value_header == nullptr) {
    return argument_error("ginn_series_save_csv: null argument");
  }
  return wrap([&] { ginn::save_series_csv(series->series, path, value_header); });
}

ginn_status ginn_series_load_csv(const char* path, ginn_series** out) {
  if (path == nullptr || out == nullptr) {
    return argument_error("ginn_series_load_csv: null argument");
  }
  return wrap([&] { *out = make_series(ginn::load_series_csv(path)); });
}

ginn_status ginn_ingest_csv(const char* path, const char* date_format,
                            size_t mean_window, ginn_series** returns_out,
                            ginn_series** true_variance_out) {
  if (path == nullptr || returns_out == nullptr || true_variance_out == nullptr) {
    return argument_error("ginn_ingest_csv: null argument");
  }
  return wrap([&] {
    const ginn::DateFormat format =
        date_format == nullptr ? ginn::DateFormat::kIso
                               : ginn::date_format_from_string(date_format);
    const ginn::PriceSeries prices = ginn::load_price_csv(path, format);
    ginn::ReturnSeries returns = ginn::log_returns(prices);
    ginn::VarianceSeries truth = ginn::ground_truth_variance(returns, mean_window);
    *returns_out = make_series(std::move(returns));
    *true_variance_out = make_series(std::move(truth));
  });
}

ginn_status ginn_simulate(double alpha0, double alpha, double beta, size_t length,
                          size_t burn_in, uint64_t seed, ginn_series** returns_out,
                          ginn_series** true_variance_out) {
  if (returns_out == nullptr || true_variance_out == nullptr) {
    return argument_error("ginn_simulate: null argument");
  }
  return wrap([&] {
    ginn::SimulationSpec spec;
    spec.alpha0 = alpha0;
    spec.alpha = alpha;
    spec.beta = beta;
    spec.length = length;
    spec.burn_in = burn_in;
    spec.seed = seed;
    ginn::Simulation sim = ginn::simulate_garch(spec);
    *returns_out = make_series(std::move(sim.returns));
    *true_variance_out = make_series(std::move(sim.true_variance));
  });
}

ginn_status ginn_garch_roll(const ginn_series* returns, const char* variant,
                            size_t window, int refit_every,
                            ginn_series** forecasts_out, char** fit_json_out) {
  if (returns == nullptr || variant == nullptr || forecasts_out == nullptr) {
    return argument_error("ginn_garch_roll: null argument");
  }
  return wrap([&] {
    const ginn::GarchVariant kind = ginn::garch_variant_from_string(variant);
    ginn::RollingOptions options;
    options.window_len = window;
    options.refit_every = refit_every;
    const ginn::ReturnSeries series(returns->series.dates(),
                                    returns->series.values());
    ginn::RollingForecastResult rolled =
        ginn::rolling_forecast(series, kind, options);

    if (fit_json_out != nullptr) {
      nlohmann::ordered_json doc;
      doc["fit"] = nlohmann::ordered_json::parse(
          ginn::fit_report_json(rolled.last_fit));
      if (kind == ginn::GarchVariant::kGarch) {
        doc["pi"] = ginn::persistence(rolled.last_fit.params);
      }
      doc["windows_total"] = rolled.windows_total;
      doc["refits"] = rolled.refits;
      doc["not_converged"] = rolled.not_converged;
      nlohmann::ordered_json skipped = nlohmann::ordered_json::array();
      for (const auto& diag : rolled.skipped) {
        skipped.push_back({{"date", diag.date.to_string()},
                           {"message", diag.message}});
      }
      doc["skipped"] = std::move(skipped);
      *fit_json_out = dup_string(doc.dump(2));
    }
    *forecasts_out = make_series(std::move(rolled.forecasts));
  });
}

ginn_status ginn_train(const ginn_series* truth, const ginn_series* garch,
                       const char* config_json, int32_t split_day, int has_split,
                       char** checkpoint_json_out, char** loss_csv_out) {
  if (truth == nullptr || checkpoint_json_out == nullptr) {
    return argument_error("ginn_train: null argument");
  }
  return wrap([&] {
    const ginn::TrainConfig config = train_config_from_json(config_json);
    const ginn::VarianceSeries truth_series = to_variance(truth->series);
    std::optional<ginn::VarianceSeries> garch_series;
    if (garch != nullptr) garch_series = to_variance(garch->series);
    const std::optional<ginn::Date> split = optional_day(split_day, has_split);

    const size_t train_end =
        split ? truth_series.lower_bound(*split) : truth_series.size();
    if (train_end < 2) {
      throw ginn::DataError("not enough history before the split to train on");
    }
    const ginn::Normalizer norm =
        ginn::Normalizer::fit(truth_series.value_span(0, train_end));
    const ginn::Dataset data = ginn::make_training_set(
        truth_series, garch_series ? &*garch_series : nullptr, norm,
        static_cast<size_t>(config.network.input_window), split);
    ginn::TrainResult trained = ginn::train(data, config);
    ginn::VolatilityForecaster model(std::move(trained.network), norm, config);
    const std::string checkpoint = model.to_json();
    const std::string loss_csv = loss_curve_csv(trained.loss_curve);
    *checkpoint_json_out = dup_string(checkpoint);
    if (loss_csv_out != nullptr) *loss_csv_out = dup_string(loss_csv);
  });
}

ginn_status ginn_model_from_json(const char* checkpoint_json, ginn_model** out) {
  if (checkpoint_json == nullptr || out == nullptr) {
    return argument_error("ginn_model_from_json: null argument");
  }
  return wrap([&] {
    *out = new ginn_model{ginn::VolatilityForecaster::from_json(checkpoint_json)};
  });
}

void ginn_model_free(ginn_model* model) { delete model; }

ginn_status ginn_model_to_json(const ginn_model* model, char** json_out) {
  if (model == nullptr || json_out == nullptr) {
    return argument_error("ginn_model_to_json: null argument");
  }
  return wrap([&] { *json_out = dup_string(model->model.to_json()); });
}

ginn_status ginn_model_input_window(const ginn_model* model, size_t* window_out) {
  if (model == nullptr || window_out == nullptr) {
    return argument_error("ginn_model_input_window: null argument");
  }
  *window_out =
      static_cast<size_t>(model->model.network().config().input_window);
  g_last_error.clear();
  return GINN_OK;
}

ginn_status ginn_model_predict(const ginn_model* model, const ginn_series* history,
                               ginn_series** predictions_out) {
  if (model == nullptr || history == nullptr || predictions_out == nullptr) {
    return argument_error("ginn_model_predict: null argument");
  }
  return wrap([&] {
    const auto window = static_cast<size_t>(
        model->model.network().config().input_window);
    ginn::VarianceSeries predictions =
        model->model.rolling_predict(to_variance(history->series), window);
    *predictions_out = make_series(std::move(predictions));
  });
}

ginn_status ginn_evaluate(const char* model_name, const ginn_series* truth,
                          const ginn_series* pred, int32_t from_day, int has_from,
                          char** report_json_out) {
  if (model_name == nullptr || truth == nullptr || pred == nullptr ||
      report_json_out == nullptr) {
    return argument_error("ginn_evaluate: null argument");
  }
  return wrap([&] {
    const ginn::EvaluationReport report =
        ginn::score_on_range(model_name, truth->series, pred->series,
                             optional_day(from_day, has_from));
    *report_json_out = dup_string(ginn::to_json(report));
  });
}

ginn_status ginn_spectrum_csv(const ginn_series* truth, const ginn_series* pred,
                              int32_t from_day, int has_from, char** csv_out) {
  if (truth == nullptr || pred == nullptr || csv_out == nullptr) {
    return argument_error("ginn_spectrum_csv: null argument");
  }
  return wrap([&] {
    const auto [t, p] = ginn::aligned_range(truth->series, pred->series,
                                            optional_day(from_day, has_from));
    *csv_out = dup_string(ginn::to_csv(ginn::residual_spectrum(t, p)));
  });
}

ginn_status ginn_lambda_sweep(const ginn_series* truth, const ginn_series* garch,
                              int32_t split_day, const char* config_json,
                              const double* lambdas, size_t n_lambdas,
                              const uint64_t* seeds, size_t n_seeds,
                              char** csv_out, double* best_lambda_out) {
  if (truth == nullptr || garch == nullptr || csv_out == nullptr) {
    return argument_error("ginn_lambda_sweep: null argument");
  }
  if (seeds == nullptr || n_seeds == 0) {
    return argument_error("ginn_lambda_sweep: at least one seed required");
  }
  return wrap([&] {
    const ginn::TrainConfig base = train_config_from_json(config_json);
    const std::vector<double> lambda_list =
        lambdas == nullptr ? ginn::default_lambda_grid()
                           : std::vector<double>(lambdas, lambdas + n_lambdas);
    const std::vector<uint64_t> seed_list(seeds, seeds + n_seeds);
    const ginn::SweepResult result = ginn::lambda_sweep(
        to_variance(truth->series), to_variance(garch->series),
        ginn::Date::from_days(split_day), base, lambda_list, seed_list);
    *csv_out = dup_string(ginn::to_csv(result));
    if (best_lambda_out != nullptr) *best_lambda_out = result.best_lambda;
  });
}

ginn_status ginn_persistence(const double* alphas, size_t n_alphas,
                             const double* betas, size_t n_betas, double alpha0,
                             size_t length, size_t burn_in, uint64_t seed_base,
                             const uint64_t* seeds, size_t n_seeds,
                             const char* config_json, char** csv_out) {
  if (alphas == nullptr || betas == nullptr || csv_out == nullptr) {
    return argument_error("ginn_persistence: null argument");
  }
  if (seeds == nullptr || n_seeds == 0) {
    return argument_error("ginn_persistence: at least one seed required");
  }
  return wrap([&] {
    const ginn::TrainConfig base = train_config_from_json(config_json);
    std::vector<ginn::SimulationSpec> grid = ginn::persistence_grid(
        std::span<const double>(alphas, n_alphas),
        std::span<const double>(betas, n_betas), length, seed_base, burn_in);
    for (ginn::SimulationSpec& spec : grid) spec.alpha0 = alpha0;
    const std::vector<uint64_t> seed_list(seeds, seeds + n_seeds);
    const auto rows = ginn::persistence_experiment(grid, seed_list, base);
    *csv_out = dup_string(ginn::to_csv(rows));
  });
}

}  // extern "C"
