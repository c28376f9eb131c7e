#include "training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "errors.hpp"
#include "market_data.hpp"

namespace ginn {

namespace {

double mean_squared_error(const Eigen::VectorXd& target,
                          const Eigen::VectorXd& pred) {
  return (target - pred).squaredNorm() / static_cast<double>(target.size());
}

void check_loss_args(const Eigen::VectorXd& sigma2_true,
                     const Eigen::VectorXd& sigma2_garch,
                     const Eigen::VectorXd& sigma2_pred, double lambda) {
  if (sigma2_true.size() != sigma2_pred.size() ||
      sigma2_garch.size() != sigma2_pred.size()) {
    throw std::invalid_argument("loss inputs must have equal lengths");
  }
  if (sigma2_pred.size() == 0) {
    throw std::invalid_argument("loss needs at least one prediction");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
}

}  // namespace

double ginn_loss(const Eigen::VectorXd& sigma2_true,
                 const Eigen::VectorXd& sigma2_garch,
                 const Eigen::VectorXd& sigma2_pred, double lambda) {
  check_loss_args(sigma2_true, sigma2_garch, sigma2_pred, lambda);
  return lambda * mean_squared_error(sigma2_true, sigma2_pred) +
         (1.0 - lambda) * mean_squared_error(sigma2_garch, sigma2_pred);
}

Eigen::VectorXd ginn_loss_gradient(const Eigen::VectorXd& sigma2_true,
                                   const Eigen::VectorXd& sigma2_garch,
                                   const Eigen::VectorXd& sigma2_pred,
                                   double lambda) {
  check_loss_args(sigma2_true, sigma2_garch, sigma2_pred, lambda);
  const double scale = 2.0 / static_cast<double>(sigma2_pred.size());
  return scale * (lambda * (sigma2_pred - sigma2_true) +
                  (1.0 - lambda) * (sigma2_pred - sigma2_garch));
}

void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                OptimizerState& state) {
  if (grad.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw std::invalid_argument("optimizer state and gradient must match parameters");
  }
  state.step += 1;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
  state.v = (state.beta2 * state.v.array() +
             (1.0 - state.beta2) * grad.array().square())
                .matrix();
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const Eigen::ArrayXd m_hat = state.m.array() / bc1;
  const Eigen::ArrayXd v_hat = state.v.array() / bc2;
  params.array() -= state.learning_rate *
                    (m_hat / (v_hat.sqrt() + state.epsilon) +
                     state.weight_decay * params.array());
}

Normalizer Normalizer::fit(std::span<const double> train_variances) {
  if (train_variances.size() < 2) {
    throw DataError("normalizer needs at least two training variances");
  }
  double sum = 0.0;
  for (double v : train_variances) sum += std::log(v + kShift);
  const double mean = sum / static_cast<double>(train_variances.size());
  double ss = 0.0;
  for (double v : train_variances) {
    const double d = std::log(v + kShift) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(train_variances.size()));
  if (!(sd > 0.0) || !std::isfinite(sd) || !std::isfinite(mean)) {
    throw DataError("training variances have no spread, cannot normalize");
  }
  return {mean, sd};
}

Normalizer Normalizer::from_moments(double log_mean, double log_sd) {
  if (!std::isfinite(log_mean) || !(log_sd > 0.0) || !std::isfinite(log_sd)) {
    throw std::invalid_argument("normalizer moments must be finite with sd > 0");
  }
  return {log_mean, log_sd};
}

double Normalizer::transform(double variance) const {
  return (std::log(variance + kShift) - log_mean_) / log_sd_;
}

double Normalizer::inverse(double z) const {
  return std::max(std::exp(z * log_sd_ + log_mean_) - kShift, 0.0);
}

Dataset make_training_set(const VarianceSeries& truth,
                          const VarianceSeries* garch_forecasts,
                          const Normalizer& norm, std::size_t window_len,
                          std::optional<Date> end_exclusive) {
  const auto windows = rolling_windows(truth, window_len);
  std::vector<const RollingWindow*> kept;
  std::vector<double> garch_values;
  for (const auto& w : windows) {
    if (end_exclusive && !(w.target_date < *end_exclusive)) continue;
    if (garch_forecasts != nullptr) {
      const auto at = garch_forecasts->find(w.target_date);
      if (!at) continue;
      garch_values.push_back(garch_forecasts->value(*at));
    }
    kept.push_back(&w);
  }
  if (kept.empty()) {
    throw DataError("no usable training rows after alignment and split");
  }
  Dataset data;
  data.has_garch = garch_forecasts != nullptr;
  const auto rows = static_cast<Eigen::Index>(kept.size());
  data.inputs.resize(rows, static_cast<Eigen::Index>(window_len));
  data.target_true.resize(rows);
  data.target_garch.resize(rows);
  data.dates.reserve(kept.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const RollingWindow& w = *kept[r];
    for (Eigen::Index j = 0; j < data.inputs.cols(); ++j) {
      data.inputs(r, j) = norm.transform(w.values[j]);
    }
    data.target_true[r] = norm.transform(truth.value(w.target_index));
    data.target_garch[r] = data.has_garch ? norm.transform(garch_values[r])
                                          : data.target_true[r];
    data.dates.push_back(w.target_date);
  }
  return data;
}

void TrainConfig::validate() const {
  network.validate();
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("lambda must lie in [0, 1]");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 2) {
    throw std::invalid_argument("batch size must be at least 2 (batch norm)");
  }
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("moment decay rates must lie in [0, 1)");
  }
  if (weight_decay < 0.0) {
    throw std::invalid_argument("weight decay must be non-negative");
  }
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

TrainResult train(const Dataset& data, const TrainConfig& config) {
  config.validate();
  const Eigen::Index n = data.inputs.rows();
  if (n < 2) {
    throw DataError("training needs at least two samples");
  }
  if (data.inputs.cols() != config.network.input_window) {
    throw std::invalid_argument("dataset window length does not match the network");
  }
  if (data.target_true.size() != n || data.target_garch.size() != n) {
    throw std::invalid_argument("dataset targets must match the input rows");
  }
  if (!data.has_garch && config.lambda < 1.0) {
    throw std::invalid_argument(
        "hybrid loss needs GARCH targets; provide them or set lambda = 1");
  }

  Rng rng(config.seed);
  LstmNetwork net(config.network, rng);
  OptimizerState opt(net.parameters().size());
  opt.learning_rate = config.learning_rate;
  opt.beta1 = config.beta1;
  opt.beta2 = config.beta2;
  opt.weight_decay = config.weight_decay;
  opt.epsilon = config.epsilon;

  // Batch boundaries: fixed chunks of batch_size, except that a trailing
  // single sample is folded into the previous batch so batch norm always sees
  // at least two rows.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> chunks;
  for (Eigen::Index lo = 0; lo < n;) {
    Eigen::Index hi = std::min<Eigen::Index>(lo + config.batch_size, n);
    if (n - hi == 1) hi = n;
    chunks.emplace_back(lo, hi);
    lo = hi;
  }

  std::vector<size_t> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<double> curve;
  curve.reserve(static_cast<size_t>(config.epochs));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (size_t k = 0; k < chunks.size(); ++k) {
      const auto [lo, hi] = chunks[k];
      const Eigen::Index rows = hi - lo;
      Eigen::MatrixXd xb(rows, data.inputs.cols());
      Eigen::VectorXd tb(rows), gb(rows);
      for (Eigen::Index r = 0; r < rows; ++r) {
        const auto src = static_cast<Eigen::Index>(order[lo + r]);
        xb.row(r) = data.inputs.row(src);
        tb[r] = data.target_true[src];
        gb[r] = data.target_garch[src];
      }
      const Eigen::VectorXd pred = net.forward_train(xb, rng);
      const double loss = ginn_loss(tb, gb, pred, config.lambda);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training loss went non-finite in epoch " << epoch + 1
            << " (batch " << k + 1 << " of " << chunks.size() << "); ";
        if (curve.empty()) {
          msg << "no epoch finished with a finite mean loss";
        } else {
          msg << "last finite epoch was " << curve.size() << " with mean loss "
              << curve.back();
        }
        throw NumericError(msg.str());
      }
      loss_sum += loss * static_cast<double>(rows);
      const Eigen::VectorXd upstream =
          ginn_loss_gradient(tb, gb, pred, config.lambda);
      const Eigen::VectorXd grad = net.backward(upstream);
      adamw_step(net.parameters(), grad, opt);
    }
    curve.push_back(loss_sum / static_cast<double>(n));
  }
  return {std::move(net), std::move(curve)};
}

VolatilityForecaster::VolatilityForecaster(LstmNetwork network,
                                           Normalizer normalizer,
                                           TrainConfig config)
    : network_(std::move(network)),
      normalizer_(normalizer),
      config_(std::move(config)) {
  if (network_.config().input_window != config_.network.input_window) {
    throw std::invalid_argument("forecaster config does not match its network");
  }
}

VarianceSeries VolatilityForecaster::rolling_predict(
    const VarianceSeries& history, std::size_t window_len) const {
  if (static_cast<int>(window_len) != network_.config().input_window) {
    throw std::invalid_argument(
        "window length " + std::to_string(window_len) +
        " does not match the model input window " +
        std::to_string(network_.config().input_window));
  }
  const auto windows = rolling_windows(history, window_len);
  const auto rows = static_cast<Eigen::Index>(windows.size());
  Eigen::MatrixXd inputs(rows, static_cast<Eigen::Index>(window_len));
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
      inputs(r, j) = normalizer_.transform(windows[r].values[j]);
    }
  }
  const Eigen::VectorXd raw = network_.forward(inputs);
  std::vector<Date> dates;
  std::vector<double> values;
  dates.reserve(windows.size());
  values.reserve(windows.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    dates.push_back(windows[r].target_date);
    values.push_back(normalizer_.inverse(raw[r]));
  }
  return {std::move(dates), std::move(values)};
}

std::string VolatilityForecaster::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "ginn-checkpoint-v1";
  doc["network"] = {
      {"num_lstm_layers", config_.network.num_lstm_layers},
      {"hidden_width", config_.network.hidden_width},
      {"dropout_rate", config_.network.dropout_rate},
      {"input_window", config_.network.input_window},
  };
  doc["training"] = {
      {"lambda", config_.lambda},
      {"epochs", config_.epochs},
      {"batch_size", config_.batch_size},
      {"learning_rate", config_.learning_rate},
      {"beta1", config_.beta1},
      {"beta2", config_.beta2},
      {"weight_decay", config_.weight_decay},
      {"epsilon", config_.epsilon},
      {"seed", config_.seed},
  };
  doc["normalizer"] = {
      {"log_mean", normalizer_.log_mean()},
      {"log_sd", normalizer_.log_sd()},
  };
  const auto& rm = network_.bn_running_mean();
  const auto& rv = network_.bn_running_var();
  doc["batch_norm"] = {
      {"running_mean", std::vector<double>(rm.data(), rm.data() + rm.size())},
      {"running_var", std::vector<double>(rv.data(), rv.data() + rv.size())},
  };
  const auto& p = network_.parameters();
  doc["parameters"] = std::vector<double>(p.data(), p.data() + p.size());
  return doc.dump(2);
}

namespace {

const nlohmann::json& require_field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw DataError(std::string("checkpoint is missing field '") + key + "'");
  }
  return *it;
}

Eigen::VectorXd to_vector(const nlohmann::json& j, const char* key) {
  const auto& arr = require_field(j, key);
  if (!arr.is_array()) {
    throw DataError(std::string("checkpoint field '") + key + "' must be an array");
  }
  Eigen::VectorXd v(arr.size());
  Eigen::Index at = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) {
      throw DataError(std::string("checkpoint field '") + key +
                      "' must hold numbers");
    }
    v[at++] = x.get<double>();
  }
  return v;
}

}  // namespace

VolatilityForecaster VolatilityForecaster::from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (require_field(doc, "format").get<std::string>() != "ginn-checkpoint-v1") {
      throw DataError("unknown checkpoint format");
    }
    const auto& net = require_field(doc, "network");
    const auto& tr = require_field(doc, "training");
    const auto& nrm = require_field(doc, "normalizer");
    const auto& bn = require_field(doc, "batch_norm");
    TrainConfig config;
    config.network.num_lstm_layers = require_field(net, "num_lstm_layers").get<int>();
    config.network.hidden_width = require_field(net, "hidden_width").get<int>();
    config.network.dropout_rate = require_field(net, "dropout_rate").get<double>();
    config.network.input_window = require_field(net, "input_window").get<int>();
    config.lambda = require_field(tr, "lambda").get<double>();
    config.epochs = require_field(tr, "epochs").get<int>();
    config.batch_size = require_field(tr, "batch_size").get<int>();
    config.learning_rate = require_field(tr, "learning_rate").get<double>();
    config.beta1 = require_field(tr, "beta1").get<double>();
    config.beta2 = require_field(tr, "beta2").get<double>();
    config.weight_decay = require_field(tr, "weight_decay").get<double>();
    config.epsilon = require_field(tr, "epsilon").get<double>();
    config.seed = require_field(tr, "seed").get<std::uint64_t>();
    config.validate();
    const Normalizer norm = Normalizer::from_moments(
        require_field(nrm, "log_mean").get<double>(),
        require_field(nrm, "log_sd").get<double>());
    Eigen::VectorXd params = to_vector(doc, "parameters");
    Eigen::VectorXd rm = to_vector(bn, "running_mean");
    Eigen::VectorXd rv = to_vector(bn, "running_var");
    LstmNetwork network(config.network, std::move(params), std::move(rm),
                        std::move(rv));
    return {std::move(network), norm, std::move(config)};
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint state is inconsistent: ") + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint field has the wrong type: ") + e.what());
  }
}

void VolatilityForecaster::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << to_json() << '\n';
  if (!out.good()) throw DataError("failed writing checkpoint to '" + path + "'");
}

VolatilityForecaster VolatilityForecaster::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

}  // namespace ginn
