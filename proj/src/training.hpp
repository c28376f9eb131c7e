#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "date.hpp"
#include "lstm.hpp"
#include "series.hpp"

namespace ginn {

// Hybrid objective: lambda * MSE(true, pred) + (1 - lambda) * MSE(garch, pred),
// a convex combination of the supervised loss and the model-matching loss.
// lambda = 1 is plain supervised MSE, lambda = 0 trains against the GARCH
// forecasts alone.
double ginn_loss(const Eigen::VectorXd& sigma2_true,
                 const Eigen::VectorXd& sigma2_garch,
                 const Eigen::VectorXd& sigma2_pred, double lambda);

// d(ginn_loss)/d(pred), same conventions.
Eigen::VectorXd ginn_loss_gradient(const Eigen::VectorXd& sigma2_true,
                                   const Eigen::VectorXd& sigma2_garch,
                                   const Eigen::VectorXd& sigma2_pred,
                                   double lambda);

struct OptimizerState {
  Eigen::VectorXd m;  // first moment accumulator
  Eigen::VectorXd v;  // second moment accumulator
  std::int64_t step = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-2;
  double epsilon = 1e-8;
  explicit OptimizerState(Eigen::Index n)
      : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

// One decoupled-weight-decay Adam update:
//   param -= lr * ( m_hat / (sqrt(v_hat) + eps) + weight_decay * param )
// with bias-corrected moments.
void adamw_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
                OptimizerState& state);

// Target and input scaling: z-score of log(variance + 1e-12), fitted on the
// training split only. Raw daily variances sit around 1e-4 and would starve
// the gradients, so the network trains in this log space and predictions are
// mapped back (clamped at >= 0) on output.
class Normalizer {
 public:
  static constexpr double kShift = 1e-12;

  // Population mean and sd of the log-shifted values. Throws DataError on
  // fewer than two values or zero spread.
  static Normalizer fit(std::span<const double> train_variances);
  static Normalizer from_moments(double log_mean, double log_sd);

  double transform(double variance) const;
  double inverse(double z) const;

  double log_mean() const { return log_mean_; }
  double log_sd() const { return log_sd_; }

 private:
  Normalizer(double log_mean, double log_sd)
      : log_mean_(log_mean), log_sd_(log_sd) {}
  double log_mean_ = 0.0;
  double log_sd_ = 1.0;
};

// Supervised rows for the hybrid objective, already normalized. Each row
// pairs a window of past true variances with the true and GARCH-forecast
// variance of the day after the window.
struct Dataset {
  Eigen::MatrixXd inputs;        // rows x window_len
  Eigen::VectorXd target_true;
  Eigen::VectorXd target_garch;  // copies target_true when no GARCH series given
  std::vector<Date> dates;       // target dates
  bool has_garch = false;
};

// Joins truth windows with GARCH forecasts by target date; rows whose target
// date has no GARCH forecast are dropped. end_exclusive, when set, keeps only
// targets strictly before it (train split). Throws DataError when nothing
// usable remains.
Dataset make_training_set(const VarianceSeries& truth,
                          const VarianceSeries* garch_forecasts,
                          const Normalizer& norm, std::size_t window_len,
                          std::optional<Date> end_exclusive);

struct TrainConfig {
  NetworkConfig network;
  double lambda = 0.01;
  int epochs = 300;
  int batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 1e-2;
  double epsilon = 1e-8;
  std::uint64_t seed = 1;

  void validate() const;  // throws std::invalid_argument
};

struct TrainResult {
  LstmNetwork network;
  std::vector<double> loss_curve;  // per-epoch mean training loss
};

// Mini-batch BPTT with AdamW. The seed fixes initialization, shuffling and
// dropout, so the same inputs give bit-identical results. Throws NumericError
// when a batch loss goes non-finite, reporting the last finite epoch.
TrainResult train(const Dataset& data, const TrainConfig& config);

// A trained network plus everything needed to map raw variances in and out.
class VolatilityForecaster {
 public:
  VolatilityForecaster(LstmNetwork network, Normalizer normalizer,
                       TrainConfig config);

  const LstmNetwork& network() const { return network_; }
  const Normalizer& normalizer() const { return normalizer_; }
  const TrainConfig& config() const { return config_; }

  // One prediction per target day; inputs are the prior window_len true
  // variances, outputs are inverse-transformed to variance units (>= 0).
  // window_len must equal the network's input window.
  VarianceSeries rolling_predict(const VarianceSeries& history,
                                 std::size_t window_len = 90) const;

  // Checkpoint: JSON document holding config, flat parameters, batch-norm
  // running stats, normalization constants, seed and epoch count. Reload of
  // the emitted text restores bit-identical state.
  std::string to_json() const;
  static VolatilityForecaster from_json(const std::string& text);
  void save(const std::string& path) const;
  static VolatilityForecaster load(const std::string& path);

 private:
  LstmNetwork network_;
  Normalizer normalizer_;
  TrainConfig config_;
};

}  // namespace ginn
