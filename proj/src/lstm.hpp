#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace ginn {

// Shape of the recurrent variance forecaster: a stack of LSTM layers read
// over a window of normalized variances, then a fixed head
// [linear -> batch norm -> relu -> linear] emitting one scalar per window.
struct NetworkConfig {
  int num_lstm_layers = 3;
  int hidden_width = 256;
  double dropout_rate = 0.2;  // applied between LSTM layers in train mode
  int input_window = 90;

  void validate() const;  // throws std::invalid_argument
};

namespace nn {

// Batched building blocks, row per sample. The network's forward and backward
// passes call these, and the gradient tests drive them in isolation, so there
// is exactly one implementation of each piece of layer math.
//
// Block arguments accept views into the stacked per-step buffers (arbitrary
// outer stride), so the network can pass row ranges without copying.
using ConstBlock = Eigen::Ref<const Eigen::MatrixXd, 0, Eigen::OuterStride<>>;
using MutBlock = Eigen::Ref<Eigen::MatrixXd, 0, Eigen::OuterStride<>>;

struct BatchNormCache {
  Eigen::RowVectorXd mean;    // per-feature batch mean
  Eigen::RowVectorXd var;     // biased batch variance
  Eigen::RowVectorXd inv_sd;  // 1/sqrt(var + eps)
  Eigen::MatrixXd x_hat;      // normalized activations
};

Eigen::MatrixXd batch_norm_train(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& gamma,
                                 const Eigen::VectorXd& beta, double eps,
                                 BatchNormCache& cache);
Eigen::MatrixXd batch_norm_eval(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& gamma,
                                const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& running_mean,
                                const Eigen::VectorXd& running_var, double eps);
void batch_norm_backward(const Eigen::MatrixXd& dy, const BatchNormCache& cache,
                         const Eigen::VectorXd& gamma, Eigen::MatrixXd& dx,
                         Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta);

// y = x w^T + b, broadcast over rows.
Eigen::MatrixXd linear_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                               const Eigen::VectorXd& b);
void linear_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& w, Eigen::MatrixXd& dx,
                     Eigen::MatrixXd& dw, Eigen::VectorXd& db);

Eigen::MatrixXd relu_forward(const Eigen::MatrixXd& x);
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x);

// One LSTM time step for a whole batch. in_part is the input-to-hidden
// contribution x w^T + b, precomputed by the caller so the input matmul can
// cover all steps at once. Gate preactivation column order: [i f g o], each
// block hidden_width wide. Outputs are the post-activation gates, the new
// cell state, its tanh, and the new hidden state.
void lstm_step_forward(const ConstBlock& in_part, const ConstBlock& h_prev,
                       const ConstBlock& c_prev, const Eigen::MatrixXd& u,
                       MutBlock i_out, MutBlock f_out, MutBlock g_out,
                       MutBlock o_out, MutBlock tanh_c_out,
                       Eigen::MatrixXd& c_out, Eigen::MatrixXd& h_out);

// Reverse of one step. dh must hold dJ/dh_t with any recurrent contribution
// already added. dc carries dJ/dc_t on entry and dJ/dc_{t-1} on exit. da gets
// dJ/d(preactivation) in [i f g o] order; dh_prev gets the recurrent
// gradient da * u.
void lstm_step_backward(const ConstBlock& i, const ConstBlock& f,
                        const ConstBlock& g, const ConstBlock& o,
                        const ConstBlock& tanh_c, const ConstBlock& c_prev,
                        const Eigen::MatrixXd& u, const ConstBlock& dh,
                        Eigen::MatrixXd& dc, MutBlock da,
                        Eigen::MatrixXd& dh_prev);

}  // namespace nn

// Offsets of the parameter blocks inside the flat parameter vector. Per LSTM
// layer: w (4H x in_dim, input weights), u (4H x H, recurrent weights),
// b (4H, bias). Head: w1 (H x H), b1 (H), batch-norm gamma/beta (H each),
// w2 (1 x H), b2 (1). Matrix blocks are stored column major.
struct ParamLayout {
  struct Layer {
    Eigen::Index w = 0, u = 0, b = 0;
    Eigen::Index in_dim = 0;
  };
  std::vector<Layer> layers;
  Eigen::Index head_w1 = 0, head_b1 = 0;
  Eigen::Index bn_gamma = 0, bn_beta = 0;
  Eigen::Index head_w2 = 0, head_b2 = 0;
  Eigen::Index hidden = 0;
  Eigen::Index total = 0;
};
ParamLayout make_param_layout(const NetworkConfig& config);

// Intermediates recorded by a train-mode forward pass. Time-major stacking:
// rows [t*B, (t+1)*B) of each matrix hold step t for the whole batch.
struct LayerCache {
  Eigen::MatrixXd x;       // layer input after dropout, (B*T) x in_dim
  Eigen::MatrixXd h_prev;  // hidden state entering each step
  Eigen::MatrixXd c_prev;  // cell state entering each step
  Eigen::MatrixXd i, f, g, o, tanh_c;
  Eigen::MatrixXd mask;    // inverted-dropout mask on this layer's output;
                           // empty for the top layer
};

struct HeadCache {
  Eigen::MatrixXd h_last;  // final hidden state of the top layer, B x H
  Eigen::MatrixXd z1;      // first linear activations
  nn::BatchNormCache bn;
  Eigen::MatrixXd y_bn;    // batch-norm output, relu input
};

struct TrainCache {
  Eigen::Index batch = 0;
  std::vector<LayerCache> layers;
  HeadCache head;
};

class LstmNetwork {
 public:
  static constexpr double kBnEps = 1e-5;
  static constexpr double kBnMomentum = 0.1;

  // Fresh network: Xavier-uniform weights drawn from rng (column-major block
  // order as laid out above), biases zero except the forget gate block at 1,
  // batch-norm gamma 1 / beta 0, running stats (0, 1).
  LstmNetwork(const NetworkConfig& config, Rng& rng);

  // Restore from checkpointed state. Throws std::invalid_argument when the
  // vector sizes do not match the config.
  LstmNetwork(const NetworkConfig& config, Eigen::VectorXd params,
              Eigen::VectorXd bn_running_mean, Eigen::VectorXd bn_running_var);

  const NetworkConfig& config() const { return config_; }
  const ParamLayout& layout() const { return layout_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& bn_running_mean() const { return bn_running_mean_; }
  const Eigen::VectorXd& bn_running_var() const { return bn_running_var_; }

  // Inference pass, one row per window, one output per row. Deterministic
  // and mutation free: dropout off, batch norm on running stats.
  Eigen::VectorXd forward(const Eigen::MatrixXd& windows) const;
  double forward_one(const Eigen::VectorXd& window) const;

  // Training pass: inverted dropout drawn from rng (mask elements in
  // column-major order over each stacked (B*T) x H layer output), batch
  // statistics in the norm layer, running stats updated with momentum 0.1,
  // intermediates recorded for backward().
  Eigen::VectorXd forward_train(const Eigen::MatrixXd& windows, Rng& rng);

  // Same pass with caller-pinned dropout masks, one stacked (B*T) x H matrix
  // per layer below the top, already scaled. Used by gradient tests that
  // need a fixed draw.
  Eigen::VectorXd forward_train_masked(const Eigen::MatrixXd& windows,
                                       const std::vector<Eigen::MatrixXd>& masks);

  // Exact reverse-mode gradient of sum_b upstream[b] * output[b] with respect
  // to the flat parameter vector. Needs the intermediates of the latest
  // train-mode forward; throws std::logic_error when none are recorded. The
  // recorded state stays valid until the next train-mode forward.
  Eigen::VectorXd backward(const Eigen::VectorXd& upstream) const;

 private:
  Eigen::VectorXd run_eval_chunk(const Eigen::MatrixXd& windows) const;
  Eigen::VectorXd run_train(const Eigen::MatrixXd& windows,
                            std::vector<Eigen::MatrixXd> masks);
  void check_windows(const Eigen::MatrixXd& windows) const;

  // Views of one layer's parameter blocks.
  Eigen::Map<const Eigen::MatrixXd> w(int l) const;
  Eigen::Map<const Eigen::MatrixXd> u(int l) const;
  Eigen::Map<const Eigen::VectorXd> b(int l) const;

  NetworkConfig config_;
  ParamLayout layout_;
  Eigen::VectorXd params_;
  Eigen::VectorXd bn_running_mean_;
  Eigen::VectorXd bn_running_var_;
  std::optional<TrainCache> cache_;
};

}  // namespace ginn
