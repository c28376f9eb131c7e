#include "lstm.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "errors.hpp"

namespace ginn {

void NetworkConfig::validate() const {
  if (num_lstm_layers < 1) {
    throw std::invalid_argument("network needs at least one LSTM layer");
  }
  if (hidden_width < 1) {
    throw std::invalid_argument("network hidden width must be at least 1");
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1)");
  }
  if (input_window < 1) {
    throw std::invalid_argument("input window must be at least 1");
  }
}

namespace nn {

namespace {

// sigmoid(x) = (1 + tanh(x/2)) / 2: stable for large |x| in both directions.
template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& a) {
  return 0.5 + 0.5 * (0.5 * a).tanh();
}

}  // namespace

Eigen::MatrixXd batch_norm_train(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& gamma,
                                 const Eigen::VectorXd& beta, double eps,
                                 BatchNormCache& cache) {
  cache.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - cache.mean;
  cache.var = centered.cwiseProduct(centered).colwise().mean();
  cache.inv_sd = (cache.var.array() + eps).sqrt().inverse().matrix();
  cache.x_hat = (centered.array().rowwise() * cache.inv_sd.array()).matrix();
  Eigen::MatrixXd y =
      (cache.x_hat.array().rowwise() * gamma.transpose().array()).matrix();
  y.rowwise() += beta.transpose();
  return y;
}

Eigen::MatrixXd batch_norm_eval(const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& gamma,
                                const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& running_mean,
                                const Eigen::VectorXd& running_var, double eps) {
  const Eigen::RowVectorXd scale =
      (gamma.transpose().array() / (running_var.transpose().array() + eps).sqrt())
          .matrix();
  const Eigen::RowVectorXd shift =
      beta.transpose() - scale.cwiseProduct(running_mean.transpose());
  Eigen::MatrixXd y = (x.array().rowwise() * scale.array()).matrix();
  y.rowwise() += shift;
  return y;
}

void batch_norm_backward(const Eigen::MatrixXd& dy, const BatchNormCache& cache,
                         const Eigen::VectorXd& gamma, Eigen::MatrixXd& dx,
                         Eigen::VectorXd& dgamma, Eigen::VectorXd& dbeta) {
  const double n = static_cast<double>(dy.rows());
  dgamma = dy.cwiseProduct(cache.x_hat).colwise().sum().transpose();
  dbeta = dy.colwise().sum().transpose();
  const Eigen::MatrixXd dx_hat =
      (dy.array().rowwise() * gamma.transpose().array()).matrix();
  const Eigen::RowVectorXd sum_dx_hat = dx_hat.colwise().sum();
  const Eigen::RowVectorXd sum_dx_hat_x =
      dx_hat.cwiseProduct(cache.x_hat).colwise().sum();
  dx = (n * dx_hat).rowwise() - sum_dx_hat;
  dx -= (cache.x_hat.array().rowwise() * sum_dx_hat_x.array()).matrix();
  dx.array().rowwise() *= (cache.inv_sd.array() / n);
}

Eigen::MatrixXd linear_forward(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w,
                               const Eigen::VectorXd& b) {
  Eigen::MatrixXd y = x * w.transpose();
  y.rowwise() += b.transpose();
  return y;
}

void linear_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x,
                     const Eigen::MatrixXd& w, Eigen::MatrixXd& dx,
                     Eigen::MatrixXd& dw, Eigen::VectorXd& db) {
  dx.noalias() = dy * w;
  dw.noalias() = dy.transpose() * x;
  db = dy.colwise().sum().transpose();
}

Eigen::MatrixXd relu_forward(const Eigen::MatrixXd& x) {
  return x.cwiseMax(0.0);
}

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x) {
  return (x.array() > 0.0).select(dy, 0.0);
}

void lstm_step_forward(const ConstBlock& in_part, const ConstBlock& h_prev,
                       const ConstBlock& c_prev, const Eigen::MatrixXd& u,
                       MutBlock i_out, MutBlock f_out, MutBlock g_out,
                       MutBlock o_out, MutBlock tanh_c_out,
                       Eigen::MatrixXd& c_out, Eigen::MatrixXd& h_out) {
  const Eigen::Index h = h_prev.cols();
  Eigen::MatrixXd a = in_part;
  a.noalias() += h_prev * u.transpose();
  i_out = sigmoid(a.leftCols(h).array()).matrix();
  f_out = sigmoid(a.middleCols(h, h).array()).matrix();
  g_out = a.middleCols(2 * h, h).array().tanh().matrix();
  o_out = sigmoid(a.rightCols(h).array()).matrix();
  c_out = f_out.cwiseProduct(c_prev) + i_out.cwiseProduct(g_out);
  tanh_c_out = c_out.array().tanh().matrix();
  h_out = o_out.cwiseProduct(tanh_c_out);
}

void lstm_step_backward(const ConstBlock& i, const ConstBlock& f,
                        const ConstBlock& g, const ConstBlock& o,
                        const ConstBlock& tanh_c, const ConstBlock& c_prev,
                        const Eigen::MatrixXd& u, const ConstBlock& dh,
                        Eigen::MatrixXd& dc, MutBlock da,
                        Eigen::MatrixXd& dh_prev) {
  const Eigen::Index h = i.cols();
  // h_t = o * tanh(c_t); c_t = f * c_{t-1} + i * g
  dc.array() += dh.array() * o.array() * (1.0 - tanh_c.array().square());
  const Eigen::ArrayXXd d_o = dh.array() * tanh_c.array();
  const Eigen::ArrayXXd d_i = dc.array() * g.array();
  const Eigen::ArrayXXd d_g = dc.array() * i.array();
  const Eigen::ArrayXXd d_f = dc.array() * c_prev.array();
  da.leftCols(h) = (d_i * i.array() * (1.0 - i.array())).matrix();
  da.middleCols(h, h) = (d_f * f.array() * (1.0 - f.array())).matrix();
  da.middleCols(2 * h, h) = (d_g * (1.0 - g.array().square())).matrix();
  da.rightCols(h) = (d_o * o.array() * (1.0 - o.array())).matrix();
  dh_prev.noalias() = da * u;
  dc.array() *= f.array();
}

}  // namespace nn

ParamLayout make_param_layout(const NetworkConfig& config) {
  config.validate();
  const Eigen::Index h = config.hidden_width;
  ParamLayout layout;
  layout.hidden = h;
  Eigen::Index at = 0;
  for (int l = 0; l < config.num_lstm_layers; ++l) {
    ParamLayout::Layer block;
    block.in_dim = (l == 0) ? 1 : h;
    block.w = at;
    at += 4 * h * block.in_dim;
    block.u = at;
    at += 4 * h * h;
    block.b = at;
    at += 4 * h;
    layout.layers.push_back(block);
  }
  layout.head_w1 = at;
  at += h * h;
  layout.head_b1 = at;
  at += h;
  layout.bn_gamma = at;
  at += h;
  layout.bn_beta = at;
  at += h;
  layout.head_w2 = at;
  at += h;
  layout.head_b2 = at;
  at += 1;
  layout.total = at;
  return layout;
}

namespace {

// Stacks windows (B x T) time major: rows [t*B, (t+1)*B) hold column t.
Eigen::MatrixXd stack_windows(const Eigen::MatrixXd& windows) {
  const Eigen::Index batch = windows.rows();
  const Eigen::Index steps = windows.cols();
  Eigen::MatrixXd stacked(batch * steps, 1);
  for (Eigen::Index t = 0; t < steps; ++t) {
    stacked.col(0).segment(t * batch, batch) = windows.col(t);
  }
  return stacked;
}

}  // namespace

LstmNetwork::LstmNetwork(const NetworkConfig& config, Rng& rng)
    : config_(config),
      layout_(make_param_layout(config)),
      params_(layout_.total),
      bn_running_mean_(Eigen::VectorXd::Zero(config.hidden_width)),
      bn_running_var_(Eigen::VectorXd::Ones(config.hidden_width)) {
  const Eigen::Index h = layout_.hidden;
  auto draw = [&](Eigen::Index offset, Eigen::Index count, double limit) {
    for (Eigen::Index k = 0; k < count; ++k) {
      params_[offset + k] = limit * (2.0 * rng.uniform() - 1.0);
    }
  };
  for (int l = 0; l < config_.num_lstm_layers; ++l) {
    const auto& block = layout_.layers[l];
    const double d = static_cast<double>(block.in_dim);
    draw(block.w, 4 * h * block.in_dim, std::sqrt(6.0 / (d + h)));
    draw(block.u, 4 * h * h, std::sqrt(6.0 / (2.0 * h)));
    params_.segment(block.b, 4 * h).setZero();
    params_.segment(block.b + h, h).setOnes();  // forget gate bias
  }
  draw(layout_.head_w1, h * h, std::sqrt(6.0 / (2.0 * h)));
  params_.segment(layout_.head_b1, h).setZero();
  params_.segment(layout_.bn_gamma, h).setOnes();
  params_.segment(layout_.bn_beta, h).setZero();
  draw(layout_.head_w2, h, std::sqrt(6.0 / (h + 1.0)));
  params_[layout_.head_b2] = 0.0;
}

LstmNetwork::LstmNetwork(const NetworkConfig& config, Eigen::VectorXd params,
                         Eigen::VectorXd bn_running_mean,
                         Eigen::VectorXd bn_running_var)
    : config_(config),
      layout_(make_param_layout(config)),
      params_(std::move(params)),
      bn_running_mean_(std::move(bn_running_mean)),
      bn_running_var_(std::move(bn_running_var)) {
  if (params_.size() != layout_.total) {
    throw std::invalid_argument(
        "parameter vector has " + std::to_string(params_.size()) +
        " entries, network shape needs " + std::to_string(layout_.total));
  }
  if (bn_running_mean_.size() != layout_.hidden ||
      bn_running_var_.size() != layout_.hidden) {
    throw std::invalid_argument("batch-norm running stats must match hidden width");
  }
}

Eigen::Map<const Eigen::MatrixXd> LstmNetwork::w(int l) const {
  const auto& block = layout_.layers[l];
  return {params_.data() + block.w, 4 * layout_.hidden, block.in_dim};
}

Eigen::Map<const Eigen::MatrixXd> LstmNetwork::u(int l) const {
  const auto& block = layout_.layers[l];
  return {params_.data() + block.u, 4 * layout_.hidden, layout_.hidden};
}

Eigen::Map<const Eigen::VectorXd> LstmNetwork::b(int l) const {
  const auto& block = layout_.layers[l];
  return {params_.data() + block.b, 4 * layout_.hidden};
}

void LstmNetwork::check_windows(const Eigen::MatrixXd& windows) const {
  if (windows.rows() < 1) {
    throw std::invalid_argument("forward needs at least one window");
  }
  if (windows.cols() != config_.input_window) {
    throw std::invalid_argument(
        "window length " + std::to_string(windows.cols()) +
        " does not match the network input window " +
        std::to_string(config_.input_window));
  }
  if (!windows.allFinite()) {
    throw std::invalid_argument("window values must be finite");
  }
}

Eigen::VectorXd LstmNetwork::forward(const Eigen::MatrixXd& windows) const {
  check_windows(windows);
  // Chunked so huge batches do not blow up the stacked intermediate buffers.
  constexpr Eigen::Index kChunk = 512;
  const Eigen::Index total = windows.rows();
  Eigen::VectorXd out(total);
  for (Eigen::Index lo = 0; lo < total; lo += kChunk) {
    const Eigen::Index n = std::min(kChunk, total - lo);
    out.segment(lo, n) = run_eval_chunk(windows.middleRows(lo, n));
  }
  return out;
}

double LstmNetwork::forward_one(const Eigen::VectorXd& window) const {
  return forward(window.transpose())(0);
}

Eigen::VectorXd LstmNetwork::run_eval_chunk(const Eigen::MatrixXd& windows) const {
  const Eigen::Index batch = windows.rows();
  const Eigen::Index steps = windows.cols();
  const Eigen::Index h = layout_.hidden;
  Eigen::MatrixXd x_stack = stack_windows(windows);
  Eigen::MatrixXd hs, cs, h_next, c_next;
  Eigen::MatrixXd gate_i(batch, h), gate_f(batch, h), gate_g(batch, h),
      gate_o(batch, h), tanh_c(batch, h);
  for (int l = 0; l < config_.num_lstm_layers; ++l) {
    Eigen::MatrixXd in_stack = x_stack * w(l).transpose();
    in_stack.rowwise() += b(l).transpose();
    const bool top = (l == config_.num_lstm_layers - 1);
    Eigen::MatrixXd out_stack;
    if (!top) out_stack.resize(batch * steps, h);
    hs = Eigen::MatrixXd::Zero(batch, h);
    cs = Eigen::MatrixXd::Zero(batch, h);
    const Eigen::MatrixXd u_l = u(l);
    for (Eigen::Index t = 0; t < steps; ++t) {
      nn::lstm_step_forward(in_stack.middleRows(t * batch, batch), hs, cs, u_l,
                            gate_i, gate_f, gate_g, gate_o, tanh_c, c_next,
                            h_next);
      hs.swap(h_next);
      cs.swap(c_next);
      if (!top) out_stack.middleRows(t * batch, batch) = hs;
    }
    if (!top) x_stack = std::move(out_stack);
  }
  const Eigen::Map<const Eigen::MatrixXd> w1(params_.data() + layout_.head_w1, h, h);
  const Eigen::Map<const Eigen::VectorXd> b1(params_.data() + layout_.head_b1, h);
  const Eigen::Map<const Eigen::VectorXd> gamma(params_.data() + layout_.bn_gamma, h);
  const Eigen::Map<const Eigen::VectorXd> beta(params_.data() + layout_.bn_beta, h);
  const Eigen::Map<const Eigen::MatrixXd> w2(params_.data() + layout_.head_w2, 1, h);
  const Eigen::MatrixXd z1 = nn::linear_forward(hs, w1, b1);
  const Eigen::MatrixXd y = nn::batch_norm_eval(z1, gamma, beta, bn_running_mean_,
                                                bn_running_var_, kBnEps);
  const Eigen::MatrixXd r = nn::relu_forward(y);
  Eigen::VectorXd out = r * w2.transpose();
  out.array() += params_[layout_.head_b2];
  return out;
}

Eigen::VectorXd LstmNetwork::forward_train(const Eigen::MatrixXd& windows,
                                           Rng& rng) {
  check_windows(windows);
  const Eigen::Index batch = windows.rows();
  const Eigen::Index steps = windows.cols();
  const Eigen::Index h = layout_.hidden;
  const double p = config_.dropout_rate;
  std::vector<Eigen::MatrixXd> masks;
  masks.reserve(config_.num_lstm_layers - 1);
  for (int l = 0; l + 1 < config_.num_lstm_layers; ++l) {
    Eigen::MatrixXd mask(batch * steps, h);
    if (p == 0.0) {
      mask.setOnes();
    } else {
      const double scale = 1.0 / (1.0 - p);
      for (Eigen::Index j = 0; j < h; ++j) {
        for (Eigen::Index r = 0; r < batch * steps; ++r) {
          mask(r, j) = rng.uniform() < p ? 0.0 : scale;
        }
      }
    }
    masks.push_back(std::move(mask));
  }
  return run_train(windows, std::move(masks));
}

Eigen::VectorXd LstmNetwork::forward_train_masked(
    const Eigen::MatrixXd& windows, const std::vector<Eigen::MatrixXd>& masks) {
  check_windows(windows);
  const Eigen::Index expected = config_.num_lstm_layers - 1;
  if (static_cast<Eigen::Index>(masks.size()) != expected) {
    throw std::invalid_argument("need one dropout mask per layer boundary");
  }
  for (const auto& mask : masks) {
    if (mask.rows() != windows.rows() * windows.cols() ||
        mask.cols() != layout_.hidden) {
      throw std::invalid_argument("dropout mask has the wrong shape");
    }
  }
  return run_train(windows, masks);
}

Eigen::VectorXd LstmNetwork::run_train(const Eigen::MatrixXd& windows,
                                       std::vector<Eigen::MatrixXd> masks) {
  const Eigen::Index batch = windows.rows();
  const Eigen::Index steps = windows.cols();
  const Eigen::Index h = layout_.hidden;
  cache_.emplace();
  cache_->batch = batch;
  cache_->layers.resize(config_.num_lstm_layers);
  Eigen::MatrixXd x_stack = stack_windows(windows);
  Eigen::MatrixXd c_buf, h_buf;
  for (int l = 0; l < config_.num_lstm_layers; ++l) {
    LayerCache& lc = cache_->layers[l];
    lc.x = std::move(x_stack);
    Eigen::MatrixXd in_stack = lc.x * w(l).transpose();
    in_stack.rowwise() += b(l).transpose();
    lc.h_prev = Eigen::MatrixXd::Zero(batch * steps, h);
    lc.c_prev = Eigen::MatrixXd::Zero(batch * steps, h);
    lc.i.resize(batch * steps, h);
    lc.f.resize(batch * steps, h);
    lc.g.resize(batch * steps, h);
    lc.o.resize(batch * steps, h);
    lc.tanh_c.resize(batch * steps, h);
    const Eigen::MatrixXd u_l = u(l);
    for (Eigen::Index t = 0; t < steps; ++t) {
      const Eigen::Index at = t * batch;
      nn::lstm_step_forward(in_stack.middleRows(at, batch),
                            lc.h_prev.middleRows(at, batch),
                            lc.c_prev.middleRows(at, batch), u_l,
                            lc.i.middleRows(at, batch),
                            lc.f.middleRows(at, batch),
                            lc.g.middleRows(at, batch),
                            lc.o.middleRows(at, batch),
                            lc.tanh_c.middleRows(at, batch), c_buf, h_buf);
      if (t + 1 < steps) {
        lc.h_prev.middleRows(at + batch, batch) = h_buf;
        lc.c_prev.middleRows(at + batch, batch) = c_buf;
      }
    }
    const bool top = (l + 1 == config_.num_lstm_layers);
    if (!top) {
      // Layer output stack: h_prev shifted one step, final state appended.
      Eigen::MatrixXd out_stack(batch * steps, h);
      if (steps > 1) {
        out_stack.topRows(batch * (steps - 1)) =
            lc.h_prev.bottomRows(batch * (steps - 1));
      }
      out_stack.bottomRows(batch) = h_buf;
      lc.mask = std::move(masks[l]);
      x_stack = out_stack.cwiseProduct(lc.mask);
    }
  }
  HeadCache& hc = cache_->head;
  hc.h_last = h_buf;
  const Eigen::Map<const Eigen::MatrixXd> w1(params_.data() + layout_.head_w1, h, h);
  const Eigen::Map<const Eigen::VectorXd> b1(params_.data() + layout_.head_b1, h);
  const Eigen::Map<const Eigen::VectorXd> gamma(params_.data() + layout_.bn_gamma, h);
  const Eigen::Map<const Eigen::VectorXd> beta(params_.data() + layout_.bn_beta, h);
  const Eigen::Map<const Eigen::MatrixXd> w2(params_.data() + layout_.head_w2, 1, h);
  hc.z1 = nn::linear_forward(hc.h_last, w1, b1);
  hc.y_bn = nn::batch_norm_train(hc.z1, gamma, beta, kBnEps, hc.bn);
  bn_running_mean_ = (1.0 - kBnMomentum) * bn_running_mean_ +
                     kBnMomentum * hc.bn.mean.transpose();
  bn_running_var_ = (1.0 - kBnMomentum) * bn_running_var_ +
                    kBnMomentum * hc.bn.var.transpose();
  Eigen::VectorXd out = nn::relu_forward(hc.y_bn) * w2.transpose();
  out.array() += params_[layout_.head_b2];
  return out;
}

Eigen::VectorXd LstmNetwork::backward(const Eigen::VectorXd& upstream) const {
  if (!cache_) {
    throw std::logic_error("backward requires a preceding train-mode forward");
  }
  const Eigen::Index batch = cache_->batch;
  if (upstream.size() != batch) {
    throw std::invalid_argument("upstream gradient length must match the batch");
  }
  const Eigen::Index h = layout_.hidden;
  const HeadCache& hc = cache_->head;
  const Eigen::Index steps = config_.input_window;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.total);
  const Eigen::Map<const Eigen::MatrixXd> w1(params_.data() + layout_.head_w1, h, h);
  const Eigen::Map<const Eigen::VectorXd> gamma(params_.data() + layout_.bn_gamma, h);
  const Eigen::Map<const Eigen::MatrixXd> w2(params_.data() + layout_.head_w2, 1, h);

  // Head, in reverse: linear -> relu -> batch norm -> linear.
  const Eigen::MatrixXd relu_out = nn::relu_forward(hc.y_bn);
  Eigen::Map<Eigen::MatrixXd>(grad.data() + layout_.head_w2, 1, h).noalias() =
      upstream.transpose() * relu_out;
  grad[layout_.head_b2] = upstream.sum();
  const Eigen::MatrixXd d_relu = upstream * w2;
  const Eigen::MatrixXd d_y = nn::relu_backward(d_relu, hc.y_bn);
  Eigen::MatrixXd d_z1;
  Eigen::VectorXd d_gamma, d_beta;
  nn::batch_norm_backward(d_y, hc.bn, gamma, d_z1, d_gamma, d_beta);
  grad.segment(layout_.bn_gamma, h) = d_gamma;
  grad.segment(layout_.bn_beta, h) = d_beta;
  Eigen::MatrixXd d_h_last(batch, h);
  {
    Eigen::MatrixXd d_w1(h, h);
    Eigen::VectorXd d_b1(h);
    nn::linear_backward(d_z1, hc.h_last, w1, d_h_last, d_w1, d_b1);
    Eigen::Map<Eigen::MatrixXd>(grad.data() + layout_.head_w1, h, h) = d_w1;
    grad.segment(layout_.head_b1, h) = d_b1;
  }

  // LSTM stack, top layer first, time reversed inside each layer.
  Eigen::MatrixXd d_out_stack;  // dJ/d(layer output), (B*T) x H
  for (int l = config_.num_lstm_layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache_->layers[l];
    const bool top = (l + 1 == config_.num_lstm_layers);
    Eigen::MatrixXd da_stack(batch * steps, 4 * h);
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(batch, h);
    Eigen::MatrixXd dh_rec = Eigen::MatrixXd::Zero(batch, h);
    Eigen::MatrixXd dh(batch, h), dh_prev(batch, h);
    const Eigen::MatrixXd u_l = u(l);
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      const Eigen::Index at = t * batch;
      dh = dh_rec;
      if (top) {
        if (t == steps - 1) dh += d_h_last;
      } else {
        dh += d_out_stack.middleRows(at, batch);
      }
      nn::lstm_step_backward(lc.i.middleRows(at, batch),
                             lc.f.middleRows(at, batch),
                             lc.g.middleRows(at, batch),
                             lc.o.middleRows(at, batch),
                             lc.tanh_c.middleRows(at, batch),
                             lc.c_prev.middleRows(at, batch), u_l, dh, dc,
                             da_stack.middleRows(at, batch), dh_prev);
      dh_rec.swap(dh_prev);
    }
    const auto& block = layout_.layers[l];
    Eigen::Map<Eigen::MatrixXd>(grad.data() + block.w, 4 * h, block.in_dim)
        .noalias() = da_stack.transpose() * lc.x;
    Eigen::Map<Eigen::MatrixXd>(grad.data() + block.u, 4 * h, h).noalias() =
        da_stack.transpose() * lc.h_prev;
    grad.segment(block.b, 4 * h) = da_stack.colwise().sum().transpose();
    if (l > 0) {
      d_out_stack.noalias() = da_stack * w(l);
      d_out_stack = d_out_stack.cwiseProduct(cache_->layers[l - 1].mask);
    }
  }
  return grad;
}

}  // namespace ginn
