#include "stitchnet/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stitchnet/kernels.hpp"

namespace stitchnet {

Conv1d::Conv1d(std::size_t n_in, std::size_t n_out, std::size_t k)
    : W({n_out, n_in, k}),
      B({n_out}),
      gradW({n_out, n_in, k}),
      gradB({n_out}),
      n_in_(n_in),
      n_out_(n_out),
      k_(k) {
  if (k % 2 == 0) throw ConfigError("conv kernel size must be odd, got " + std::to_string(k));
}

void Conv1d::init_params(Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(n_in_ * k_));
  W = rng_uniform(rng, -bound, bound, W.shape());
  B = rng_uniform(rng, -bound, bound, B.shape());
}

Tensor Conv1d::forward(const Tensor& x, Precision p) {
  if (x.rank() != 3 || x.extent(2) != n_in_)
    throw GeometryError("conv1d input must be [batch, T, n_in]");
  if (x.extent(1) < k_)
    throw GeometryError("conv1d input length " + std::to_string(x.extent(1)) +
                        " shorter than kernel " + std::to_string(k_));
  cached_x_ = x;
  Tensor out({x.extent(0), x.extent(1) - k_ + 1, n_out_});
  if (p == Precision::F32)
    kernels::conv1d_forward_fast32(x, W, B, out);
  else
    kernels::conv1d_forward_fast(x, W, B, out);
  return out;
}

Tensor Conv1d::backward(const Tensor& grad_out) {
  if (cached_x_.size() == 0) throw GeometryError("conv1d backward before forward");
  if (grad_out.rank() != 3 || grad_out.extent(0) != cached_x_.extent(0) ||
      grad_out.extent(1) != cached_x_.extent(1) - k_ + 1 || grad_out.extent(2) != n_out_)
    throw GeometryError("conv1d grad_out shape does not match forward output");
  Tensor grad_in = Tensor::zeros_like(cached_x_);
  kernels::conv1d_backward_fast(cached_x_, W, grad_out, grad_in, gradW, gradB);
  return grad_in;
}

void Conv1d::zero_grads() {
  gradW = Tensor::zeros_like(gradW);
  gradB = Tensor::zeros_like(gradB);
}

MaxPool1d::MaxPool1d(std::size_t m) : m_(m) {
  if (m == 0) throw ConfigError("pool size must be >= 1");
}

Tensor MaxPool1d::forward(const Tensor& y) {
  if (y.rank() != 3) throw GeometryError("maxpool input must be [batch, T, n]");
  std::size_t batch = y.extent(0), t_in = y.extent(1), n = y.extent(2);
  if (t_in < m_) throw GeometryError("maxpool input length shorter than pool size");
  std::size_t t_out = t_in / m_;
  in_shape_ = {batch, t_in, n};
  Tensor out({batch, t_out, n});
  argmax_.assign(batch * t_out * n, 0);
  win_margins_.assign(batch * t_out * n, std::numeric_limits<double>::infinity());
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < t_out; ++t)
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = t * m_;
        double bv = y.at(b, best, i);
        double second = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < m_; ++j) {
          double v = y.at(b, t * m_ + j, i);
          if (v > bv) {
            second = bv;
            bv = v;
            best = t * m_ + j;
          } else {
            second = std::max(second, v);
          }
        }
        out.at(b, t, i) = bv;
        argmax_[(b * t_out + t) * n + i] = (b * t_in + best) * n + i;
        // Exact ties only arise from structurally identical windows (e.g.
        // two pure-padding positions); the tied branches are the same
        // function of the parameters, so the max is smooth there and the
        // window does not count against the kink margin.
        if (m_ > 1 && second != bv) win_margins_[(b * t_out + t) * n + i] = bv - second;
      }
  return out;
}

Tensor MaxPool1d::backward(const Tensor& grad_out) {
  if (in_shape_.empty()) throw GeometryError("maxpool backward before forward");
  std::size_t t_out = in_shape_[1] / m_;
  if (grad_out.rank() != 3 || grad_out.extent(0) != in_shape_[0] ||
      grad_out.extent(1) != t_out || grad_out.extent(2) != in_shape_[2])
    throw GeometryError("maxpool grad_out shape does not match forward output");
  Tensor grad_in(in_shape_, 0.0);
  active_margin_ = std::numeric_limits<double>::infinity();
  for (std::size_t u = 0; u < grad_out.size(); ++u) {
    grad_in[argmax_[u]] += grad_out[u];
    if (grad_out[u] != 0.0) active_margin_ = std::min(active_margin_, win_margins_[u]);
  }
  return grad_in;
}

NonlinKind nonlin_from_string(const std::string& s) {
  if (s == "tanh") return NonlinKind::Tanh;
  if (s == "relu") return NonlinKind::Relu;
  if (s == "prelu") return NonlinKind::Prelu;
  throw ConfigError("unknown nonlinearity '" + s + "' (expected tanh|relu|prelu)");
}

std::string nonlin_to_string(NonlinKind k) {
  switch (k) {
    case NonlinKind::Tanh: return "tanh";
    case NonlinKind::Relu: return "relu";
    case NonlinKind::Prelu: return "prelu";
  }
  return "relu";
}

Nonlinearity::Nonlinearity(NonlinKind kind, double a)
    : alpha({1}, a), grad_alpha({1}, 0.0), kind_(kind) {}

Tensor Nonlinearity::forward(const Tensor& x) {
  cached_x_ = x;
  Tensor out = Tensor::zeros_like(x);
  double a = alpha[0];
  for (std::size_t i = 0; i < x.size(); ++i) {
    double v = x[i];
    switch (kind_) {
      case NonlinKind::Tanh: out[i] = std::tanh(v); break;
      case NonlinKind::Relu: out[i] = v > 0.0 ? v : 0.0; break;
      case NonlinKind::Prelu: out[i] = v >= 0.0 ? v : a * v; break;
    }
  }
  return out;
}

Tensor Nonlinearity::backward(const Tensor& grad_out) {
  if (!grad_out.same_shape(cached_x_))
    throw GeometryError("nonlinearity grad_out shape does not match forward input");
  Tensor grad_in = Tensor::zeros_like(cached_x_);
  double a = alpha[0];
  active_margin_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grad_out.size(); ++i) {
    double v = cached_x_[i], g = grad_out[i];
    if (kind_ != NonlinKind::Tanh && g != 0.0)
      active_margin_ = std::min(active_margin_, std::fabs(v));
    switch (kind_) {
      case NonlinKind::Tanh: {
        double th = std::tanh(v);
        grad_in[i] = g * (1.0 - th * th);
        break;
      }
      case NonlinKind::Relu: grad_in[i] = v > 0.0 ? g : 0.0; break;
      case NonlinKind::Prelu:
        if (v >= 0.0) {
          grad_in[i] = g;
        } else {
          grad_in[i] = g * a;
          grad_alpha[0] += v * g;
        }
        break;
    }
  }
  return grad_in;
}

void Nonlinearity::zero_grads() { grad_alpha[0] = 0.0; }

Dropout::Dropout(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0)
    throw ConfigError("dropout rate must lie in [0,1), got " + std::to_string(rate));
}

Tensor Dropout::forward(const Tensor& x, Mode mode, Rng& rng) {
  if (mode == Mode::Eval || rate_ == 0.0) {
    train_pass_ = false;
    return x;
  }
  train_pass_ = true;
  double keep = 1.0 - rate_;
  mask_ = Tensor::zeros_like(x);
  Tensor out = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (rng.next_double() >= rate_) {
      mask_[i] = 1.0 / keep;
      out[i] = x[i] * mask_[i];
    }
  }
  return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
  if (!train_pass_) return grad_out;
  if (!grad_out.same_shape(mask_))
    throw GeometryError("dropout grad_out shape does not match forward input");
  Tensor grad_in = Tensor::zeros_like(grad_out);
  for (std::size_t i = 0; i < grad_out.size(); ++i) grad_in[i] = grad_out[i] * mask_[i];
  return grad_in;
}

LookupTable::LookupTable(std::size_t vocab, std::size_t dim)
    : table({vocab, dim}), grad_table({vocab, dim}), vocab_(vocab), dim_(dim) {}

void LookupTable::init_params(Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(vocab_));
  table = rng_uniform(rng, -bound, bound, table.shape());
}

Tensor LookupTable::forward(const std::vector<std::size_t>& idx) {
  for (std::size_t v : idx)
    if (v >= vocab_)
      throw DataError("lookup index " + std::to_string(v) + " out of range [0, " +
                      std::to_string(vocab_) + ")");
  cached_idx_ = idx;
  Tensor out({idx.size(), dim_});
  for (std::size_t t = 0; t < idx.size(); ++t)
    for (std::size_t e = 0; e < dim_; ++e) out.at(t, e) = table.at(idx[t], e);
  return out;
}

void LookupTable::backward(const Tensor& grad_out) {
  if (grad_out.rank() != 2 || grad_out.extent(0) != cached_idx_.size() ||
      grad_out.extent(1) != dim_)
    throw GeometryError("lookup grad_out shape does not match forward output");
  for (std::size_t t = 0; t < cached_idx_.size(); ++t)
    for (std::size_t e = 0; e < dim_; ++e) grad_table.at(cached_idx_[t], e) += grad_out.at(t, e);
}

void LookupTable::zero_grads() { grad_table = Tensor::zeros_like(grad_table); }

Linear::Linear(std::size_t n_in, std::size_t n_out)
    : W({n_out, n_in}), B({n_out}), gradW({n_out, n_in}), gradB({n_out}),
      n_in_(n_in), n_out_(n_out) {}

void Linear::init_params(Rng& rng) {
  double bound = 1.0 / std::sqrt(static_cast<double>(n_in_));
  W = rng_uniform(rng, -bound, bound, W.shape());
  B = rng_uniform(rng, -bound, bound, B.shape());
}

Tensor Linear::forward(const Tensor& x) {
  if (x.rank() != 2 || x.extent(1) != n_in_)
    throw GeometryError("linear input must be [T, n_in]");
  cached_x_ = x;
  std::size_t t_len = x.extent(0);
  Tensor out({t_len, n_out_});
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t i = 0; i < n_out_; ++i) {
      double acc = B[i];
      for (std::size_t j = 0; j < n_in_; ++j) acc += W.at(i, j) * x.at(t, j);
      out.at(t, i) = acc;
    }
  return out;
}

Tensor Linear::backward(const Tensor& grad_out) {
  if (cached_x_.size() == 0) throw GeometryError("linear backward before forward");
  std::size_t t_len = cached_x_.extent(0);
  if (grad_out.rank() != 2 || grad_out.extent(0) != t_len || grad_out.extent(1) != n_out_)
    throw GeometryError("linear grad_out shape does not match forward output");
  Tensor grad_in({t_len, n_in_}, 0.0);
  for (std::size_t t = 0; t < t_len; ++t)
    for (std::size_t i = 0; i < n_out_; ++i) {
      double go = grad_out.at(t, i);
      gradB[i] += go;
      for (std::size_t j = 0; j < n_in_; ++j) {
        gradW.at(i, j) += go * cached_x_.at(t, j);
        grad_in.at(t, j) += go * W.at(i, j);
      }
    }
  return grad_in;
}

void Linear::zero_grads() {
  gradW = Tensor::zeros_like(gradW);
  gradB = Tensor::zeros_like(gradB);
}

}  // namespace stitchnet
