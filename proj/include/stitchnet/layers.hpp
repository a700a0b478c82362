#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "stitchnet/tensor.hpp"

namespace stitchnet {

enum class Mode { Train, Eval };

// Numeric precision of the forward contraction. Gradient paths always run in
// f64; f32 exists for inference throughput only.
enum class Precision { F64, F32 };

/// 1D convolution over [batch, T, n_in], valid geometry (output T-k+1), no
/// nonlinearity. Odd kernel sizes only. Backward accumulates (+=) into the
/// grad slots; callers zero them explicitly.
class Conv1d {
 public:
  Conv1d(std::size_t n_in, std::size_t n_out, std::size_t k);

  void init_params(Rng& rng);  // uniform on +-1/sqrt(n_in*k)
  Tensor forward(const Tensor& x, Precision p = Precision::F64);
  Tensor backward(const Tensor& grad_out);
  void zero_grads();

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }
  std::size_t kernel_size() const { return k_; }

  Tensor W, B, gradW, gradB;

 private:
  std::size_t n_in_, n_out_, k_;
  Tensor cached_x_;
};

/// Non-overlapping max pooling along the time axis; [batch, T, n] ->
/// [batch, floor(T/m), n]. Ties break to the lowest index. Argmax positions
/// are cached for the backward routing.
class MaxPool1d {
 public:
  explicit MaxPool1d(std::size_t m);

  Tensor forward(const Tensor& y);
  Tensor backward(const Tensor& grad_out);

  std::size_t pool_size() const { return m_; }
  const std::vector<std::size_t>& argmax() const { return argmax_; }

  /// Smallest max-vs-runner-up gap among windows whose output gradient was
  /// nonzero in the last backward pass (infinity if none, or m = 1). Gradient
  /// checking resamples instances that sit near such ties.
  double last_active_margin() const { return active_margin_; }

 private:
  std::size_t m_;
  std::vector<std::size_t> argmax_;  // flat input index per output element
  std::vector<double> win_margins_;  // best minus second-best per output element
  std::vector<std::size_t> in_shape_;
  double active_margin_ = std::numeric_limits<double>::infinity();
};

enum class NonlinKind { Tanh, Relu, Prelu };

NonlinKind nonlin_from_string(const std::string& s);
std::string nonlin_to_string(NonlinKind k);

/// Elementwise nonlinearity. For prelu the slope alpha is trainable and its
/// gradient accumulates like any other parameter.
class Nonlinearity {
 public:
  explicit Nonlinearity(NonlinKind kind, double alpha = 0.25);

  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);
  void zero_grads();

  NonlinKind kind() const { return kind_; }
  const Tensor& last_input() const { return cached_x_; }

  /// Smallest |pre-activation| among elements whose output gradient was
  /// nonzero in the last backward pass (infinity for tanh or if none).
  double last_active_margin() const { return active_margin_; }

  Tensor alpha;       // [1], prelu slope
  Tensor grad_alpha;  // [1]

 private:
  NonlinKind kind_;
  Tensor cached_x_;
  double active_margin_ = std::numeric_limits<double>::infinity();
};

/// Inverted dropout: train mode zeroes each element with probability rate and
/// scales survivors by 1/(1-rate); eval mode is the identity.
class Dropout {
 public:
  explicit Dropout(double rate);

  Tensor forward(const Tensor& x, Mode mode, Rng& rng);
  Tensor backward(const Tensor& grad_out);

  double rate() const { return rate_; }

 private:
  double rate_;
  Tensor mask_;
  bool train_pass_ = false;
};

/// Embedding table [vocab, dim]; forward gathers rows, backward scatter-adds
/// into grad_table.
class LookupTable {
 public:
  LookupTable(std::size_t vocab, std::size_t dim);

  void init_params(Rng& rng);
  Tensor forward(const std::vector<std::size_t>& idx);  // -> [T, dim]
  void backward(const Tensor& grad_out);
  void zero_grads();

  std::size_t vocab() const { return vocab_; }
  std::size_t dim() const { return dim_; }

  Tensor table, grad_table;

 private:
  std::size_t vocab_, dim_;
  std::vector<std::size_t> cached_idx_;
};

/// Per-position linear map [T, n_in] -> [T, n_out].
class Linear {
 public:
  Linear(std::size_t n_in, std::size_t n_out);

  void init_params(Rng& rng);
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& grad_out);
  void zero_grads();

  std::size_t n_in() const { return n_in_; }
  std::size_t n_out() const { return n_out_; }

  Tensor W, B, gradW, gradB;

 private:
  std::size_t n_in_, n_out_;
  Tensor cached_x_;
};

}  // namespace stitchnet
