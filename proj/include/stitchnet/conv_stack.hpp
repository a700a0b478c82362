#pragma once

#include <cstddef>
#include <vector>

#include "stitchnet/layers.hpp"
#include "stitchnet/stitch.hpp"

namespace stitchnet {

/// One stage of the strided stack: length-preserving conv, nonlinearity,
/// maxpool, dropout.
struct ConvBlock {
  Conv1d conv;
  Nonlinearity nonlin;
  MaxPool1d pool;
  Dropout drop;

  ConvBlock(std::size_t n_in, std::size_t n_out, std::size_t k, NonlinKind nl, std::size_t m,
            double dropout_rate)
      : conv(n_in, n_out, k), nonlin(nl), pool(m), drop(dropout_rate) {}
};

/// Zero-pads [B, T, n] with p positions on each end of the time axis.
Tensor pad_time(const Tensor& x, std::size_t p);

/// Adjoint of pad_time: crops p positions from each end.
Tensor crop_time_grad(const Tensor& grad, std::size_t p);

/// Runs the batched [S, padded_len, n] tensor through every block. Each conv
/// is preceded by floor(k/2) zero padding per end so lengths divide cleanly
/// through the pools. Rng is only consulted by dropout in train mode.
Tensor conv_stack_forward(std::vector<ConvBlock>& blocks, const Tensor& batch, Mode mode,
                          Rng& rng, Precision precision = Precision::F64);

/// Backward through the stack in reverse; accumulates parameter grads.
Tensor conv_stack_backward(std::vector<ConvBlock>& blocks, const Tensor& grad_out);

}  // namespace stitchnet
