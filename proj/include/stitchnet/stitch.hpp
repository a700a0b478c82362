#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "stitchnet/tensor.hpp"

namespace stitchnet {

/// Geometry for dense shift-and-stitch inference over a conv/pool stack with
/// total stride S = prod(pool_sizes). The input is duplicated S times; copy j
/// is front-padded with j zeros and everything is tail-padded with zeros out
/// to padded_len, the smallest multiple of S that is >= T + S - 1.
struct StitchPlan {
  std::size_t seq_len = 0;  // T
  std::vector<std::size_t> pool_sizes;
  std::vector<std::size_t> kernel_sizes;
  std::size_t total_stride = 1;  // S
  std::size_t padded_len = 0;

  // Extra uniform front zeros (a multiple of S) on every copy. The per-layer
  // conv pads corrupt a bounded neighbourhood of each copy's array edges
  // relative to the true dense evaluation; with the margin that neighbourhood
  // maps to dense positions outside [0, T), so every retained position is
  // exact. plan_make leaves it at 0; the model path uses plan_make_margined.
  std::size_t front_margin = 0;

  // Length-preserving per-layer conv padding, floor(k/2) zeros on each end.
  std::size_t conv_pad(std::size_t layer) const { return kernel_sizes[layer] / 2; }
};

StitchPlan plan_make(std::size_t seq_len, const std::vector<std::size_t>& pool_sizes,
                     const std::vector<std::size_t>& kernel_sizes);

/// Plan with front/tail guard margins sized to the stack's receptive reach.
StitchPlan plan_make_margined(std::size_t seq_len, const std::vector<std::size_t>& pool_sizes,
                              const std::vector<std::size_t>& kernel_sizes);

/// [T, n] features -> [S, padded_len, n] batch of shifted zero-padded copies.
Tensor shift_expand(const Tensor& features, const StitchPlan& plan);

/// Adjoint of shift_expand: [S, padded_len, n] grads -> [T, n].
Tensor shift_expand_backward(const Tensor& grad_batch, const StitchPlan& plan);

/// Interleaves the strided stack output [S, padded_len/S, n] back into a
/// dense [T, n] sequence. Dense position t (0-based) reads copy
/// (S - ((t+1) mod S)) mod S at strided index floor(t/S); positions beyond T
/// are discarded. The mapping is anchored by the oracle equivalence tests.
Tensor stitch_merge(const Tensor& strided_out, const StitchPlan& plan);

/// Adjoint of stitch_merge: [T, n] grads -> [S, padded_len/S, n] (zeros at
/// discarded positions).
Tensor stitch_merge_backward(const Tensor& grad_dense, const StitchPlan& plan);

/// Test oracle: runs the strided network on each shifted copy alone (batch of
/// one, no batch joining) and interleaves with the same index mapping. Defined
/// to be the ground-truth dense output.
Tensor dense_oracle_loop(const Tensor& features, const StitchPlan& plan,
                         const std::function<Tensor(const Tensor&)>& strided_net);

}  // namespace stitchnet
