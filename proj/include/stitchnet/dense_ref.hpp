#pragma once

#include <cstddef>
#include <vector>

#include "stitchnet/layers.hpp"
#include "stitchnet/tensor.hpp"

namespace stitchnet {

/// One conv/nonlin/pool stage as seen by the dilated reference evaluator.
struct DenseRefLayer {
  const Tensor* W;  // [n_out, n_in, k]
  const Tensor* B;  // [n_out]
  NonlinKind nonlin;
  double alpha;       // prelu slope
  std::size_t pool;   // m
};

/// Independent a-trous evaluation of a conv/pool stack: stride-m pooling is
/// replaced by a stride-1 sliding max and every subsequent kernel is dilated
/// by the cumulative stride. Convolutions are centered; pooling windows end
/// at their output position; the input is treated as zero outside [0, T).
/// Shares no machinery with the shift-and-stitch path — this is the oracle
/// the batched path is checked against.
Tensor dense_reference_forward(const Tensor& features /* [T, n] */,
                               const std::vector<DenseRefLayer>& layers);

}  // namespace stitchnet
