#include "stitchnet/conv_stack.hpp"

namespace stitchnet {

Tensor pad_time(const Tensor& x, std::size_t p) {
  if (p == 0) return x;
  std::size_t b = x.extent(0), t_len = x.extent(1), n = x.extent(2);
  Tensor out({b, t_len + 2 * p, n}, 0.0);
  for (std::size_t bb = 0; bb < b; ++bb)
    for (std::size_t t = 0; t < t_len; ++t)
      for (std::size_t c = 0; c < n; ++c) out.at(bb, t + p, c) = x.at(bb, t, c);
  return out;
}

Tensor crop_time_grad(const Tensor& grad, std::size_t p) {
  if (p == 0) return grad;
  std::size_t b = grad.extent(0), t_len = grad.extent(1), n = grad.extent(2);
  Tensor out({b, t_len - 2 * p, n});
  for (std::size_t bb = 0; bb < b; ++bb)
    for (std::size_t t = 0; t < t_len - 2 * p; ++t)
      for (std::size_t c = 0; c < n; ++c) out.at(bb, t, c) = grad.at(bb, t + p, c);
  return out;
}

Tensor conv_stack_forward(std::vector<ConvBlock>& blocks, const Tensor& batch, Mode mode,
                          Rng& rng, Precision precision) {
  Tensor cur = batch;
  for (ConvBlock& blk : blocks) {
    cur = pad_time(cur, blk.conv.kernel_size() / 2);
    cur = blk.conv.forward(cur, precision);
    cur = blk.nonlin.forward(cur);
    cur = blk.pool.forward(cur);
    cur = blk.drop.forward(cur, mode, rng);
  }
  return cur;
}

Tensor conv_stack_backward(std::vector<ConvBlock>& blocks, const Tensor& grad_out) {
  Tensor grad = grad_out;
  for (std::size_t l = blocks.size(); l-- > 0;) {
    ConvBlock& blk = blocks[l];
    grad = blk.drop.backward(grad);
    grad = blk.pool.backward(grad);
    grad = blk.nonlin.backward(grad);
    grad = blk.conv.backward(grad);
    grad = crop_time_grad(grad, blk.conv.kernel_size() / 2);
  }
  return grad;
}

}  // namespace stitchnet
