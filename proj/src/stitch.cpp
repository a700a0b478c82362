#include "stitchnet/stitch.hpp"

#include <string>

namespace stitchnet {

StitchPlan plan_make(std::size_t seq_len, const std::vector<std::size_t>& pool_sizes,
                     const std::vector<std::size_t>& kernel_sizes) {
  if (seq_len == 0) throw GeometryError("sequence length must be >= 1");
  if (pool_sizes.size() != kernel_sizes.size())
    throw ConfigError("pool_sizes and kernel_sizes must have equal length");
  StitchPlan plan;
  plan.seq_len = seq_len;
  plan.pool_sizes = pool_sizes;
  plan.kernel_sizes = kernel_sizes;
  for (std::size_t m : pool_sizes) {
    if (m == 0) throw ConfigError("pool size must be >= 1");
    plan.total_stride *= m;
  }
  for (std::size_t k : kernel_sizes)
    if (k % 2 == 0) throw ConfigError("kernel size must be odd, got " + std::to_string(k));
  std::size_t s = plan.total_stride;
  std::size_t need = seq_len + s - 1;
  plan.padded_len = ((need + s - 1) / s) * s;
  return plan;
}

StitchPlan plan_make_margined(std::size_t seq_len, const std::vector<std::size_t>& pool_sizes,
                              const std::vector<std::size_t>& kernel_sizes) {
  StitchPlan plan = plan_make(seq_len, pool_sizes, kernel_sizes);
  std::size_t s = plan.total_stride;
  // Receptive reach of the stack: how far edge-pad corruption can travel.
  std::size_t reach = 0, dil = 1;
  for (std::size_t l = 0; l < pool_sizes.size(); ++l) {
    reach += dil * (kernel_sizes[l] / 2 + (pool_sizes[l] - 1));
    dil *= pool_sizes[l];
  }
  plan.front_margin = ((reach + s - 1) / s) * s;
  std::size_t need = plan.front_margin + seq_len + reach + s - 1;
  plan.padded_len = ((need + s - 1) / s) * s;
  return plan;
}

Tensor shift_expand(const Tensor& features, const StitchPlan& plan) {
  if (features.rank() != 2 || features.extent(0) != plan.seq_len)
    throw GeometryError("shift_expand expects [T, n] features with T = " +
                        std::to_string(plan.seq_len));
  std::size_t s = plan.total_stride, n = features.extent(1);
  Tensor batch({s, plan.padded_len, n}, 0.0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t t = 0; t < plan.seq_len; ++t)
      for (std::size_t f = 0; f < n; ++f)
        batch.at(j, plan.front_margin + t + j, f) = features.at(t, f);
  return batch;
}

Tensor shift_expand_backward(const Tensor& grad_batch, const StitchPlan& plan) {
  std::size_t s = plan.total_stride;
  if (grad_batch.rank() != 3 || grad_batch.extent(0) != s ||
      grad_batch.extent(1) != plan.padded_len)
    throw GeometryError("shift_expand_backward expects [S, padded_len, n] grads");
  std::size_t n = grad_batch.extent(2);
  Tensor grad({plan.seq_len, n}, 0.0);
  for (std::size_t j = 0; j < s; ++j)
    for (std::size_t t = 0; t < plan.seq_len; ++t)
      for (std::size_t f = 0; f < n; ++f)
        grad.at(t, f) += grad_batch.at(j, plan.front_margin + t + j, f);
  return grad;
}

namespace {

// Dense position t (0-based) -> (copy, strided index). A front margin shifts
// every copy's strided array right by front_margin / S.
inline void dense_source(std::size_t t, const StitchPlan& plan, std::size_t& copy,
                         std::size_t& idx) {
  std::size_t s = plan.total_stride;
  copy = (s - ((t + 1) % s)) % s;
  idx = t / s + plan.front_margin / s;
}

}  // namespace

Tensor stitch_merge(const Tensor& strided_out, const StitchPlan& plan) {
  std::size_t s = plan.total_stride;
  std::size_t strided_len = plan.padded_len / s;
  if (strided_out.rank() != 3 || strided_out.extent(0) != s ||
      strided_out.extent(1) != strided_len)
    throw GeometryError("stitch_merge expects [S, padded_len/S, n] input");
  std::size_t n = strided_out.extent(2);
  Tensor dense({plan.seq_len, n});
  for (std::size_t t = 0; t < plan.seq_len; ++t) {
    std::size_t copy, idx;
    dense_source(t, plan, copy, idx);
    for (std::size_t f = 0; f < n; ++f) dense.at(t, f) = strided_out.at(copy, idx, f);
  }
  return dense;
}

Tensor stitch_merge_backward(const Tensor& grad_dense, const StitchPlan& plan) {
  if (grad_dense.rank() != 2 || grad_dense.extent(0) != plan.seq_len)
    throw GeometryError("stitch_merge_backward expects [T, n] grads");
  std::size_t s = plan.total_stride, n = grad_dense.extent(1);
  Tensor grad({s, plan.padded_len / s, n}, 0.0);
  for (std::size_t t = 0; t < plan.seq_len; ++t) {
    std::size_t copy, idx;
    dense_source(t, plan, copy, idx);
    for (std::size_t f = 0; f < n; ++f) grad.at(copy, idx, f) += grad_dense.at(t, f);
  }
  return grad;
}

Tensor dense_oracle_loop(const Tensor& features, const StitchPlan& plan,
                         const std::function<Tensor(const Tensor&)>& strided_net) {
  Tensor batch = shift_expand(features, plan);
  std::size_t s = plan.total_stride;
  std::size_t strided_len = plan.padded_len / s;
  std::size_t n_features = features.extent(1);
  Tensor collected;
  for (std::size_t j = 0; j < s; ++j) {
    Tensor single({1, plan.padded_len, n_features});
    for (std::size_t t = 0; t < plan.padded_len; ++t)
      for (std::size_t f = 0; f < n_features; ++f) single.at(0, t, f) = batch.at(j, t, f);
    Tensor out = strided_net(single);
    if (out.rank() != 3 || out.extent(0) != 1 || out.extent(1) != strided_len)
      throw GeometryError("oracle network output has unexpected shape");
    if (j == 0) collected = Tensor({s, strided_len, out.extent(2)});
    for (std::size_t t = 0; t < strided_len; ++t)
      for (std::size_t f = 0; f < out.extent(2); ++f) collected.at(j, t, f) = out.at(0, t, f);
  }
  return stitch_merge(collected, plan);
}

}  // namespace stitchnet
