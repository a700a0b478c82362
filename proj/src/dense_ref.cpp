#include "stitchnet/dense_ref.hpp"

#include <algorithm>
#include <cmath>

namespace stitchnet {

namespace {

// Dense working array over window [lo, hi) of positions, n channels.
struct Window {
  long long lo = 0, hi = 0;
  std::size_t n = 0;
  std::vector<double> v;  // (hi-lo) x n, row-major

  double get(long long t, std::size_t c) const {
    if (t < lo || t >= hi) return 0.0;
    return v[static_cast<std::size_t>(t - lo) * n + c];
  }
  double& ref(long long t, std::size_t c) { return v[static_cast<std::size_t>(t - lo) * n + c]; }
};

double apply_nonlin(NonlinKind kind, double alpha, double x) {
  switch (kind) {
    case NonlinKind::Tanh: return std::tanh(x);
    case NonlinKind::Relu: return x > 0.0 ? x : 0.0;
    case NonlinKind::Prelu: return x >= 0.0 ? x : alpha * x;
  }
  return x;
}

}  // namespace

Tensor dense_reference_forward(const Tensor& features, const std::vector<DenseRefLayer>& layers) {
  const long long t_len = static_cast<long long>(features.extent(0));
  const std::size_t depth = layers.size();

  // Per-layer dilation (cumulative pool product below the layer).
  std::vector<long long> dil(depth, 1);
  for (std::size_t l = 1; l < depth; ++l)
    dil[l] = dil[l - 1] * static_cast<long long>(layers[l - 1].pool);

  // Top-down: the window of positions each stage must produce so the final
  // output covers [0, T).
  std::vector<long long> lo(depth + 1), hi(depth + 1);
  lo[depth] = 0;
  hi[depth] = t_len;
  for (std::size_t l = depth; l-- > 0;) {
    long long k = static_cast<long long>(layers[l].W->extent(2));
    long long m = static_cast<long long>(layers[l].pool);
    long long pool_reach = (m - 1) * dil[l];
    long long conv_reach = ((k - 1) / 2) * dil[l];
    lo[l] = lo[l + 1] - pool_reach - conv_reach;
    hi[l] = hi[l + 1] + conv_reach;
  }

  Window cur;
  cur.lo = lo[0];
  cur.hi = hi[0];
  cur.n = features.extent(1);
  cur.v.assign(static_cast<std::size_t>(cur.hi - cur.lo) * cur.n, 0.0);
  for (long long t = 0; t < t_len; ++t)
    for (std::size_t c = 0; c < cur.n; ++c) cur.ref(t, c) = features.at(static_cast<std::size_t>(t), c);

  for (std::size_t l = 0; l < depth; ++l) {
    const DenseRefLayer& ly = layers[l];
    const long long k = static_cast<long long>(ly.W->extent(2));
    const std::size_t n_in = ly.W->extent(1), n_out = ly.W->extent(0);
    const long long d = dil[l];
    const long long m = static_cast<long long>(ly.pool);
    const long long pool_reach = (m - 1) * d;

    // Dilated centered convolution + nonlinearity, computed on the window
    // the pooling stage below needs: [lo[l+1]-pool_reach, hi[l+1]).
    Window conv_out;
    conv_out.lo = lo[l + 1] - pool_reach;
    conv_out.hi = hi[l + 1];
    conv_out.n = n_out;
    conv_out.v.assign(static_cast<std::size_t>(conv_out.hi - conv_out.lo) * n_out, 0.0);
    for (long long t = conv_out.lo; t < conv_out.hi; ++t)
      for (std::size_t i = 0; i < n_out; ++i) {
        double acc = (*ly.B)[i];
        for (std::size_t j = 0; j < n_in; ++j)
          for (long long z = 0; z < k; ++z)
            acc += (*ly.W)[(i * n_in + j) * static_cast<std::size_t>(k) +
                           static_cast<std::size_t>(z)] *
                   cur.get(t + (z - (k - 1) / 2) * d, j);
        conv_out.ref(t, i) = apply_nonlin(ly.nonlin, ly.alpha, acc);
      }

    // Stride-1 sliding max, window of m taps spaced d apart and ending at t.
    Window pool_out;
    pool_out.lo = lo[l + 1];
    pool_out.hi = hi[l + 1];
    pool_out.n = n_out;
    pool_out.v.assign(static_cast<std::size_t>(pool_out.hi - pool_out.lo) * n_out, 0.0);
    for (long long t = pool_out.lo; t < pool_out.hi; ++t)
      for (std::size_t i = 0; i < n_out; ++i) {
        double best = conv_out.get(t, i);
        for (long long u = 1; u < m; ++u) best = std::max(best, conv_out.get(t - u * d, i));
        pool_out.ref(t, i) = best;
      }
    cur = std::move(pool_out);
  }

  Tensor out({static_cast<std::size_t>(t_len), cur.n});
  for (long long t = 0; t < t_len; ++t)
    for (std::size_t c = 0; c < cur.n; ++c) out.at(static_cast<std::size_t>(t), c) = cur.get(t, c);
  return out;
}

}  // namespace stitchnet
