#include "stitchnet/kernels.hpp"

#include <cblas.h>

#include <cstring>
#include <vector>

extern "C" void openblas_set_num_threads(int);

namespace stitchnet::kernels {

namespace {

struct ConvGeom {
  std::size_t batch, t_in, t_out, n_in, n_out, k, patch;
};

ConvGeom geom(const Tensor& x, const Tensor& w) {
  ConvGeom g;
  g.batch = x.extent(0);
  g.t_in = x.extent(1);
  g.n_in = x.extent(2);
  g.n_out = w.extent(0);
  g.k = w.extent(2);
  g.t_out = g.t_in - g.k + 1;
  g.patch = g.k * g.n_in;
  return g;
}

// Weight repack [n_out, n_in, k] -> [n_out, k*n_in] matching the time-major,
// feature-minor layout of an input patch.
template <typename T>
void pack_weights(const Tensor& w, const ConvGeom& g, std::vector<T>& wp) {
  wp.resize(g.n_out * g.patch);
  for (std::size_t i = 0; i < g.n_out; ++i)
    for (std::size_t j = 0; j < g.n_in; ++j)
      for (std::size_t z = 0; z < g.k; ++z)
        wp[i * g.patch + z * g.n_in + j] = static_cast<T>(w[(i * g.n_in + j) * g.k + z]);
}

// Patch matrix [batch*t_out, k*n_in]; each row is the contiguous input slab
// x[b, t .. t+k-1, :].
template <typename T>
void im2col(const Tensor& x, const ConvGeom& g, std::vector<T>& cols) {
  cols.resize(g.batch * g.t_out * g.patch);
  const double* xd = x.data();
#pragma omp parallel for schedule(static)
  for (long long bt = 0; bt < static_cast<long long>(g.batch * g.t_out); ++bt) {
    std::size_t b = static_cast<std::size_t>(bt) / g.t_out;
    std::size_t t = static_cast<std::size_t>(bt) % g.t_out;
    const double* src = xd + (b * g.t_in + t) * g.n_in;
    T* dst = cols.data() + static_cast<std::size_t>(bt) * g.patch;
    for (std::size_t u = 0; u < g.patch; ++u) dst[u] = static_cast<T>(src[u]);
  }
}

}  // namespace

void pin_blas_single_thread() {
  static const bool done = [] {
    openblas_set_num_threads(1);
    return true;
  }();
  (void)done;
}

void conv1d_forward_serial(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
  ConvGeom g = geom(x, w);
  for (std::size_t bb = 0; bb < g.batch; ++bb)
    for (std::size_t t = 0; t < g.t_out; ++t)
      for (std::size_t i = 0; i < g.n_out; ++i) {
        double acc = b[i];
        for (std::size_t j = 0; j < g.n_in; ++j)
          for (std::size_t z = 0; z < g.k; ++z)
            acc += w[(i * g.n_in + j) * g.k + z] * x.at(bb, t + z, j);
        out.at(bb, t, i) = acc;
      }
}

void conv1d_forward_fast(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
  pin_blas_single_thread();
  ConvGeom g = geom(x, w);
  std::vector<double> wp, cols;
  pack_weights(w, g, wp);
  im2col(x, g, cols);
  const std::size_t m = g.batch * g.t_out;
  double* od = out.data();
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < static_cast<long long>(m); ++r)
    for (std::size_t i = 0; i < g.n_out; ++i) od[r * g.n_out + i] = b[i];
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(m),
              static_cast<int>(g.n_out), static_cast<int>(g.patch), 1.0, cols.data(),
              static_cast<int>(g.patch), wp.data(), static_cast<int>(g.patch), 1.0, od,
              static_cast<int>(g.n_out));
}

void conv1d_forward_fast32(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out) {
  pin_blas_single_thread();
  ConvGeom g = geom(x, w);
  std::vector<float> wp, cols;
  pack_weights(w, g, wp);
  im2col(x, g, cols);
  const std::size_t m = g.batch * g.t_out;
  std::vector<float> of(m * g.n_out, 0.0f);
  cblas_sgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(m),
              static_cast<int>(g.n_out), static_cast<int>(g.patch), 1.0f, cols.data(),
              static_cast<int>(g.patch), wp.data(), static_cast<int>(g.patch), 0.0f, of.data(),
              static_cast<int>(g.n_out));
  double* od = out.data();
#pragma omp parallel for schedule(static)
  for (long long r = 0; r < static_cast<long long>(m); ++r)
    for (std::size_t i = 0; i < g.n_out; ++i)
      od[r * g.n_out + i] = b[i] + static_cast<double>(of[r * g.n_out + i]);
}

void conv1d_backward_serial(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                            Tensor& grad_in, Tensor& grad_w, Tensor& grad_b) {
  ConvGeom g = geom(x, w);
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] = 0.0;
  for (std::size_t bb = 0; bb < g.batch; ++bb)
    for (std::size_t t = 0; t < g.t_out; ++t)
      for (std::size_t i = 0; i < g.n_out; ++i) {
        double go = grad_out.at(bb, t, i);
        grad_b[i] += go;
        for (std::size_t j = 0; j < g.n_in; ++j)
          for (std::size_t z = 0; z < g.k; ++z) {
            grad_w[(i * g.n_in + j) * g.k + z] += go * x.at(bb, t + z, j);
            grad_in.at(bb, t + z, j) += go * w[(i * g.n_in + j) * g.k + z];
          }
      }
}

void conv1d_backward_fast(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          Tensor& grad_in, Tensor& grad_w, Tensor& grad_b) {
  pin_blas_single_thread();
  ConvGeom g = geom(x, w);
  const std::size_t m = g.batch * g.t_out;
  std::vector<double> wp, cols;
  pack_weights(w, g, wp);
  im2col(x, g, cols);
  const double* go = grad_out.data();

  // grad wrt the patch matrix, then scatter-add back onto the input.
  std::vector<double> gcols(m * g.patch);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(m),
              static_cast<int>(g.patch), static_cast<int>(g.n_out), 1.0, go,
              static_cast<int>(g.n_out), wp.data(), static_cast<int>(g.patch), 0.0, gcols.data(),
              static_cast<int>(g.patch));
  for (std::size_t i = 0; i < grad_in.size(); ++i) grad_in[i] = 0.0;
  double* gi = grad_in.data();
#pragma omp parallel for schedule(static)
  for (long long bb = 0; bb < static_cast<long long>(g.batch); ++bb)
    for (std::size_t t = 0; t < g.t_out; ++t) {
      const double* src = gcols.data() + ((static_cast<std::size_t>(bb) * g.t_out) + t) * g.patch;
      double* dst = gi + (static_cast<std::size_t>(bb) * g.t_in + t) * g.n_in;
      for (std::size_t u = 0; u < g.patch; ++u) dst[u] += src[u];
    }

  // grad wrt packed weights, unpacked into the [n_out, n_in, k] layout.
  std::vector<double> gwp(g.n_out * g.patch, 0.0);
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(g.n_out),
              static_cast<int>(g.patch), static_cast<int>(m), 1.0, go,
              static_cast<int>(g.n_out), cols.data(), static_cast<int>(g.patch), 0.0, gwp.data(),
              static_cast<int>(g.patch));
  for (std::size_t i = 0; i < g.n_out; ++i)
    for (std::size_t j = 0; j < g.n_in; ++j)
      for (std::size_t z = 0; z < g.k; ++z)
        grad_w[(i * g.n_in + j) * g.k + z] += gwp[i * g.patch + z * g.n_in + j];

  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t i = 0; i < g.n_out; ++i) grad_b[i] += go[r * g.n_out + i];
}

}  // namespace stitchnet::kernels
