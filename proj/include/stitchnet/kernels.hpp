#pragma once

#include <cstddef>

#include "stitchnet/tensor.hpp"

namespace stitchnet::kernels {

// Valid (no padding) 1D convolution kernels over [batch, T, n_in] inputs with
// weights [n_out, n_in, k] and bias [n_out], producing [batch, T-k+1, n_out].
//
// The *_serial variants are straight-loop reference implementations kept for
// testing; the fast variants run im2col + GEMM with OpenMP over the batch.
// fast and serial must agree to ~1e-12 relative (same dot products, different
// summation order); the benchmark tool compares their throughput.

void conv1d_forward_serial(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);
void conv1d_forward_fast(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);

// Single-precision GEMM forward path for inference-only throughput work.
// Inputs/outputs stay double; the contraction runs in float32.
void conv1d_forward_fast32(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& out);

// Adjoints. grad_w and grad_b are accumulated (+=); grad_in is overwritten.
void conv1d_backward_serial(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                            Tensor& grad_in, Tensor& grad_w, Tensor& grad_b);
void conv1d_backward_fast(const Tensor& x, const Tensor& w, const Tensor& grad_out,
                          Tensor& grad_in, Tensor& grad_w, Tensor& grad_b);

// Pins BLAS to one thread so results are reproducible run to run; called once
// lazily by the fast kernels. Parallelism belongs to the OpenMP loops above.
void pin_blas_single_thread();

}  // namespace stitchnet::kernels
