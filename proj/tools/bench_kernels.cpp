// Compares the serial reference convolution kernels against the im2col+GEMM
// fast paths on Table-2-small-sized problems and reports GFLOP/s.
#include <chrono>
#include <cstdio>
#include <functional>

#include "stitchnet/kernels.hpp"
#include "stitchnet/tensor.hpp"

using namespace stitchnet;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    fn();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
  }
  return best;
}

void run_case(const char* name, std::size_t batch, std::size_t t_len, std::size_t n_in,
              std::size_t n_out, std::size_t k) {
  Rng rng(7);
  Tensor x = rng_uniform(rng, -1.0, 1.0, {batch, t_len, n_in});
  Tensor w = rng_uniform(rng, -0.5, 0.5, {n_out, n_in, k});
  Tensor b = rng_uniform(rng, -0.5, 0.5, {n_out});
  std::size_t t_out = t_len - k + 1;
  Tensor out({batch, t_out, n_out});
  double flops = 2.0 * batch * t_out * n_out * n_in * k;

  double serial = time_best_of(3, [&] { kernels::conv1d_forward_serial(x, w, b, out); });
  double fast = time_best_of(3, [&] { kernels::conv1d_forward_fast(x, w, b, out); });
  double fast32 = time_best_of(3, [&] { kernels::conv1d_forward_fast32(x, w, b, out); });

  std::printf("%-22s serial %7.2f GF/s   fast %7.2f GF/s (x%.1f)   fast32 %7.2f GF/s (x%.1f)\n",
              name, flops / serial * 1e-9, flops / fast * 1e-9, serial / fast,
              flops / fast32 * 1e-9, serial / fast32);
}

}  // namespace

int main() {
  kernels::pin_blas_single_thread();
  run_case("block1 (35 -> 189)", 2, 1024, 35, 189, 9);
  run_case("block2+ (189 -> 189)", 2, 512, 189, 189, 9);
  run_case("tiny (8 -> 16)", 4, 256, 8, 16, 5);
  return 0;
}
