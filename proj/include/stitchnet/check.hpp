#pragma once

#include <cstddef>
#include <string>

#include "stitchnet/tensor.hpp"

namespace stitchnet {

/// One randomized equivalence trial: a random conv/pool stack evaluated three
/// ways (batched shift-and-stitch, per-shift loop, independent dilated
/// reference) on the same random input.
struct StitchCheckReport {
  std::size_t configs = 0;
  double max_loop_deviation = 0.0;     // batched vs per-shift loop
  double max_dilated_deviation = 0.0;  // batched vs dilated reference
  bool passed(double loop_tol = 1e-12, double dilated_tol = 1e-6) const {
    return max_loop_deviation < loop_tol && max_dilated_deviation < dilated_tol;
  }
  std::string to_text() const;
};

/// Random stacks with L in 1..3, pools in {2,3}, kernels in {3,5,9},
/// T in 10..64, random parameters and nonlinearities.
StitchCheckReport run_stitch_equivalence(std::size_t n_configs, Rng& rng);

}  // namespace stitchnet
