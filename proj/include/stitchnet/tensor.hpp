#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "stitchnet/errors.hpp"

namespace stitchnet {

/// Dense row-major N-dimensional array of doubles. The universal value and
/// gradient carrier; values are treated as immutable once handed to another
/// module.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_, 0.0); }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t d) const { return shape_[d]; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Row-major accessors for the ranks the layers use.
  double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  double& at(std::size_t b, std::size_t t, std::size_t j) {
    return data_[(b * shape_[1] + t) * shape_[2] + j];
  }
  double at(std::size_t b, std::size_t t, std::size_t j) const {
    return data_[(b * shape_[1] + t) * shape_[2] + j];
  }

  std::size_t flat_index(const std::vector<std::size_t>& coord) const;
  std::vector<std::size_t> coord_of(std::size_t flat) const;

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// tensor_new with full shape validation.
Tensor tensor_new(const std::vector<std::size_t>& shape, double fill);

/// Elementwise map; raises numeric-error if f produces a non-finite value.
template <typename F>
Tensor map_elementwise(const Tensor& t, F f) {
  Tensor out = Tensor::zeros_like(t);
  for (std::size_t i = 0; i < t.size(); ++i) {
    double v = f(t[i]);
    if (!std::isfinite(v))
      throw NumericError("map_elementwise produced non-finite value");
    out[i] = v;
  }
  return out;
}

/// Deterministic pseudo-random stream. Backed by std::mt19937_64, whose
/// output sequence is fixed by the C++ standard, with a hand-rolled
/// uint64->double mapping so draws are identical across platforms and
/// standard libraries. Single-owner: never share one Rng across threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 bits of randomness.
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform index in [0,n). Modulo bias is < 2^-53 for any n we use.
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

 private:
  std::mt19937_64 engine_;
};

/// rng_uniform: tensor of i.i.d. uniforms on [lo,hi).
Tensor rng_uniform(Rng& rng, double lo, double hi, const std::vector<std::size_t>& shape);

}  // namespace stitchnet
