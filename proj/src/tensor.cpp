#include "stitchnet/tensor.hpp"

#include <string>

namespace stitchnet {

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have at least one extent");
  std::size_t n = 1;
  for (std::size_t e : shape_) {
    if (e == 0) throw ShapeError("tensor extent must be >= 1");
    n *= e;
  }
  data_.assign(n, fill);
}

std::size_t Tensor::flat_index(const std::vector<std::size_t>& coord) const {
  if (coord.size() != shape_.size())
    throw RangeError("coordinate rank " + std::to_string(coord.size()) + " vs tensor rank " +
                     std::to_string(shape_.size()));
  std::size_t idx = 0;
  for (std::size_t d = 0; d < shape_.size(); ++d) {
    if (coord[d] >= shape_[d])
      throw RangeError("coordinate " + std::to_string(coord[d]) + " out of extent " +
                       std::to_string(shape_[d]) + " in dimension " + std::to_string(d));
    idx = idx * shape_[d] + coord[d];
  }
  return idx;
}

std::vector<std::size_t> Tensor::coord_of(std::size_t flat) const {
  std::vector<std::size_t> coord(shape_.size());
  for (std::size_t d = shape_.size(); d-- > 0;) {
    coord[d] = flat % shape_[d];
    flat /= shape_[d];
  }
  return coord;
}

bool Tensor::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor tensor_new(const std::vector<std::size_t>& shape, double fill) {
  return Tensor(shape, fill);
}

Tensor rng_uniform(Rng& rng, double lo, double hi, const std::vector<std::size_t>& shape) {
  if (!(lo < hi))
    throw RangeError("rng_uniform requires lo < hi, got [" + std::to_string(lo) + ", " +
                     std::to_string(hi) + ")");
  Tensor out(shape);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = rng.uniform(lo, hi);
  return out;
}

}  // namespace stitchnet
