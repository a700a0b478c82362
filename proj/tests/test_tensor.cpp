#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stitchnet/tensor.hpp"

using namespace stitchnet;

TEST_CASE("construction and shape accounting") {
  Tensor t({2, 3, 4}, 1.5);
  CHECK(t.rank() == 3);
  CHECK(t.size() == 24);
  CHECK(t.extent(1) == 3);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t[i] == 1.5);

  Tensor z = Tensor::zeros_like(t);
  CHECK(z.same_shape(t));
  CHECK(z[7] == 0.0);
}

TEST_CASE("tensor_new rejects zero extents") {
  CHECK_THROWS_AS(tensor_new({2, 0, 3}, 0.0), ShapeError);
  CHECK_THROWS_AS(tensor_new({}, 0.0), ShapeError);
}

TEST_CASE("flat_index and coord_of are inverse bijections") {
  Tensor t({3, 4, 5});
  for (std::size_t f = 0; f < t.size(); ++f) {
    auto c = t.coord_of(f);
    CHECK(t.flat_index(c) == f);
  }
  CHECK(t.flat_index({1, 2, 3}) == 1 * 20 + 2 * 5 + 3);
  CHECK_THROWS_AS(t.flat_index({3, 0, 0}), RangeError);
}

TEST_CASE("rank-2 and rank-3 at() match row-major layout") {
  Tensor a({2, 3});
  a.at(1, 2) = 9.0;
  CHECK(a[5] == 9.0);
  Tensor b({2, 3, 4});
  b.at(1, 2, 3) = 7.0;
  CHECK(b[23] == 7.0);
}

TEST_CASE("all_finite and map_elementwise numeric policing") {
  Tensor t({2, 2}, 1.0);
  CHECK(t.all_finite());
  t[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(t.all_finite());

  Tensor u({2}, 4.0);
  Tensor r = map_elementwise(u, [](double v) { return std::sqrt(v); });
  CHECK(r[0] == 2.0);
  CHECK_THROWS_AS(map_elementwise(u, [](double) { return 1.0 / 0.0; }), NumericError);
}

TEST_CASE("rng determinism and uniform range") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng r(7);
  Tensor t = rng_uniform(r, -0.25, 0.25, {1000});
  double lo = 1e9, hi = -1e9;
  for (std::size_t i = 0; i < t.size(); ++i) {
    lo = std::min(lo, t[i]);
    hi = std::max(hi, t[i]);
  }
  CHECK(lo >= -0.25);
  CHECK(hi < 0.25);
  CHECK(lo < -0.2);  // actually fills the range
  CHECK(hi > 0.2);
}

TEST_CASE("same seed gives the same uniform tensor") {
  Rng a(11), b(11);
  Tensor x = rng_uniform(a, 0.0, 1.0, {64});
  Tensor y = rng_uniform(b, 0.0, 1.0, {64});
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == y[i]);
}
