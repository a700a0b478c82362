#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stitchnet/check.hpp"
#include "stitchnet/conv_stack.hpp"
#include "stitchnet/dense_ref.hpp"
#include "stitchnet/stitch.hpp"

using namespace stitchnet;

TEST_CASE("plan geometry: stride is the pool product, padded_len rounds up") {
  StitchPlan plan = plan_make(10, {2, 3}, {3, 3});
  CHECK(plan.total_stride == 6);
  CHECK(plan.padded_len % 6 == 0);
  CHECK(plan.padded_len >= 10 + 6 - 1);
  CHECK(plan.padded_len == 18);  // smallest multiple of 6 >= 15
  CHECK(plan.front_margin == 0);

  StitchPlan margined = plan_make_margined(10, {2, 3}, {3, 3});
  CHECK(margined.front_margin % margined.total_stride == 0);
  CHECK(margined.front_margin > 0);
}

TEST_CASE("stitch pinned example: S=2 interleaves [b0,a0,b1,a1]") {
  // Copy a (shift 0) holds odd dense positions, copy b (shift 1) even ones.
  StitchPlan plan = plan_make(4, {2}, {1});
  CHECK(plan.total_stride == 2);
  Tensor strided({2, plan.padded_len / 2, 1});
  // copy 0 strided values a0,a1,...; copy 1 values b0,b1,...
  for (std::size_t i = 0; i < plan.padded_len / 2; ++i) {
    strided.at(0, i, 0) = 10.0 + static_cast<double>(i);  // a_i
    strided.at(1, i, 0) = 20.0 + static_cast<double>(i);  // b_i
  }
  Tensor dense = stitch_merge(strided, plan);
  CHECK(dense.extent(0) == 4);
  CHECK(dense.at(0, 0) == 20.0);  // b0
  CHECK(dense.at(1, 0) == 10.0);  // a0
  CHECK(dense.at(2, 0) == 21.0);  // b1
  CHECK(dense.at(3, 0) == 11.0);  // a1
}

TEST_CASE("passthrough conv + pool m=2 pinned example on [1,4,2,8,5,7]") {
  // Identity k=3 conv (center tap 1) followed by maxpool 2: dense output at t
  // is max(x[t-1], x[t]) with zero padding, i.e. [1,4,4,8,8,7].
  std::vector<ConvBlock> blocks;
  blocks.emplace_back(1, 1, 3, NonlinKind::Relu, 2, 0.0);
  blocks[0].conv.W[0] = 0.0;
  blocks[0].conv.W[1] = 1.0;
  blocks[0].conv.W[2] = 0.0;
  blocks[0].conv.B[0] = 0.0;

  Tensor features({6, 1});
  double vals[] = {1, 4, 2, 8, 5, 7};
  for (std::size_t t = 0; t < 6; ++t) features.at(t, 0) = vals[t];

  StitchPlan plan = plan_make_margined(6, {2}, {3});
  Rng rng(0);
  Tensor dense = stitch_merge(
      conv_stack_forward(blocks, shift_expand(features, plan), Mode::Eval, rng), plan);
  double expected[] = {1, 4, 4, 8, 8, 7};
  for (std::size_t t = 0; t < 6; ++t) CHECK(dense.at(t, 0) == doctest::Approx(expected[t]));
}

TEST_CASE("shift_expand places copy j with j leading zeros plus the margin") {
  Tensor features({3, 2});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t j = 0; j < 2; ++j) features.at(t, j) = 10.0 * (t + 1) + j;
  StitchPlan plan = plan_make(3, {2}, {3});
  Tensor batch = shift_expand(features, plan);
  CHECK(batch.extent(0) == 2);
  CHECK(batch.extent(1) == plan.padded_len);
  CHECK(batch.at(0, 0, 0) == 10.0);
  CHECK(batch.at(1, 0, 0) == 0.0);  // shifted copy leads with a zero
  CHECK(batch.at(1, 1, 0) == 10.0);
  CHECK(batch.at(1, 3, 1) == 31.0);
}

TEST_CASE("shift_expand / stitch_merge adjoints pass the inner-product test") {
  // <A x, y> == <x, A^T y> for random x, y certifies each backward routine.
  Rng rng(17);
  StitchPlan plan = plan_make_margined(11, {2, 2}, {3, 5});

  Tensor x = rng_uniform(rng, -1.0, 1.0, {11, 3});
  Tensor y = rng_uniform(rng, -1.0, 1.0, {plan.total_stride, plan.padded_len, 3});
  Tensor ax = shift_expand(x, plan);
  Tensor aty = shift_expand_backward(y, plan);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) lhs += ax[i] * y[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));

  Tensor u = rng_uniform(rng, -1.0, 1.0, {plan.total_stride, plan.padded_len / plan.total_stride, 2});
  Tensor v = rng_uniform(rng, -1.0, 1.0, {11, 2});
  Tensor su = stitch_merge(u, plan);
  Tensor stv = stitch_merge_backward(v, plan);
  lhs = rhs = 0.0;
  for (std::size_t i = 0; i < su.size(); ++i) lhs += su[i] * v[i];
  for (std::size_t i = 0; i < u.size(); ++i) rhs += u[i] * stv[i];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("dense length invariant holds for awkward lengths") {
  for (std::size_t t_len : {1u, 2u, 5u, 7u, 12u, 13u}) {
    std::vector<ConvBlock> blocks;
    Rng rng(t_len);
    blocks.emplace_back(2, 3, 3, NonlinKind::Tanh, 2, 0.0);
    blocks[0].conv.init_params(rng);
    StitchPlan plan = plan_make_margined(t_len, {2}, {3});
    Tensor features = rng_uniform(rng, -1.0, 1.0, {t_len, 2});
    Rng unused(0);
    Tensor dense = stitch_merge(
        conv_stack_forward(blocks, shift_expand(features, plan), Mode::Eval, unused), plan);
    CHECK(dense.extent(0) == t_len);
    CHECK(dense.extent(1) == 3);
  }
}

TEST_CASE("randomized three-way equivalence: batched vs loop vs dilated oracle") {
  Rng rng(2024);
  StitchCheckReport report = run_stitch_equivalence(40, rng);
  CHECK(report.configs == 40);
  CHECK(report.max_loop_deviation < 1e-12);
  CHECK(report.max_dilated_deviation < 1e-6);
}

TEST_CASE("dilated reference itself: hand-checked two-layer case") {
  // Single channel, identity convs, pools 2 then 2: dense value at t is the
  // running max over the last 4 positions (window of window ends).
  std::vector<DenseRefLayer> layers;
  Tensor w({1, 1, 3}, 0.0);
  w[1] = 1.0;
  Tensor b({1}, 0.0);
  layers.push_back({&w, &b, NonlinKind::Relu, 0.25, 2});
  layers.push_back({&w, &b, NonlinKind::Relu, 0.25, 2});

  Tensor x({8, 1});
  double vals[] = {3, 1, 4, 1, 5, 9, 2, 6};
  for (std::size_t t = 0; t < 8; ++t) x.at(t, 0) = vals[t];
  Tensor out = dense_reference_forward(x, layers);
  // layer1: y1[t] = max(x[t-1], x[t]); layer2 dilation 2: y2[t] = max(y1[t-2], y1[t])
  double y1[8], y2[8];
  for (int t = 0; t < 8; ++t) y1[t] = std::max(t > 0 ? vals[t - 1] : 0.0, vals[t]);
  for (int t = 0; t < 8; ++t) y2[t] = std::max(t > 1 ? y1[t - 2] : 0.0, y1[t]);
  for (std::size_t t = 0; t < 8; ++t) CHECK(out.at(t, 0) == doctest::Approx(y2[t]));
}

TEST_CASE("geometry errors are located") {
  CHECK_THROWS_AS(plan_make(0, {2}, {3}), GeometryError);
  CHECK_THROWS_AS(plan_make(5, {2, 2}, {3}), ConfigError);  // pool/kernel count mismatch
  StitchPlan plan = plan_make(5, {2}, {3});
  Tensor wrong({3, plan.padded_len, 1});
  CHECK_THROWS_AS(shift_expand(Tensor({4, 1}), plan), GeometryError);  // T mismatch
  CHECK_THROWS_AS(stitch_merge(wrong, plan), GeometryError);
}
