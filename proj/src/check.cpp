#include "stitchnet/check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stitchnet/conv_stack.hpp"
#include "stitchnet/dense_ref.hpp"
#include "stitchnet/stitch.hpp"

namespace stitchnet {

namespace {

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw GeometryError("equivalence check shapes differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] - b[i]));
  return worst;
}

}  // namespace

StitchCheckReport run_stitch_equivalence(std::size_t n_configs, Rng& rng) {
  constexpr std::size_t kPools[] = {2, 3};
  constexpr std::size_t kKernels[] = {3, 5, 9};
  constexpr NonlinKind kKinds[] = {NonlinKind::Tanh, NonlinKind::Relu, NonlinKind::Prelu};

  StitchCheckReport report;
  for (std::size_t c = 0; c < n_configs; ++c) {
    std::size_t depth = 1 + rng.below(3);
    std::size_t t_len = 10 + rng.below(55);
    std::size_t n_in = 2 + rng.below(3);
    std::size_t hidden = 2 + rng.below(4);

    std::vector<std::size_t> pools, kernels;
    std::vector<ConvBlock> blocks;
    for (std::size_t l = 0; l < depth; ++l) {
      pools.push_back(kPools[rng.below(2)]);
      kernels.push_back(kKernels[rng.below(3)]);
      blocks.emplace_back(l == 0 ? n_in : hidden, hidden, kernels[l], kKinds[rng.below(3)],
                          pools[l], 0.0);
      blocks[l].conv.init_params(rng);
    }

    Tensor features = rng_uniform(rng, -1.0, 1.0, {t_len, n_in});
    StitchPlan plan = plan_make_margined(t_len, pools, kernels);
    Rng unused(0);  // dropout rate 0: never consulted

    Tensor batched = stitch_merge(
        conv_stack_forward(blocks, shift_expand(features, plan), Mode::Eval, unused), plan);
    Tensor looped = dense_oracle_loop(features, plan, [&](const Tensor& one) {
      return conv_stack_forward(blocks, one, Mode::Eval, unused);
    });

    std::vector<DenseRefLayer> ref;
    for (const ConvBlock& b : blocks)
      ref.push_back({&b.conv.W, &b.conv.B, b.nonlin.kind(),
                     b.nonlin.alpha.size() ? b.nonlin.alpha[0] : 0.0, b.pool.pool_size()});
    Tensor dilated = dense_reference_forward(features, ref);

    report.max_loop_deviation = std::max(report.max_loop_deviation, max_abs_diff(batched, looped));
    report.max_dilated_deviation =
        std::max(report.max_dilated_deviation, max_abs_diff(batched, dilated));
    ++report.configs;
  }
  return report;
}

std::string StitchCheckReport::to_text() const {
  std::ostringstream out;
  out << "stitch_configs = " << configs << "\n";
  out << "max_loop_deviation = " << max_loop_deviation << "\n";
  out << "max_dilated_deviation = " << max_dilated_deviation << "\n";
  return out.str();
}

}  // namespace stitchnet
