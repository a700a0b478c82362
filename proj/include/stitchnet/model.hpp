#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stitchnet/conv_stack.hpp"
#include "stitchnet/data.hpp"
#include "stitchnet/layers.hpp"
#include "stitchnet/stitch.hpp"
#include "stitchnet/tensor.hpp"

namespace stitchnet {

struct ModelConfig {
  std::size_t conv_layers = 3;
  std::size_t hidden_units = 189;
  std::size_t kernel_size = 9;
  std::size_t pool_size = 2;
  double input_dropout = 0.35;
  double dropout = 0.0;
  NonlinKind nonlinearity = NonlinKind::Relu;
  std::size_t embed_dim = 15;
  std::vector<TaskScheme> tasks;

  void validate() const;  // throws config-error naming every offending field
  std::size_t input_width() const { return embed_dim + kPssmWidth; }
};

/// Per-task pre-softmax scores, aligned with ModelConfig::tasks.
using TaskLogits = std::vector<Tensor>;  // each [T, |C_tau|]

struct ParamGroup {
  std::string name;
  Tensor* value;
  Tensor* grad;
};

/// The full network of the end-to-end architecture: embedding lookup with
/// input dropout, PSSM join, L conv/nonlin/pool/dropout blocks evaluated over
/// the shift-and-stitch batch, and one linear head per task.
class Model {
 public:
  static Model build(const ModelConfig& config, Rng& rng);

  /// Dense per-position logits for one sequence; length T for every task.
  /// Layer caches are left primed for backward_dense when mode == Train.
  TaskLogits forward_dense(const EncodedSeq& seq, Mode mode, Rng& rng,
                           Precision precision = Precision::F64);

  /// Accumulates parameter gradients from per-task logit gradients.
  void backward_dense(const TaskLogits& grad_logits);

  void zero_grads();
  std::vector<ParamGroup> param_groups();

  const ModelConfig& config() const { return config_; }
  LookupTable& lookup() { return lookup_; }
  std::vector<ConvBlock>& blocks() { return blocks_; }
  std::vector<Linear>& heads() { return heads_; }
  std::size_t task_index(const std::string& name) const;

  /// Smallest loss-relevant pre-nonlinearity magnitude / maxpool win margin
  /// seen in the last backward pass (elements whose upstream gradient was
  /// nonzero); gradient checking resamples near kinks and ties.
  double min_kink_margin() const { return kink_margin_; }

 private:
  explicit Model(const ModelConfig& config);

  ModelConfig config_;
  LookupTable lookup_;
  Dropout input_drop_;
  std::vector<ConvBlock> blocks_;
  std::vector<Linear> heads_;

  StitchPlan plan_;
  std::size_t last_len_ = 0;
  double kink_margin_ = 0.0;
};

/// Row-wise stable softmax; rows sum to 1 within 1e-9.
Tensor softmax_rows(const Tensor& logits);

struct LossResult {
  double loss = 0.0;            // summed over selected tasks, labeled positions
  std::size_t positions = 0;    // labeled (task, position) pairs counted
  TaskLogits grad_logits;       // softmax(p) - onehot at counted positions
};

/// Negative log-likelihood over the selected tasks. labels[tau][t] is a class
/// index or -1 for the missing marker (skipped). Pass an empty selector to
/// include every task.
LossResult nll_loss(const TaskLogits& logits, const std::vector<std::vector<int>>& labels,
                    const std::vector<bool>& task_selected = {});

/// Argmax decode into each task's alphabet; ties pick the lowest class index.
std::vector<std::string> predict_labels(const TaskLogits& logits,
                                        const std::vector<TaskScheme>& tasks);

void checkpoint_save(Model& model, const std::string& path);
Model checkpoint_load(const std::string& path);

/// Encodes one task's label string to class indices (-1 = missing).
std::vector<int> encode_labels(const TaskScheme& scheme, const std::string& labels);

}  // namespace stitchnet
