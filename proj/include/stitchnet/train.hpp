#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stitchnet/data.hpp"
#include "stitchnet/model.hpp"

namespace stitchnet {

/// Classical momentum: v <- mu*v - eta*g, theta <- theta + v.
struct OptimState {
  double learning_rate;
  double momentum;
  std::vector<Tensor> velocity;  // aligned with Model::param_groups()

  static OptimState make(Model& model, double learning_rate, double momentum);
};

void sgd_step(std::vector<ParamGroup>& groups, OptimState& state);

struct TrainPlan {
  std::size_t epochs = 50;
  std::uint64_t shuffle_seed = 0;
  std::string task;  // empty = joint loss over every task
  double learning_rate = 0.0148;
  double momentum = 0.9;
  bool include_validation_in_finetune = false;
};

struct EpochRecord {
  std::size_t epoch;  // 1-based
  double mean_loss;   // summed NLL / labeled positions
  std::vector<std::pair<std::string, double>> val_qc;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::string to_text() const;  // "epoch=N mean_loss=X qc_<task>=Y" lines
};

/// One forward/backward/step per sequence, seed-shuffled order each epoch.
/// The shuffle draws from its own stream (plan.shuffle_seed) so ordering and
/// dropout vary independently; `rng` feeds dropout only.
TrainLog train_multitask(Model& model, const DatasetSplit& dataset, const TrainPlan& plan,
                         OptimState& state, Rng& rng);

/// Copy of the model trained further on one task at plan.learning_rate / 10
/// with freshly zeroed velocity. plan.epochs == 0 returns the plain copy.
Model finetune(const Model& model, const DatasetSplit& dataset, const std::string& task_name,
               const TrainPlan& plan, Rng& rng);

/// Test hook: pretend a backward pass is broken and verify the check notices.
struct GradCheckFault {
  bool flip_conv_grad_w = false;  // negate block1's analytic conv W gradient
};

struct GradCheckReport {
  struct Group {
    std::string name;
    double rel_err;  // max |fd - analytic| / max(|fd|_inf, |analytic|_inf)
  };
  std::vector<Group> groups;
  double worst = 0.0;
  bool passed(double tolerance) const { return worst < tolerance; }
};

/// Central differences (step 1e-3) of the summed NLL on one random synthetic
/// instance against the analytic gradients, per parameter group. Instances
/// whose activations sit within 1e-2 of a relu/prelu kink or a pooling tie
/// are resampled.
GradCheckReport grad_check(const std::function<Model(Rng&)>& factory, double tolerance, Rng& rng,
                           const GradCheckFault& fault = {});

}  // namespace stitchnet
