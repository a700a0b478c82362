#include "stitchnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stitchnet/eval.hpp"

namespace stitchnet {

OptimState OptimState::make(Model& model, double learning_rate, double momentum) {
  OptimState state;
  state.learning_rate = learning_rate;
  state.momentum = momentum;
  for (const ParamGroup& g : model.param_groups())
    state.velocity.push_back(Tensor::zeros_like(*g.value));
  return state;
}

void sgd_step(std::vector<ParamGroup>& groups, OptimState& state) {
  if (groups.size() != state.velocity.size())
    throw GeometryError("optimizer state has " + std::to_string(state.velocity.size()) +
                        " velocity tensors for " + std::to_string(groups.size()) + " groups");
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Tensor& v = state.velocity[g];
    if (!v.same_shape(*groups[g].value))
      throw GeometryError("velocity shape mismatch for " + groups[g].name);
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = state.momentum * v[i] - state.learning_rate * (*groups[g].grad)[i];
      (*groups[g].value)[i] += v[i];
    }
  }
}

namespace {

std::vector<std::vector<int>> labels_for(const std::vector<TaskScheme>& tasks,
                                         const SequenceRecord& rec) {
  std::vector<std::vector<int>> labels;
  labels.reserve(tasks.size());
  for (const TaskScheme& t : tasks) {
    auto it = rec.labels.find(t.name);
    if (it == rec.labels.end())
      throw ConfigError("record '" + rec.id + "' has no labels for model task '" + t.name + "'");
    if (it->second.size() != rec.length())
      throw DataError("record '" + rec.id + "' label length mismatch for task '" + t.name + "'");
    labels.push_back(encode_labels(t, it->second));
  }
  return labels;
}

std::vector<bool> selector_for(const Model& model, const std::string& task) {
  if (task.empty()) return {};
  std::vector<bool> sel(model.config().tasks.size(), false);
  sel[model.task_index(task)] = true;
  return sel;
}

}  // namespace

TrainLog train_multitask(Model& model, const DatasetSplit& dataset, const TrainPlan& plan,
                         OptimState& state, Rng& rng) {
  if (plan.epochs < 1) throw ConfigError("training plan needs epochs >= 1");
  if (dataset.train.empty()) throw DataError("training split is empty");
  std::vector<bool> selected = selector_for(model, plan.task);

  std::vector<ParamGroup> groups = model.param_groups();
  Rng shuffle_rng(plan.shuffle_seed);
  std::vector<std::size_t> order(dataset.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainLog log;
  for (std::size_t epoch = 1; epoch <= plan.epochs; ++epoch) {
    // Fisher-Yates on the dedicated shuffle stream.
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0.0;
    std::size_t position_sum = 0;
    for (std::size_t idx : order) {
      const SequenceRecord& rec = dataset.train[idx];
      model.zero_grads();
      TaskLogits logits = model.forward_dense(encode_features(rec), Mode::Train, rng);
      LossResult res = nll_loss(logits, labels_for(model.config().tasks, rec), selected);
      model.backward_dense(res.grad_logits);
      sgd_step(groups, state);
      loss_sum += res.loss;
      position_sum += res.positions;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = position_sum ? loss_sum / static_cast<double>(position_sum) : 0.0;
    if (!dataset.validation.empty()) {
      std::vector<ConfusionMatrix> cms = evaluate_records(model, dataset.validation);
      for (const ConfusionMatrix& cm : cms)
        record.val_qc.emplace_back(cm.scheme.name, qc_accuracy(cm));
    }
    log.epochs.push_back(std::move(record));
  }
  return log;
}

std::string TrainLog::to_text() const {
  std::ostringstream out;
  char buf[64];
  for (const EpochRecord& e : epochs) {
    out << "epoch=" << e.epoch;
    std::snprintf(buf, sizeof buf, "%.17g", e.mean_loss);
    out << " mean_loss=" << buf;
    for (const auto& [task, qc] : e.val_qc) {
      std::snprintf(buf, sizeof buf, "%.17g", qc);
      out << " qc_" << task << "=" << buf;
    }
    out << "\n";
  }
  return out.str();
}

Model finetune(const Model& model, const DatasetSplit& dataset, const std::string& task_name,
               const TrainPlan& plan, Rng& rng) {
  Model tuned = model;
  tuned.task_index(task_name);  // config-error on unknown task
  if (plan.epochs == 0) return tuned;

  DatasetSplit ds = dataset;
  if (plan.include_validation_in_finetune)
    ds.train.insert(ds.train.end(), dataset.validation.begin(), dataset.validation.end());

  TrainPlan tuned_plan = plan;
  tuned_plan.task = task_name;
  OptimState state = OptimState::make(tuned, plan.learning_rate / 10.0, plan.momentum);
  train_multitask(tuned, ds, tuned_plan, state, rng);
  return tuned;
}

namespace {

struct CheckInstance {
  EncodedSeq seq;
  std::vector<std::vector<int>> labels;
};

CheckInstance random_instance(const std::vector<TaskScheme>& tasks, Rng& rng) {
  CheckInstance inst;
  std::size_t t_len = 6 + rng.below(7);
  inst.seq.indices.resize(t_len);
  for (std::size_t t = 0; t < t_len; ++t) inst.seq.indices[t] = rng.below(kAminoVocab);
  inst.seq.pssm = rng_uniform(rng, -1.0, 1.0, {t_len, kPssmWidth});
  for (const TaskScheme& task : tasks) {
    std::vector<int> lab(t_len);
    for (std::size_t t = 0; t < t_len; ++t)
      lab[t] = rng.below(8) == 0 ? -1 : static_cast<int>(rng.below(task.class_count()));
    inst.labels.push_back(std::move(lab));
  }
  return inst;
}

double loss_at(Model& model, const CheckInstance& inst) {
  Rng unused(0);  // dropout is forced to 0 in grad-check configs
  TaskLogits logits = model.forward_dense(inst.seq, Mode::Train, unused);
  return nll_loss(logits, inst.labels).loss;
}

}  // namespace

GradCheckReport grad_check(const std::function<Model(Rng&)>& factory, double tolerance, Rng& rng,
                           const GradCheckFault& fault) {
  constexpr double kStep = 1e-3;
  constexpr double kKinkMargin = 1e-2;

  Model model = factory(rng);
  if (model.config().dropout != 0.0 || model.config().input_dropout != 0.0)
    throw ConfigError("grad_check requires dropout 0 in both slots");

  // Resample whole instances (fresh parameters AND data) that evaluate too
  // close to a relu/prelu kink or a pooling tie; a 1e-3 parameter nudge must
  // not flip any max or sign. Parameters must be redrawn too: padding-region
  // pre-activations equal the conv bias exactly, so a small bias cannot be
  // escaped by redrawing data alone. The margin only counts loss-relevant
  // activations, so it is computed after a backward pass.
  CheckInstance inst = random_instance(model.config().tasks, rng);
  CheckInstance best_inst = inst;
  Model best_model = model;
  double best_margin = -1.0;
  for (int attempt = 0; attempt < 64; ++attempt) {
    model.zero_grads();
    Rng unused(0);
    TaskLogits logits = model.forward_dense(inst.seq, Mode::Train, unused);
    model.backward_dense(nll_loss(logits, inst.labels).grad_logits);
    if (model.min_kink_margin() > best_margin) {
      best_margin = model.min_kink_margin();
      best_inst = inst;
      best_model = model;
    }
    if (model.min_kink_margin() >= kKinkMargin) break;
    inst = random_instance(model.config().tasks, rng);
    model = factory(rng);
  }
  inst = best_inst;
  model = best_model;

  model.zero_grads();
  {
    Rng unused(0);
    TaskLogits logits = model.forward_dense(inst.seq, Mode::Train, unused);
    LossResult res = nll_loss(logits, inst.labels);
    model.backward_dense(res.grad_logits);
  }

  std::vector<ParamGroup> groups = model.param_groups();
  std::vector<Tensor> analytic;
  analytic.reserve(groups.size());
  for (const ParamGroup& g : groups) analytic.push_back(*g.grad);
  if (fault.flip_conv_grad_w)
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (groups[g].name == "block1.conv.W")
        for (std::size_t i = 0; i < analytic[g].size(); ++i) analytic[g][i] = -analytic[g][i];

  GradCheckReport report;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Tensor& theta = *groups[g].value;
    double num = 0.0, den = 1e-12;
    for (std::size_t i = 0; i < theta.size(); ++i) {
      double saved = theta[i];
      theta[i] = saved + kStep;
      double f_plus = loss_at(model, inst);
      theta[i] = saved - kStep;
      double f_minus = loss_at(model, inst);
      theta[i] = saved;
      double fd = (f_plus - f_minus) / (2.0 * kStep);
      num = std::max(num, std::fabs(fd - analytic[g][i]));
      den = std::max({den, std::fabs(fd), std::fabs(analytic[g][i])});
    }
    report.groups.push_back({groups[g].name, num / den});
    report.worst = std::max(report.worst, num / den);
  }
  (void)tolerance;
  return report;
}

}  // namespace stitchnet
