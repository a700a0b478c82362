#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "stitchnet/data.hpp"
#include "stitchnet/model.hpp"

namespace stitchnet {

/// counts[gold][pred] over non-missing positions of one task.
struct ConfusionMatrix {
  TaskScheme scheme;
  std::vector<std::size_t> counts;  // C*C row-major
  std::size_t total = 0;

  explicit ConfusionMatrix(const TaskScheme& s)
      : scheme(s), counts(s.class_count() * s.class_count(), 0) {}

  std::size_t& at(std::size_t gold, std::size_t pred) {
    return counts[gold * scheme.class_count() + pred];
  }
  std::size_t at(std::size_t gold, std::size_t pred) const {
    return counts[gold * scheme.class_count() + pred];
  }
  void merge(const ConfusionMatrix& other);
};

void confusion_accumulate(ConfusionMatrix& cm, const std::string& gold, const std::string& pred);

/// trace / total. Throws metric-error on an empty matrix.
double qc_accuracy(const ConfusionMatrix& cm);

struct ClassMetrics {
  char label;
  double precision, recall, f1, frequency;
};

/// Per-class precision/recall/F1/frequency; 0/0 cells report 0.
std::vector<ClassMetrics> prf1(const ConfusionMatrix& cm);

struct ThroughputReport {
  std::size_t positions_evaluated = 0;
  double wall_time = 0.0;      // seconds, forward passes only
  double ms_per_million = 0.0;  // wall_time * 1e9 / positions
};

/// Eval-mode forward over every record, all tasks at once; wall time covers
/// only the forward loop. Records are sharded across `workers` threads, each
/// on its own copy of the frozen model.
ThroughputReport measure_throughput(const Model& model, const std::vector<SequenceRecord>& records,
                                    std::size_t workers, Precision precision = Precision::F64);

/// One confusion matrix per model task, accumulated over the records.
std::vector<ConfusionMatrix> evaluate_records(Model& model,
                                              const std::vector<SequenceRecord>& records);

/// Q_c of one task over the records (convenience wrapper).
double qc_over_records(Model& model, const std::vector<SequenceRecord>& records,
                       const std::string& task_name);

/// Aligned table plus a machine-readable key-value block.
std::string format_metrics_report(const std::vector<ConfusionMatrix>& cms);
std::string format_throughput_report(const ThroughputReport& report);

}  // namespace stitchnet
