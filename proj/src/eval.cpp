#include "stitchnet/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>
#include <thread>

namespace stitchnet {

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.scheme.name != scheme.name || other.counts.size() != counts.size())
    throw MetricError("cannot merge confusion matrices of different tasks");
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  total += other.total;
}

void confusion_accumulate(ConfusionMatrix& cm, const std::string& gold, const std::string& pred) {
  if (gold.size() != pred.size())
    throw DataError("gold/pred length mismatch: " + std::to_string(gold.size()) + " vs " +
                    std::to_string(pred.size()));
  for (std::size_t t = 0; t < gold.size(); ++t) {
    int g = cm.scheme.class_of(gold[t]);
    if (g < 0) continue;  // missing label, never counted
    int p = cm.scheme.class_of(pred[t]);
    if (p < 0)
      throw DataError(std::string("prediction character '") + pred[t] + "' outside task alphabet " +
                      cm.scheme.alphabet);
    ++cm.at(static_cast<std::size_t>(g), static_cast<std::size_t>(p));
    ++cm.total;
  }
}

double qc_accuracy(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw MetricError("Q_c undefined on an empty confusion matrix");
  std::size_t correct = 0;
  for (std::size_t c = 0; c < cm.scheme.class_count(); ++c) correct += cm.at(c, c);
  return static_cast<double>(correct) / static_cast<double>(cm.total);
}

std::vector<ClassMetrics> prf1(const ConfusionMatrix& cm) {
  if (cm.total == 0) throw MetricError("metrics undefined on an empty confusion matrix");
  std::size_t n = cm.scheme.class_count();
  std::vector<ClassMetrics> out(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t tp = cm.at(c, c), gold_c = 0, pred_c = 0;
    for (std::size_t i = 0; i < n; ++i) {
      gold_c += cm.at(c, i);
      pred_c += cm.at(i, c);
    }
    double p = pred_c ? static_cast<double>(tp) / pred_c : 0.0;
    double r = gold_c ? static_cast<double>(tp) / gold_c : 0.0;
    double f1 = (p + r > 0.0) ? 2.0 * p * r / (p + r) : 0.0;
    out[c] = {cm.scheme.alphabet[c], p, r, f1,
              static_cast<double>(gold_c) / static_cast<double>(cm.total)};
  }
  return out;
}

std::vector<ConfusionMatrix> evaluate_records(Model& model,
                                              const std::vector<SequenceRecord>& records) {
  std::vector<ConfusionMatrix> cms;
  for (const TaskScheme& t : model.config().tasks) cms.emplace_back(t);
  Rng rng(0);  // never consulted: eval mode skips dropout
  for (const SequenceRecord& rec : records) {
    TaskLogits logits = model.forward_dense(encode_features(rec), Mode::Eval, rng);
    std::vector<std::string> preds = predict_labels(logits, model.config().tasks);
    for (std::size_t tau = 0; tau < cms.size(); ++tau) {
      auto it = rec.labels.find(cms[tau].scheme.name);
      if (it == rec.labels.end()) continue;
      confusion_accumulate(cms[tau], it->second, preds[tau]);
    }
  }
  return cms;
}

double qc_over_records(Model& model, const std::vector<SequenceRecord>& records,
                       const std::string& task_name) {
  std::size_t tau = model.task_index(task_name);
  std::vector<ConfusionMatrix> cms = evaluate_records(model, records);
  return qc_accuracy(cms[tau]);
}

ThroughputReport measure_throughput(const Model& model, const std::vector<SequenceRecord>& records,
                                    std::size_t workers, Precision precision) {
  if (records.empty()) throw DataError("throughput measurement needs at least one record");
  if (workers == 0) workers = 1;
  workers = std::min(workers, records.size());

  // Feature encoding happens before the clock starts; only network forward
  // passes are timed.
  std::vector<EncodedSeq> encoded;
  encoded.reserve(records.size());
  std::size_t positions = 0;
  for (const SequenceRecord& rec : records) {
    encoded.push_back(encode_features(rec));
    positions += rec.length();
  }
  std::vector<Model> copies(workers, model);

  auto t0 = std::chrono::steady_clock::now();
  if (workers == 1) {
    Rng rng(0);
    for (const EncodedSeq& seq : encoded) copies[0].forward_dense(seq, Mode::Eval, rng, precision);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        Rng rng(0);
        for (std::size_t i = w; i < encoded.size(); i += workers)
          copies[w].forward_dense(encoded[i], Mode::Eval, rng, precision);
      });
    for (std::thread& th : pool) th.join();
  }
  auto t1 = std::chrono::steady_clock::now();

  ThroughputReport rep;
  rep.positions_evaluated = positions;
  rep.wall_time = std::chrono::duration<double>(t1 - t0).count();
  rep.ms_per_million = rep.wall_time * 1e9 / static_cast<double>(positions);
  return rep;
}

namespace {
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}
}  // namespace

std::string format_metrics_report(const std::vector<ConfusionMatrix>& cms) {
  std::ostringstream out;
  for (const ConfusionMatrix& cm : cms) {
    std::vector<ClassMetrics> rows = prf1(cm);
    out << "task " << cm.scheme.name << "  (Q" << cm.scheme.class_count()
        << " = " << fmt(qc_accuracy(cm)) << ", positions = " << cm.total << ")\n";
    out << "  class  precision  recall     f1         frequency\n";
    for (const ClassMetrics& r : rows) {
      char line[128];
      std::snprintf(line, sizeof line, "  %-5c  %-9.6f  %-9.6f  %-9.6f  %-9.6f\n", r.label,
                    r.precision, r.recall, r.f1, r.frequency);
      out << line;
    }
  }
  out << "\n";
  for (const ConfusionMatrix& cm : cms) {
    out << "task = " << cm.scheme.name << "\n";
    out << "qc = " << fmt(qc_accuracy(cm)) << "\n";
    for (const ClassMetrics& r : prf1(cm))
      out << "class = " << r.label << " precision = " << fmt(r.precision)
          << " recall = " << fmt(r.recall) << " f1 = " << fmt(r.f1)
          << " frequency = " << fmt(r.frequency) << "\n";
  }
  return out.str();
}

std::string format_throughput_report(const ThroughputReport& report) {
  std::ostringstream out;
  out << "positions_evaluated = " << report.positions_evaluated << "\n";
  out << "wall_time = " << fmt(report.wall_time) << "\n";
  out << "ms_per_million = " << fmt(report.ms_per_million) << "\n";
  return out.str();
}

}  // namespace stitchnet
