// Acceptance suite: prints exactly one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails. argv[1] is the path to the CLI
// binary (used for the end-to-end determinism criterion).

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "stitchnet/check.hpp"
#include "stitchnet/data.hpp"
#include "stitchnet/eval.hpp"
#include "stitchnet/model.hpp"
#include "stitchnet/train.hpp"

using namespace stitchnet;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(clk::time_point t0) {
  return std::chrono::duration<double>(clk::now() - t0).count();
}

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

ModelConfig small_synth_config() {
  ModelConfig mc;
  mc.conv_layers = 2;
  mc.hidden_units = 32;
  mc.kernel_size = 5;
  mc.pool_size = 2;
  mc.input_dropout = 0.0;
  mc.dropout = 0.0;
  mc.nonlinearity = NonlinKind::Relu;
  mc.embed_dim = 15;
  mc.tasks = {task_scheme("dssp"), task_scheme("ssp"), task_scheme("sar"), task_scheme("saa")};
  return mc;
}

// ---------------------------------------------------------------------------

void criterion1_stitch_equivalence() {
  auto t0 = clk::now();
  try {
    Rng rng(11);
    StitchCheckReport rep = run_stitch_equivalence(200, rng);
    bool ok = rep.configs >= 200 && rep.passed(1e-12, 1e-6);
    report(1, ok,
           fmt("stitch equivalence over %zu configs: max loop deviation %.3e (tol 1e-12), "
               "max dilated deviation %.3e (tol 1e-6), %.1fs",
               rep.configs, rep.max_loop_deviation, rep.max_dilated_deviation,
               seconds_since(t0)));
  } catch (const std::exception& e) {
    report(1, false, fmt("stitch equivalence threw: %s", e.what()));
  }
}

void criterion2_gradients() {
  auto t0 = clk::now();
  try {
    auto factory = [](Rng& r) {
      ModelConfig mc;
      mc.conv_layers = 2;
      mc.hidden_units = 5;
      mc.kernel_size = 3;
      mc.pool_size = 2;
      mc.input_dropout = 0.0;
      mc.dropout = 0.0;
      mc.nonlinearity = NonlinKind::Prelu;  // exercises the alpha group too
      mc.embed_dim = 3;
      mc.tasks = {task_scheme("dssp"), task_scheme("sar")};
      return Model::build(mc, r);
    };
    Rng rng(23);
    GradCheckReport rep = grad_check(factory, 1e-4, rng);
    bool has_alpha = false, has_lookup = false;
    for (const auto& g : rep.groups) {
      if (g.name.find("prelu.alpha") != std::string::npos) has_alpha = true;
      if (g.name == "lookup.table") has_lookup = true;
    }
    GradCheckFault fault;
    fault.flip_conv_grad_w = true;
    GradCheckReport mutated = grad_check(factory, 1e-4, rng, fault);
    bool mutation_caught = !mutated.passed(1e-4);
    bool ok = rep.passed(1e-4) && has_alpha && has_lookup && mutation_caught;
    report(2, ok,
           fmt("gradient check over %zu parameter groups: worst rel err %.3e (tol 1e-4), "
               "alpha group %s, lookup group %s, mutation detected %s, %.1fs",
               rep.groups.size(), rep.worst, has_alpha ? "present" : "MISSING",
               has_lookup ? "present" : "MISSING", mutation_caught ? "yes" : "NO",
               seconds_since(t0)));
  } catch (const std::exception& e) {
    report(2, false, fmt("gradient check threw: %s", e.what()));
  }
}

void criterion3_learnability() {
  auto t0 = clk::now();
  try {
    Rng gen(301);
    std::vector<SequenceRecord> train = synth_generate(gen, 2000, 20, 60);
    std::vector<SequenceRecord> test = synth_generate(gen, 500, 20, 60);
    DatasetSplit split;
    split.train = train;  // validation left empty: Q8 measured directly below

    Rng rng(302);
    Model model = Model::build(small_synth_config(), rng);
    TrainPlan plan;
    plan.epochs = 1;
    plan.task = "dssp";
    plan.learning_rate = 0.0005;
    plan.momentum = 0.9;
    OptimState state = OptimState::make(model, plan.learning_rate, plan.momentum);

    double train_q8 = 0.0, test_q8 = 0.0;
    std::size_t epochs_used = 0;
    for (std::size_t e = 1; e <= 30; ++e) {
      plan.shuffle_seed = 1000 + e;
      train_multitask(model, split, plan, state, rng);
      epochs_used = e;
      test_q8 = qc_over_records(model, test, "dssp");
      if (test_q8 < 0.95) continue;
      train_q8 = qc_over_records(model, train, "dssp");
      if (train_q8 >= 0.99) break;
    }
    if (train_q8 == 0.0) train_q8 = qc_over_records(model, train, "dssp");
    bool ok = train_q8 >= 0.99 && test_q8 >= 0.95 && epochs_used <= 30;
    report(3, ok,
           fmt("learnability on 2000/500 synthetic corpus: train Q8 %.4f (need >= 0.99), "
               "test Q8 %.4f (need >= 0.95) after %zu epochs (cap 30), %.1fs",
               train_q8, test_q8, epochs_used, seconds_since(t0)));
  } catch (const std::exception& e) {
    report(3, false, fmt("learnability run threw: %s", e.what()));
  }
}

void criterion4_finetune() {
  auto t0 = clk::now();
  try {
    Rng gen(401);
    DatasetSplit split;
    split.train = synth_generate(gen, 600, 20, 60);
    split.validation = synth_generate(gen, 200, 20, 60);

    Rng rng(402);
    Model joint = Model::build(small_synth_config(), rng);
    TrainPlan plan;
    plan.epochs = 10;
    plan.shuffle_seed = 403;
    plan.learning_rate = 0.0005;
    plan.momentum = 0.9;
    OptimState state = OptimState::make(joint, plan.learning_rate, plan.momentum);
    train_multitask(joint, split, plan, state, rng);

    bool ok = true;
    std::string detail = "joint + per-task finetune at lr/10:";
    for (const char* task : {"dssp", "ssp", "sar", "saa"}) {
      double before = qc_over_records(joint, split.validation, task);
      TrainPlan fp = plan;
      fp.epochs = 3;
      fp.shuffle_seed = 404;
      Rng frng(405);
      Model tuned = finetune(joint, split, task, fp, frng);
      double after = qc_over_records(tuned, split.validation, task);
      bool task_ok = after >= before - 0.005;
      ok = ok && task_ok;
      detail += fmt(" %s %.4f->%.4f%s", task, before, after, task_ok ? "" : " (DEGRADED)");
    }
    detail += fmt(", %.1fs", seconds_since(t0));
    report(4, ok, detail);
  } catch (const std::exception& e) {
    report(4, false, fmt("finetune run threw: %s", e.what()));
  }
}

void criterion5_identities() {
  try {
    // Softmax rows sum to 1 within 1e-9, including extreme logits.
    Rng rng(501);
    double worst_sum_dev = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
      std::size_t rows = 1 + rng.below(8), cols = 2 + rng.below(9);
      Tensor logits = rng_uniform(rng, -50.0, 50.0, {rows, cols});
      if (trial == 0) logits[0] = 700.0;  // would overflow a naive exp
      Tensor p = softmax_rows(logits);
      for (std::size_t r = 0; r < rows; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += p.at(r, c);
        worst_sum_dev = std::max(worst_sum_dev, std::abs(s - 1.0));
      }
    }
    bool softmax_ok = worst_sum_dev <= 1e-9;

    // Untrained single-task loss within 5% of ln(8); untrained Q8 near 1/8
    // over >= 50k synthetic positions.
    Rng gen(502);
    std::vector<SequenceRecord> recs = synth_generate(gen, 1300, 20, 60);
    std::size_t positions = 0;
    for (const auto& r : recs) positions += r.length();
    Rng mrng(503);
    ModelConfig mc = small_synth_config();
    mc.tasks = {task_scheme("dssp")};
    Model model = Model::build(mc, mrng);
    double loss_sum = 0.0;
    std::size_t loss_pos = 0;
    for (std::size_t i = 0; i < 50; ++i) {
      TaskLogits logits = model.forward_dense(encode_features(recs[i]), Mode::Eval, mrng);
      LossResult lr = nll_loss(logits, {encode_labels(task_scheme("dssp"),
                                                      recs[i].labels.at("dssp"))});
      loss_sum += lr.loss;
      loss_pos += lr.positions;
    }
    double mean_loss = loss_sum / double(loss_pos);
    double ln8 = std::log(8.0);
    bool loss_ok = std::abs(mean_loss - ln8) <= 0.05 * ln8;
    double q8 = qc_over_records(model, recs, "dssp");
    bool q8_ok = positions >= 50000 && std::abs(q8 - 0.125) <= 0.03;

    // qc == sum(frequency * recall) on random confusion matrices.
    double worst_qc_dev = 0.0;
    Rng crng(504);
    for (int trial = 0; trial < 30; ++trial) {
      ConfusionMatrix cm(task_scheme(trial % 2 ? "dssp" : "ssp"));
      std::size_t C = cm.scheme.class_count();
      for (std::size_t g = 0; g < C; ++g)
        for (std::size_t p = 0; p < C; ++p) cm.at(g, p) = crng.below(40);
      cm.at(0, 0) += 1;  // never empty
      std::size_t total = 0;
      for (std::size_t v : cm.counts) total += v;
      cm.total = total;
      double qc = qc_accuracy(cm);
      double sum = 0.0;
      for (const ClassMetrics& m : prf1(cm)) sum += m.frequency * m.recall;
      worst_qc_dev = std::max(worst_qc_dev, std::abs(qc - sum));
    }
    bool qc_ok = worst_qc_dev <= 1e-12;

    bool ok = softmax_ok && loss_ok && q8_ok && qc_ok;
    report(5, ok,
           fmt("numeric identities: softmax row-sum dev %.2e (tol 1e-9), untrained loss "
               "%.4f vs ln8=%.4f (tol 5%%), untrained Q8 %.4f over %zu positions "
               "(need 0.125 +/- 0.03), qc-vs-freq*recall dev %.2e",
               worst_sum_dev, mean_loss, ln8, q8, positions, worst_qc_dev));
  } catch (const std::exception& e) {
    report(5, false, fmt("numeric identity checks threw: %s", e.what()));
  }
}

int run_cli(const std::string& cli, const std::string& args, const std::string& log) {
  std::string cmd = cli + " " + args + " >" + log + " 2>&1";
  int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion6_determinism(const std::string& cli) {
  auto t0 = clk::now();
  try {
    if (cli.empty()) {
      report(6, false, "determinism: no CLI path supplied as argv[1]");
      return;
    }
    fs::path dir = fs::path("acceptance_scratch") / std::to_string(::getpid());
    fs::create_directories(dir);
    auto p = [&](const char* n) { return (dir / n).string(); };

    std::ofstream cfg(p("run.cfg"));
    cfg << "conv_layers = 2\nhidden_units = 16\nkernel_size = 5\npool_size = 2\n"
        << "input_dropout = 0.1\nembed_dim = 8\nepochs = 3\nlearning_rate = 0.02\n"
        << "dataset = " << p("data.txt") << "\nsynth_sequences = 100\n"
        << "synth_len_lo = 20\nsynth_len_hi = 60\n";
    cfg.close();

    bool ok = run_cli(cli, "synth --config " + p("run.cfg") + " --seed 9 --out " + p("data.txt"),
                      p("synth.log")) == 0;
    ok = ok && run_cli(cli, "train --config " + p("run.cfg") + " --seed 9 --out " + p("a.ckpt"),
                       p("a.log")) == 0;
    ok = ok && run_cli(cli, "train --config " + p("run.cfg") + " --seed 9 --out " + p("b.ckpt"),
                       p("b.log")) == 0;
    bool ckpt_same = ok && slurp(p("a.ckpt")) == slurp(p("b.ckpt")) &&
                     !slurp(p("a.ckpt")).empty();
    bool log_same = ok && slurp(p("a.ckpt") + ".log") == slurp(p("b.ckpt") + ".log") &&
                    !slurp(p("a.ckpt") + ".log").empty();
    fs::remove_all(dir.parent_path());
    report(6, ok && ckpt_same && log_same,
           fmt("determinism: two seeded CLI train runs, checkpoints byte-identical %s, "
               "logs byte-identical %s, %.1fs",
               ckpt_same ? "yes" : "NO", log_same ? "yes" : "NO", seconds_since(t0)));
  } catch (const std::exception& e) {
    report(6, false, fmt("determinism run threw: %s", e.what()));
  }
}

void criterion7_throughput() {
  auto t0 = clk::now();
  try {
    // Reference architecture: 3 conv layers, 189 hidden units, kernel 9,
    // pool 2 -- the small model the defaults mirror.
    ModelConfig mc;
    mc.tasks = {task_scheme("dssp"), task_scheme("ssp"), task_scheme("sar"),
                task_scheme("saa")};
    Rng rng(701);
    Model model = Model::build(mc, rng);

    Rng gen(702);
    std::vector<SequenceRecord> recs;
    std::size_t positions = 0;
    // Protein-chain-like lengths; short toy sequences would mostly measure
    // the fixed per-copy stitch padding instead of the conv stack.
    while (positions < 1000000) {
      std::vector<SequenceRecord> batch = synth_generate(gen, 200, 300, 500);
      for (auto& r : batch) {
        positions += r.length();
        recs.push_back(std::move(r));
        if (positions >= 1000000) break;
      }
    }
    ThroughputReport rep = measure_throughput(model, recs, 1, Precision::F32);
    double implied = rep.wall_time * 1e9 / double(rep.positions_evaluated);
    bool unit_ok = std::abs(rep.ms_per_million - implied) <= 1e-6 * std::max(1.0, implied);
    bool time_ok = rep.wall_time <= 60.0;
    report(7, unit_ok && time_ok,
           fmt("throughput: %zu positions in %.1fs single-threaded (budget 60s), "
               "%.0f ms per million positions, unit identity %s, %.1fs total",
               rep.positions_evaluated, rep.wall_time, rep.ms_per_million,
               unit_ok ? "holds" : "BROKEN", seconds_since(t0)));
  } catch (const std::exception& e) {
    report(7, false, fmt("throughput run threw: %s", e.what()));
  }
}

void criterion8_roundtrips() {
  try {
    Rng gen(801);
    std::vector<SequenceRecord> recs = synth_generate(gen, 20, 10, 40);

    // Dataset canonical-byte round-trip.
    std::ostringstream first;
    write_dataset(first, recs);
    std::istringstream back(first.str());
    std::vector<SequenceRecord> reparsed = parse_dataset(back);
    std::ostringstream second;
    write_dataset(second, reparsed);
    bool data_ok = reparsed.size() == recs.size() && first.str() == second.str();

    // Checkpoint byte round-trip.
    ModelConfig mc = small_synth_config();
    mc.nonlinearity = NonlinKind::Prelu;
    Rng mrng(802);
    Model model = Model::build(mc, mrng);
    fs::path dir = fs::path("acceptance_scratch") / (std::to_string(::getpid()) + "_ckpt");
    fs::create_directories(dir);
    std::string c1 = (dir / "m1.ckpt").string(), c2 = (dir / "m2.ckpt").string();
    checkpoint_save(model, c1);
    Model loaded = checkpoint_load(c1);
    checkpoint_save(loaded, c2);
    bool ckpt_ok = slurp(c1) == slurp(c2) && !slurp(c1).empty();
    fs::remove_all(dir.parent_path());

    // Predictions re-parse through the dataset reader.
    Rng prng(803);
    bool pred_ok = true;
    std::vector<SequenceRecord> preds = recs;
    for (SequenceRecord& r : preds) {
      TaskLogits logits = loaded.forward_dense(encode_features(r), Mode::Eval, prng);
      std::vector<std::string> labels = predict_labels(logits, loaded.config().tasks);
      r.labels.clear();
      for (std::size_t tau = 0; tau < labels.size(); ++tau)
        r.labels[loaded.config().tasks[tau].name] = labels[tau];
    }
    std::ostringstream pred_out;
    write_dataset(pred_out, preds);
    std::istringstream pred_in(pred_out.str());
    std::vector<SequenceRecord> pred_back = parse_dataset(pred_in);
    pred_ok = pred_back.size() == preds.size();
    for (std::size_t i = 0; pred_ok && i < preds.size(); ++i)
      pred_ok = pred_back[i].labels.at("dssp") == preds[i].labels.at("dssp") &&
                pred_back[i].labels.at("dssp").size() == preds[i].length();

    bool ok = data_ok && ckpt_ok && pred_ok;
    report(8, ok,
           fmt("format round-trips: dataset bytes %s, checkpoint bytes %s, "
               "predictions re-parse %s",
               data_ok ? "stable" : "UNSTABLE", ckpt_ok ? "stable" : "UNSTABLE",
               pred_ok ? "ok" : "BROKEN"));
  } catch (const std::exception& e) {
    report(8, false, fmt("round-trip checks threw: %s", e.what()));
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli = argc > 1 ? argv[1] : "";
  criterion1_stitch_equivalence();
  criterion2_gradients();
  criterion3_learnability();
  criterion4_finetune();
  criterion5_identities();
  criterion6_determinism(cli);
  criterion7_throughput();
  criterion8_roundtrips();
  if (g_failures > 0) {
    std::printf("acceptance: %d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all 8 criteria passed\n");
  return 0;
}
