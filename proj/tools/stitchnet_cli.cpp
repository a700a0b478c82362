// stitchnet command-line front end: train / finetune / predict / eval /
// check / bench / synth over the flat key=value config format.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stitchnet/cli_ops.hpp"
#include "stitchnet/kernels.hpp"

using namespace stitchnet;

int main(int argc, char** argv) {
  CLI::App app{"MUST-CNN style sequence labeling engine"};
  app.require_subcommand(1);

  std::string config_path, task, checkpoint, out;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  bool have_seed = false, have_workers = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file");
    sub->add_option("--seed", seed, "RNG seed")->each([&](const std::string&) { have_seed = true; });
    sub->add_option("--task", task, "task name (finetune)");
    sub->add_option("--checkpoint", checkpoint, "input checkpoint path");
    sub->add_option("--out", out, "output path");
    sub->add_option("--workers", workers, "worker threads for eval/bench")->each([&](const std::string&) {
      have_workers = true;
    });
    return sub;
  };

  CLI::App* train = add_common(app.add_subcommand("train", "joint multitask training"));
  CLI::App* finetune = add_common(app.add_subcommand("finetune", "single-task fine-tuning"));
  CLI::App* predict = add_common(app.add_subcommand("predict", "per-position label prediction"));
  CLI::App* eval = add_common(app.add_subcommand("eval", "metrics report"));
  CLI::App* check = add_common(app.add_subcommand("check", "gradient and stitch verification"));
  CLI::App* bench = add_common(app.add_subcommand("bench", "inference throughput"));
  CLI::App* synth = add_common(app.add_subcommand("synth", "synthetic dataset generator"));

  CLI11_PARSE(app, argc, argv);

  try {
    kernels::pin_blas_single_thread();
    RunConfig cfg;
    if (!config_path.empty()) run_config_load(cfg, config_path);
    if (have_seed) cfg.seed = seed;
    if (!task.empty()) cfg.task = task;
    if (!checkpoint.empty()) cfg.checkpoint = checkpoint;
    if (!out.empty()) cfg.out = out;
    if (have_workers) cfg.workers = workers;

    if (train->parsed()) return cmd_train(cfg);
    if (finetune->parsed()) return cmd_finetune(cfg);
    if (predict->parsed()) return cmd_predict(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (bench->parsed()) return cmd_bench(cfg);
    if (synth->parsed()) return cmd_synth(cfg);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal-error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
