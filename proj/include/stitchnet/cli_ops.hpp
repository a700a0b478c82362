#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "stitchnet/model.hpp"
#include "stitchnet/train.hpp"

namespace stitchnet {

/// Everything a subcommand needs, merged from the config file and flags.
/// Config files are flat "key = value" lines with '#' comments; unknown keys
/// are errors.
struct RunConfig {
  ModelConfig model;
  TrainPlan plan;
  std::array<double, 3> split = {0.6, 0.2, 0.2};
  std::string dataset;
  std::string checkpoint;  // input checkpoint (--checkpoint)
  std::string out;         // output path (--out); meaning depends on subcommand
  std::string task;        // --task
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t synth_sequences = 2000;
  std::size_t synth_len_lo = 20;
  std::size_t synth_len_hi = 60;

  RunConfig();  // defaults: Table-2 small model, all four builtin tasks
};

/// Applies one key; throws config-error on unknown keys or bad values.
void run_config_apply(RunConfig& cfg, const std::string& key, const std::string& value);

/// Loads a config file on top of cfg.
void run_config_load(RunConfig& cfg, const std::string& path);

// Subcommand bodies. All throw module errors; the binary maps those to
// nonzero exits with the error-class prefix on one line.
int cmd_train(const RunConfig& cfg);
int cmd_finetune(const RunConfig& cfg);
int cmd_predict(const RunConfig& cfg);
int cmd_eval(const RunConfig& cfg);
int cmd_check(const RunConfig& cfg);
int cmd_bench(const RunConfig& cfg);
int cmd_synth(const RunConfig& cfg);

}  // namespace stitchnet
