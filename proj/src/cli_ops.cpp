#include "stitchnet/cli_ops.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stitchnet/check.hpp"
#include "stitchnet/eval.hpp"

namespace stitchnet {

RunConfig::RunConfig() {
  model.tasks = {task_scheme("dssp"), task_scheme("ssp"), task_scheme("sar"),
                 task_scheme("saa")};
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs an unsigned integer, got '" + value + "'");
  }
}

double parse_f64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' needs a number, got '" + value + "'");
  }
}

}  // namespace

void run_config_apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "conv_layers") cfg.model.conv_layers = parse_u64(key, value);
  else if (key == "hidden_units") cfg.model.hidden_units = parse_u64(key, value);
  else if (key == "kernel_size") cfg.model.kernel_size = parse_u64(key, value);
  else if (key == "pool_size") cfg.model.pool_size = parse_u64(key, value);
  else if (key == "input_dropout") cfg.model.input_dropout = parse_f64(key, value);
  else if (key == "dropout") cfg.model.dropout = parse_f64(key, value);
  else if (key == "nonlinearity") cfg.model.nonlinearity = nonlin_from_string(value);
  else if (key == "embed_dim") cfg.model.embed_dim = parse_u64(key, value);
  else if (key == "tasks") {
    cfg.model.tasks.clear();
    std::istringstream ts(value);
    std::string name;
    while (std::getline(ts, name, ',')) cfg.model.tasks.push_back(task_scheme(trim(name)));
  } else if (key == "epochs") cfg.plan.epochs = parse_u64(key, value);
  else if (key == "shuffle_seed") cfg.plan.shuffle_seed = parse_u64(key, value);
  else if (key == "learning_rate") cfg.plan.learning_rate = parse_f64(key, value);
  else if (key == "momentum") cfg.plan.momentum = parse_f64(key, value);
  else if (key == "include_validation_in_finetune")
    cfg.plan.include_validation_in_finetune = value == "true" || value == "1";
  else if (key == "split") {
    std::istringstream ss(value);
    std::string part;
    std::size_t i = 0;
    while (std::getline(ss, part, ',') && i < 3) cfg.split[i++] = parse_f64(key, trim(part));
    if (i != 3) throw ConfigError("key 'split' needs three comma-separated fractions");
  } else if (key == "dataset") cfg.dataset = value;
  else if (key == "checkpoint") cfg.checkpoint = value;
  else if (key == "out") cfg.out = value;
  else if (key == "task") cfg.task = value;
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "workers") cfg.workers = parse_u64(key, value);
  else if (key == "synth_sequences") cfg.synth_sequences = parse_u64(key, value);
  else if (key == "synth_len_lo") cfg.synth_len_lo = parse_u64(key, value);
  else if (key == "synth_len_hi") cfg.synth_len_hi = parse_u64(key, value);
  else throw ConfigError("unknown config key '" + key + "'");
}

void run_config_load(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not 'key = value'");
    run_config_apply(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

namespace {

std::vector<SequenceRecord> load_records(const std::string& path) {
  if (path.empty()) throw ConfigError("no dataset path given (use --config or key 'dataset')");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path + "'");
  return parse_dataset(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
}

}  // namespace

int cmd_train(const RunConfig& cfg) {
  DatasetSplit split = split_dataset(load_records(cfg.dataset), cfg.split, cfg.seed);
  Rng rng(cfg.seed);
  Model model = Model::build(cfg.model, rng);
  OptimState state = OptimState::make(model, cfg.plan.learning_rate, cfg.plan.momentum);
  TrainPlan plan = cfg.plan;
  plan.task.clear();
  if (plan.shuffle_seed == 0) plan.shuffle_seed = cfg.seed;
  TrainLog log = train_multitask(model, split, plan, state, rng);

  std::string ckpt = cfg.out.empty() ? "model.ckpt" : cfg.out;
  checkpoint_save(model, ckpt);
  write_text(ckpt + ".log", log.to_text());
  std::cout << log.to_text();
  std::cout << "checkpoint = " << ckpt << "\n";
  return 0;
}

int cmd_finetune(const RunConfig& cfg) {
  if (cfg.task.empty()) throw ConfigError("finetune needs --task");
  if (cfg.checkpoint.empty()) throw ConfigError("finetune needs --checkpoint");
  Model joint = checkpoint_load(cfg.checkpoint);
  DatasetSplit split = split_dataset(load_records(cfg.dataset), cfg.split, cfg.seed);
  TrainPlan plan = cfg.plan;
  if (plan.shuffle_seed == 0) plan.shuffle_seed = cfg.seed;
  Rng rng(cfg.seed);
  std::cout << "finetune task = " << cfg.task << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", plan.learning_rate / 10.0);
  std::cout << "finetune learning_rate = " << buf << "\n";
  Model tuned = finetune(joint, split, cfg.task, plan, rng);
  std::string ckpt = cfg.out.empty() ? "model." + cfg.task + ".ckpt" : cfg.out;
  checkpoint_save(tuned, ckpt);
  std::cout << "checkpoint = " << ckpt << "\n";
  return 0;
}

int cmd_predict(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw ConfigError("predict needs --checkpoint");
  Model model = checkpoint_load(cfg.checkpoint);
  std::vector<SequenceRecord> records = load_records(cfg.dataset);
  Rng rng(0);
  for (SequenceRecord& rec : records) {
    TaskLogits logits = model.forward_dense(encode_features(rec), Mode::Eval, rng);
    std::vector<std::string> preds = predict_labels(logits, model.config().tasks);
    rec.labels.clear();
    for (std::size_t tau = 0; tau < preds.size(); ++tau)
      rec.labels[model.config().tasks[tau].name] = preds[tau];
  }
  std::string path = cfg.out.empty() ? "predictions.txt" : cfg.out;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_dataset(out, records);
  std::cout << "predictions = " << path << "\n";
  return 0;
}

int cmd_eval(const RunConfig& cfg) {
  if (cfg.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  Model model = checkpoint_load(cfg.checkpoint);
  std::vector<ConfusionMatrix> cms = evaluate_records(model, load_records(cfg.dataset));
  std::string report = format_metrics_report(cms);
  std::cout << report;
  if (!cfg.out.empty()) write_text(cfg.out, report);
  return 0;
}

int cmd_check(const RunConfig& cfg) {
  Rng rng(cfg.seed);
  StitchCheckReport stitch = run_stitch_equivalence(200, rng);
  std::cout << stitch.to_text();
  bool ok = stitch.passed();

  auto tiny_factory = [](Rng& r) {
    ModelConfig mc;
    mc.conv_layers = 2;
    mc.hidden_units = 5;
    mc.kernel_size = 3;
    mc.pool_size = 2;
    mc.input_dropout = 0.0;
    mc.dropout = 0.0;
    mc.nonlinearity = NonlinKind::Prelu;
    mc.embed_dim = 3;
    mc.tasks = {task_scheme("dssp"), task_scheme("sar")};
    return Model::build(mc, r);
  };
  GradCheckReport grads = grad_check(tiny_factory, 1e-4, rng);
  for (const auto& g : grads.groups)
    std::cout << "grad " << g.name << " rel_err = " << g.rel_err << "\n";
  ok = ok && grads.passed(1e-4);

  GradCheckFault fault;
  fault.flip_conv_grad_w = true;
  GradCheckReport mutated = grad_check(tiny_factory, 1e-4, rng, fault);
  bool mutation_caught = !mutated.passed(1e-4);
  std::cout << "mutation_detected = " << (mutation_caught ? "true" : "false") << "\n";
  ok = ok && mutation_caught;

  std::cout << "check = " << (ok ? "pass" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

int cmd_bench(const RunConfig& cfg) {
  std::vector<SequenceRecord> records = load_records(cfg.dataset);
  Rng rng(cfg.seed);
  Model model = cfg.checkpoint.empty() ? Model::build(cfg.model, rng)
                                       : checkpoint_load(cfg.checkpoint);
  ThroughputReport rep = measure_throughput(model, records, cfg.workers, Precision::F32);
  std::string text = format_throughput_report(rep);
  std::cout << text;
  if (!cfg.out.empty()) write_text(cfg.out, text);
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  Rng rng(cfg.seed);
  std::vector<SequenceRecord> records =
      synth_generate(rng, cfg.synth_sequences, cfg.synth_len_lo, cfg.synth_len_hi);
  std::string path = cfg.out.empty() ? "synth.txt" : cfg.out;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_dataset(out, records);
  std::cout << "dataset = " << path << " sequences = " << records.size() << "\n";
  return 0;
}

}  // namespace stitchnet
