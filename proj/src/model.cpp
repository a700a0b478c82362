#include "stitchnet/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace stitchnet {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

void ModelConfig::validate() const {
  std::vector<std::string> bad;
  if (conv_layers < 1) bad.push_back("conv_layers (must be >= 1)");
  if (hidden_units < 1) bad.push_back("hidden_units (must be >= 1)");
  if (kernel_size % 2 == 0 || kernel_size < 1) bad.push_back("kernel_size (must be odd)");
  if (pool_size < 1) bad.push_back("pool_size (must be >= 1)");
  if (input_dropout < 0.0 || input_dropout >= 1.0) bad.push_back("input_dropout (must be in [0,1))");
  if (dropout < 0.0 || dropout >= 1.0) bad.push_back("dropout (must be in [0,1))");
  if (embed_dim < 1) bad.push_back("embed_dim (must be >= 1)");
  if (tasks.empty()) bad.push_back("tasks (need at least one)");
  std::set<std::string> seen;
  for (const TaskScheme& t : tasks) {
    if (t.class_count() < 2) bad.push_back("task " + t.name + " (needs >= 2 classes)");
    if (!seen.insert(t.name).second) bad.push_back("task " + t.name + " (duplicate)");
  }
  if (!bad.empty()) {
    std::string msg = "invalid model config:";
    for (const std::string& b : bad) msg += " " + b + ";";
    throw ConfigError(msg);
  }
}

Model::Model(const ModelConfig& config)
    : config_(config), lookup_(kAminoVocab, config.embed_dim), input_drop_(config.input_dropout) {
  for (std::size_t l = 0; l < config.conv_layers; ++l)
    blocks_.emplace_back(l == 0 ? config.input_width() : config.hidden_units,
                         config.hidden_units, config.kernel_size, config.nonlinearity,
                         config.pool_size, config.dropout);
  for (const TaskScheme& t : config.tasks)
    heads_.emplace_back(config.hidden_units, t.class_count());
}

Model Model::build(const ModelConfig& config, Rng& rng) {
  config.validate();
  Model m(config);
  m.lookup_.init_params(rng);
  for (ConvBlock& b : m.blocks_) b.conv.init_params(rng);
  for (Linear& h : m.heads_) h.init_params(rng);
  return m;
}

std::size_t Model::task_index(const std::string& name) const {
  for (std::size_t i = 0; i < config_.tasks.size(); ++i)
    if (config_.tasks[i].name == name) return i;
  throw ConfigError("model has no task named '" + name + "'");
}


TaskLogits Model::forward_dense(const EncodedSeq& seq, Mode mode, Rng& rng, Precision precision) {
  std::size_t t_len = seq.indices.size();
  if (t_len == 0) throw DataError("empty sequence");
  if (seq.pssm.rank() != 2 || seq.pssm.extent(0) != t_len || seq.pssm.extent(1) != kPssmWidth)
    throw DataError("PSSM row count does not match sequence length " + std::to_string(t_len));
  last_len_ = t_len;

  Tensor emb = lookup_.forward(seq.indices);
  emb = input_drop_.forward(emb, mode, rng);
  Tensor features({t_len, config_.input_width()});
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t e = 0; e < config_.embed_dim; ++e) features.at(t, e) = emb.at(t, e);
    for (std::size_t j = 0; j < kPssmWidth; ++j)
      features.at(t, config_.embed_dim + j) = seq.pssm.at(t, j);
  }

  std::vector<std::size_t> pools(config_.conv_layers, config_.pool_size);
  std::vector<std::size_t> kernels(config_.conv_layers, config_.kernel_size);
  plan_ = plan_make_margined(t_len, pools, kernels);

  Tensor batch = shift_expand(features, plan_);
  Tensor strided = conv_stack_forward(blocks_, batch, mode, rng, precision);
  Tensor stitched = stitch_merge(strided, plan_);

  TaskLogits logits;
  logits.reserve(heads_.size());
  for (Linear& head : heads_) logits.push_back(head.forward(stitched));
  return logits;
}

void Model::backward_dense(const TaskLogits& grad_logits) {
  if (last_len_ == 0) throw GeometryError("backward_dense before forward_dense");
  if (grad_logits.size() != heads_.size())
    throw GeometryError("gradient count does not match task count");
  Tensor grad_stitched({last_len_, config_.hidden_units}, 0.0);
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    Tensor g = heads_[i].backward(grad_logits[i]);
    for (std::size_t u = 0; u < g.size(); ++u) grad_stitched[u] += g[u];
  }
  Tensor grad_strided = stitch_merge_backward(grad_stitched, plan_);
  Tensor grad_batch = conv_stack_backward(blocks_, grad_strided);
  kink_margin_ = std::numeric_limits<double>::infinity();
  for (const ConvBlock& blk : blocks_) {
    kink_margin_ = std::min(kink_margin_, blk.nonlin.last_active_margin());
    kink_margin_ = std::min(kink_margin_, blk.pool.last_active_margin());
  }
  Tensor grad_features = shift_expand_backward(grad_batch, plan_);

  Tensor grad_emb({last_len_, config_.embed_dim});
  for (std::size_t t = 0; t < last_len_; ++t)
    for (std::size_t e = 0; e < config_.embed_dim; ++e) grad_emb.at(t, e) = grad_features.at(t, e);
  grad_emb = input_drop_.backward(grad_emb);
  lookup_.backward(grad_emb);
}

void Model::zero_grads() {
  lookup_.zero_grads();
  for (ConvBlock& b : blocks_) {
    b.conv.zero_grads();
    b.nonlin.zero_grads();
  }
  for (Linear& h : heads_) h.zero_grads();
}

std::vector<ParamGroup> Model::param_groups() {
  std::vector<ParamGroup> groups;
  groups.push_back({"lookup.table", &lookup_.table, &lookup_.grad_table});
  for (std::size_t l = 0; l < blocks_.size(); ++l) {
    std::string p = "block" + std::to_string(l + 1);
    groups.push_back({p + ".conv.W", &blocks_[l].conv.W, &blocks_[l].conv.gradW});
    groups.push_back({p + ".conv.B", &blocks_[l].conv.B, &blocks_[l].conv.gradB});
    if (config_.nonlinearity == NonlinKind::Prelu)
      groups.push_back({p + ".prelu.alpha", &blocks_[l].nonlin.alpha, &blocks_[l].nonlin.grad_alpha});
  }
  for (std::size_t i = 0; i < heads_.size(); ++i) {
    std::string p = "head." + config_.tasks[i].name;
    groups.push_back({p + ".W", &heads_[i].W, &heads_[i].gradW});
    groups.push_back({p + ".B", &heads_[i].B, &heads_[i].gradB});
  }
  return groups;
}


Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) throw GeometryError("softmax expects a [T, C] tensor");
  if (!logits.all_finite()) throw NumericError("softmax input contains non-finite values");
  std::size_t t_len = logits.extent(0), c = logits.extent(1);
  Tensor out({t_len, c});
  for (std::size_t t = 0; t < t_len; ++t) {
    double mx = logits.at(t, 0);
    for (std::size_t i = 1; i < c; ++i) mx = std::max(mx, logits.at(t, i));
    double sum = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      out.at(t, i) = std::exp(logits.at(t, i) - mx);
      sum += out.at(t, i);
    }
    for (std::size_t i = 0; i < c; ++i) out.at(t, i) /= sum;
  }
  return out;
}

LossResult nll_loss(const TaskLogits& logits, const std::vector<std::vector<int>>& labels,
                    const std::vector<bool>& task_selected) {
  if (labels.size() != logits.size())
    throw GeometryError("label task count does not match logits task count");
  LossResult res;
  res.grad_logits.reserve(logits.size());
  for (std::size_t tau = 0; tau < logits.size(); ++tau) {
    const Tensor& lg = logits[tau];
    Tensor grad = Tensor::zeros_like(lg);
    bool selected = task_selected.empty() || task_selected[tau];
    if (selected) {
      if (labels[tau].size() != lg.extent(0))
        throw GeometryError("label length does not match logits length for task " +
                            std::to_string(tau));
      Tensor probs = softmax_rows(lg);
      std::size_t c = lg.extent(1);
      for (std::size_t t = 0; t < lg.extent(0); ++t) {
        int cls = labels[tau][t];
        if (cls < 0) continue;
        if (static_cast<std::size_t>(cls) >= c)
          throw DataError("label class index " + std::to_string(cls) + " >= class count " +
                          std::to_string(c));
        res.loss -= std::log(probs.at(t, static_cast<std::size_t>(cls)));
        ++res.positions;
        for (std::size_t i = 0; i < c; ++i) grad.at(t, i) = probs.at(t, i);
        grad.at(t, static_cast<std::size_t>(cls)) -= 1.0;
      }
    }
    res.grad_logits.push_back(std::move(grad));
  }
  return res;
}

std::vector<std::string> predict_labels(const TaskLogits& logits,
                                        const std::vector<TaskScheme>& tasks) {
  if (logits.size() != tasks.size())
    throw GeometryError("logits task count does not match scheme count");
  std::vector<std::string> out;
  out.reserve(tasks.size());
  for (std::size_t tau = 0; tau < tasks.size(); ++tau) {
    const Tensor& lg = logits[tau];
    std::string s;
    s.reserve(lg.extent(0));
    for (std::size_t t = 0; t < lg.extent(0); ++t) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < lg.extent(1); ++i)
        if (lg.at(t, i) > lg.at(t, best)) best = i;
      s.push_back(tasks[tau].alphabet[best]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<int> encode_labels(const TaskScheme& scheme, const std::string& labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (char c : labels) out.push_back(scheme.class_of(c));
  return out;
}

namespace {

constexpr const char* kCheckpointMagic = "STITCHNET-CHECKPOINT";
constexpr int kCheckpointVersion = 1;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void checkpoint_save(Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open '" + path + "' for writing");
  const ModelConfig& c = model.config();
  out << kCheckpointMagic << '\n';
  out << "version = " << kCheckpointVersion << '\n';
  out << "conv_layers = " << c.conv_layers << '\n';
  out << "hidden_units = " << c.hidden_units << '\n';
  out << "kernel_size = " << c.kernel_size << '\n';
  out << "pool_size = " << c.pool_size << '\n';
  out << "input_dropout = " << format_double(c.input_dropout) << '\n';
  out << "dropout = " << format_double(c.dropout) << '\n';
  out << "nonlinearity = " << nonlin_to_string(c.nonlinearity) << '\n';
  out << "embed_dim = " << c.embed_dim << '\n';
  out << "tasks = ";
  for (std::size_t i = 0; i < c.tasks.size(); ++i)
    out << (i ? "," : "") << c.tasks[i].name << ':' << c.tasks[i].alphabet;
  out << '\n' << "end-header\n";
  for (const ParamGroup& g : model.param_groups()) {
    std::uint32_t rank = static_cast<std::uint32_t>(g.value->rank());
    out.write(reinterpret_cast<const char*>(&rank), sizeof rank);
    for (std::size_t d = 0; d < g.value->rank(); ++d) {
      std::uint64_t e = g.value->extent(d);
      out.write(reinterpret_cast<const char*>(&e), sizeof e);
    }
    out.write(reinterpret_cast<const char*>(g.value->data()),
              static_cast<std::streamsize>(g.value->size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("write failed for '" + path + "'");
}

Model checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCheckpointMagic)
    throw CheckpointError("bad magic header in '" + path + "'");
  ModelConfig config;
  config.tasks.clear();
  while (std::getline(in, line) && line != "end-header") {
    auto eq = line.find(" = ");
    if (eq == std::string::npos) throw CheckpointError("malformed header line '" + line + "'");
    std::string key = line.substr(0, eq), val = line.substr(eq + 3);
    if (key == "version") {
      if (std::stoi(val) != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + val);
    } else if (key == "conv_layers") {
      config.conv_layers = std::stoul(val);
    } else if (key == "hidden_units") {
      config.hidden_units = std::stoul(val);
    } else if (key == "kernel_size") {
      config.kernel_size = std::stoul(val);
    } else if (key == "pool_size") {
      config.pool_size = std::stoul(val);
    } else if (key == "input_dropout") {
      config.input_dropout = std::stod(val);
    } else if (key == "dropout") {
      config.dropout = std::stod(val);
    } else if (key == "nonlinearity") {
      config.nonlinearity = nonlin_from_string(val);
    } else if (key == "embed_dim") {
      config.embed_dim = std::stoul(val);
    } else if (key == "tasks") {
      std::istringstream ts(val);
      std::string item;
      while (std::getline(ts, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
          throw CheckpointError("malformed task entry '" + item + "'");
        config.tasks.push_back({item.substr(0, colon), item.substr(colon + 1)});
      }
    } else {
      throw CheckpointError("unknown header key '" + key + "'");
    }
  }
  if (line != "end-header") throw CheckpointError("truncated header in '" + path + "'");
  Rng rng(0);
  Model model = Model::build(config, rng);
  for (ParamGroup& g : model.param_groups()) {
    std::uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), sizeof rank);
    if (!in || rank != g.value->rank())
      throw CheckpointError("truncated or mismatched tensor block for " + g.name);
    for (std::size_t d = 0; d < rank; ++d) {
      std::uint64_t e = 0;
      in.read(reinterpret_cast<char*>(&e), sizeof e);
      if (!in || e != g.value->extent(d))
        throw CheckpointError("extent mismatch for " + g.name);
    }
    in.read(reinterpret_cast<char*>(g.value->data()),
            static_cast<std::streamsize>(g.value->size() * sizeof(double)));
    if (!in) throw CheckpointError("truncated parameter data for " + g.name);
  }
  return model;
}

}  // namespace stitchnet
