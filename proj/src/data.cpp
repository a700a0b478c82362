#include "stitchnet/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace stitchnet {

char normalize_residue(char c) {
  char u = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (const char* p = kAminoAlphabet; *p; ++p)
    if (*p == u) return u;
  return 'X';
}

std::size_t residue_index(char normalized) {
  for (std::size_t i = 0; i < kAminoVocab; ++i)
    if (kAminoAlphabet[i] == normalized) return i;
  return kAminoVocab - 1;
}

int TaskScheme::class_of(char c) const {
  if (c == kMissingLabel) return -1;
  auto pos = alphabet.find(c);
  if (pos == std::string::npos)
    throw DataError("label character '" + std::string(1, c) + "' outside alphabet of task " +
                    name);
  return static_cast<int>(pos);
}

namespace {
const std::array<TaskScheme, 4> kSchemes = {{
    {"dssp", "HBEGITSL"},
    {"ssp", "HEC"},
    {"sar", "AI"},
    {"saa", "AI"},
}};
}

const TaskScheme& task_scheme(const std::string& name) {
  for (const TaskScheme& s : kSchemes)
    if (s.name == name) return s;
  throw ConfigError("unknown task '" + name + "' (expected dssp|ssp|sar|saa)");
}

bool is_known_task(const std::string& name) {
  for (const TaskScheme& s : kSchemes)
    if (s.name == name) return true;
  return false;
}

namespace {

struct LineReader {
  std::istream& in;
  std::size_t line_no = 0;
  bool next(std::string& out) {
    if (!std::getline(in, out)) return false;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    ++line_no;
    return true;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError("line " + std::to_string(line_no) + ": " + msg);
  }
};

}  // namespace

std::vector<SequenceRecord> parse_dataset(std::istream& in) {
  std::vector<SequenceRecord> records;
  LineReader r{in};
  std::string line;
  while (r.next(line)) {
    if (line.empty()) continue;
    if (line[0] != '>') r.fail("expected '>' record header, got '" + line + "'");
    SequenceRecord rec;
    rec.id = line.substr(1);
    if (rec.id.empty()) r.fail("empty record id");
    if (!r.next(line) || line.empty()) r.fail("record " + rec.id + ": missing residue line");
    for (char c : line) rec.residues.push_back(normalize_residue(c));
    std::size_t t_len = rec.residues.size();
    if (!r.next(line) || line != "#pssm")
      r.fail("record " + rec.id + ": expected '#pssm' after residues");
    rec.pssm = Tensor({t_len, kPssmWidth});
    for (std::size_t t = 0; t < t_len; ++t) {
      if (!r.next(line) || line.empty() || line[0] == '#' || line[0] == '>')
        r.fail("record " + rec.id + ": PSSM row count does not match " + std::to_string(t_len) +
               " residues");
      std::istringstream row(line);
      for (std::size_t j = 0; j < kPssmWidth; ++j) {
        double v;
        if (!(row >> v))
          r.fail("record " + rec.id + ": non-numeric or short PSSM row (need 20 values)");
        rec.pssm.at(t, j) = v;
      }
      double extra;
      if (row >> extra) r.fail("record " + rec.id + ": PSSM row has more than 20 values");
    }
    // Label blocks until blank line or EOF.
    while (r.next(line)) {
      if (line.empty()) break;
      if (line.rfind("#label ", 0) != 0)
        r.fail("record " + rec.id + ": expected '#label <task>' block, got '" + line + "'");
      std::string task = line.substr(7);
      if (!is_known_task(task)) r.fail("record " + rec.id + ": unknown task name '" + task + "'");
      if (!r.next(line)) r.fail("record " + rec.id + ": missing label string for task " + task);
      if (line.size() != t_len)
        r.fail("record " + rec.id + ": label length " + std::to_string(line.size()) +
               " for task " + task + " does not match sequence length " + std::to_string(t_len));
      const TaskScheme& scheme = task_scheme(task);
      for (char c : line) scheme.class_of(c);  // validates alphabet membership
      rec.labels[task] = line;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_dataset(std::ostream& out, const std::vector<SequenceRecord>& records) {
  char buf[64];
  for (const SequenceRecord& rec : records) {
    out << '>' << rec.id << '\n' << rec.residues << '\n' << "#pssm\n";
    for (std::size_t t = 0; t < rec.length(); ++t) {
      for (std::size_t j = 0; j < kPssmWidth; ++j) {
        std::snprintf(buf, sizeof buf, "%.17g", rec.pssm.at(t, j));
        out << (j ? " " : "") << buf;
      }
      out << '\n';
    }
    for (const auto& [task, labels] : rec.labels)
      out << "#label " << task << '\n' << labels << '\n';
    out << '\n';
  }
}

EncodedSeq encode_features(const SequenceRecord& rec) {
  EncodedSeq enc;
  enc.indices.reserve(rec.length());
  for (char c : rec.residues) enc.indices.push_back(residue_index(c));
  enc.pssm = rec.pssm;
  return enc;
}

std::string collapse_ssp(const std::string& dssp_labels) {
  std::string out;
  out.reserve(dssp_labels.size());
  for (char c : dssp_labels) {
    switch (c) {
      case 'H':
      case 'G': out.push_back('H'); break;
      case 'B':
      case 'E': out.push_back('E'); break;
      case 'I':
      case 'S':
      case 'T':
      case 'L': out.push_back('C'); break;
      case kMissingLabel: out.push_back(kMissingLabel); break;
      default:
        throw DataError("character '" + std::string(1, c) + "' outside the dssp alphabet");
    }
  }
  return out;
}

std::string solvent_labels(const std::vector<double>& asa, SolventMode mode) {
  double threshold = 0.15;
  if (mode == SolventMode::Relative) {
    double mx = 0.0;
    for (double v : asa) {
      if (v < 0.0) throw DataError("negative accessible surface area");
      mx = std::max(mx, v);
    }
    threshold = 0.15 * mx;
  }
  std::string out;
  out.reserve(asa.size());
  for (double v : asa) {
    if (v < 0.0) throw DataError("negative accessible surface area");
    out.push_back(v > threshold ? 'A' : 'I');
  }
  return out;
}

DatasetSplit split_dataset(const std::vector<SequenceRecord>& records,
                           const std::array<double, 3>& fractions, std::uint64_t seed) {
  double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1, got " + std::to_string(sum));
  for (double f : fractions)
    if (f < 0.0) throw ConfigError("split fractions must be nonnegative");
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::size_t n = records.size();
  std::size_t n_val = static_cast<std::size_t>(fractions[1] * n);
  std::size_t n_test = static_cast<std::size_t>(fractions[2] * n);
  DatasetSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    const SequenceRecord& rec = records[order[i]];
    if (i < n - n_val - n_test)
      split.train.push_back(rec);
    else if (i < n - n_test)
      split.validation.push_back(rec);
    else
      split.test.push_back(rec);
  }
  return split;
}

namespace {

// One threshold bit per probe position; out-of-range probes read as 0.
int synth_bit(const std::string& residues, long long pos) {
  if (pos < 0 || pos >= static_cast<long long>(residues.size())) return 0;
  return residue_index(residues[static_cast<std::size_t>(pos)]) >= 10 ? 1 : 0;
}

}  // namespace

char synth_label_at(const std::string& residues, std::size_t t) {
  long long p = static_cast<long long>(t);
  int cls = synth_bit(residues, p - 2) | (synth_bit(residues, p) << 1) |
            (synth_bit(residues, p + 2) << 2);
  return task_scheme("dssp").alphabet[static_cast<std::size_t>(cls)];
}

std::vector<SequenceRecord> synth_generate(Rng& rng, std::size_t n_sequences, std::size_t len_lo,
                                           std::size_t len_hi) {
  if (n_sequences == 0) throw ConfigError("synthetic corpus needs at least one sequence");
  if (len_lo == 0 || len_hi < len_lo) throw ConfigError("bad synthetic length range");
  const TaskScheme& dssp = task_scheme("dssp");
  std::vector<SequenceRecord> records;
  records.reserve(n_sequences);
  for (std::size_t s = 0; s < n_sequences; ++s) {
    SequenceRecord rec;
    rec.id = "synth" + std::to_string(s);
    std::size_t t_len = len_lo + rng.below(len_hi - len_lo + 1);
    for (std::size_t t = 0; t < t_len; ++t) rec.residues.push_back(kAminoAlphabet[rng.below(20)]);
    rec.pssm = rng_uniform(rng, 0.0, 0.1, {t_len, kPssmWidth});
    for (std::size_t t = 0; t < t_len; ++t)
      rec.pssm.at(t, residue_index(rec.residues[t])) += 1.0;
    std::string dssp_labels;
    for (std::size_t t = 0; t < t_len; ++t) dssp_labels.push_back(synth_label_at(rec.residues, t));
    std::string sar, saa;
    for (char c : dssp_labels) {
      int cls = dssp.class_of(c);
      sar.push_back((cls & 1) ? 'A' : 'I');
      saa.push_back((cls & 4) ? 'A' : 'I');
    }
    rec.labels["dssp"] = dssp_labels;
    rec.labels["ssp"] = collapse_ssp(dssp_labels);
    rec.labels["sar"] = sar;
    rec.labels["saa"] = saa;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace stitchnet
