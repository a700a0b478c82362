#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "stitchnet/tensor.hpp"

namespace stitchnet {

// 20 standard residues in alphabetical order, then 'X' for everything else.
// Index stability across runs and checkpoints depends on this ordering.
inline constexpr const char* kAminoAlphabet = "ACDEFGHIKLMNPQRSTVWYX";
inline constexpr std::size_t kAminoVocab = 21;
inline constexpr std::size_t kPssmWidth = 20;
inline constexpr char kMissingLabel = '.';

/// Maps a raw residue code to the 21-letter alphabet ('X' catch-all for
/// B, J, O, U, Z and anything unknown). Lowercase accepted.
char normalize_residue(char c);
std::size_t residue_index(char normalized);

/// One protein chain: residues, T x 20 profile, per-task label strings
/// ('.' marks a missing label at that position).
struct SequenceRecord {
  std::string id;
  std::string residues;
  Tensor pssm;  // [T, 20]
  std::map<std::string, std::string> labels;

  std::size_t length() const { return residues.size(); }
};

/// Ordered class alphabet for one task; class index = position.
struct TaskScheme {
  std::string name;
  std::string alphabet;
  std::size_t class_count() const { return alphabet.size(); }
  int class_of(char c) const;  // -1 for the missing marker
};

/// Builtin schemes: dssp HBEGITSL, ssp HEC, sar/saa AI.
const TaskScheme& task_scheme(const std::string& name);
bool is_known_task(const std::string& name);

std::vector<SequenceRecord> parse_dataset(std::istream& in);
void write_dataset(std::ostream& out, const std::vector<SequenceRecord>& records);

struct EncodedSeq {
  std::vector<std::size_t> indices;  // length T, into kAminoAlphabet
  Tensor pssm;                       // [T, 20]
};
EncodedSeq encode_features(const SequenceRecord& rec);

/// 8-class dssp string -> 3-class ssp string ({H,G}->H, {B,E}->E, rest ->C).
std::string collapse_ssp(const std::string& dssp_labels);

enum class SolventMode { Relative, Absolute };

/// Thresholds accessible ('A') vs inaccessible ('I'). Relative: strictly
/// above 0.15x the chain max; absolute: strictly above 0.15.
std::string solvent_labels(const std::vector<double>& asa, SolventMode mode);

struct DatasetSplit {
  std::vector<SequenceRecord> train, validation, test;
};

/// Deterministic shuffled partition; leftover records from flooring go to
/// train.
DatasetSplit split_dataset(const std::vector<SequenceRecord>& records,
                           const std::array<double, 3>& fractions, std::uint64_t seed);

/// Synthetic corpus for desk-scale verification. Labels are a deterministic
/// function of the residue window [t-2, t+2]: three threshold bits drawn from
/// positions t-2, t, t+2 form the 8-class dssp-style label, so any receptive
/// field >= 5 suffices for perfect accuracy and the classes are near-uniform.
/// ssp/sar/saa are fixed deterministic functions of the dssp labels.
std::vector<SequenceRecord> synth_generate(Rng& rng, std::size_t n_sequences,
                                           std::size_t len_lo, std::size_t len_hi);

/// The window rule itself, exposed for tests.
char synth_label_at(const std::string& residues, std::size_t t);

}  // namespace stitchnet
