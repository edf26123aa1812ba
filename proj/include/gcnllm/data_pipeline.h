// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gcnllm/embedding_store.h"

namespace gcnllm {

enum class IngestMode { kIc50, kLabeled };

IngestMode parse_ingest_mode(std::string_view s);

class MissingColumnError: public std::runtime_error {
 public:
  explicit MissingColumnError(const std::string &column);
};

class UnitError: public std::runtime_error {
 public:
  UnitError(std::size_t line, const std::string &unit);
};

class MissingValueError: public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RawRecord {
  std::size_t line = 0;
  std::string molecule_id;
  std::string smiles;
  std::optional<double> ic50_nm;
  std::optional<int> label;
};

struct Rejection {
  std::size_t line = 0;
  std::string molecule_id;
  std::string reason;
};

struct LoadResult {
  std::vector<RawRecord> records;
  std::vector<Rejection> rejected;
};

// Header must name molecule_id, smiles and ic50_nm (or label). An optional
// unit column must read nM on every row.
LoadResult parse_dataset(std::string_view csv_text, IngestMode mode);
LoadResult load_dataset(const std::filesystem::path &path, IngestMode mode);

// Active (1) iff ic50 <= threshold.
int label_ic50(const RawRecord &r, double threshold_nm = 200.0);

struct LabeledRecord {
  std::string molecule_id;
  std::string smiles;
  int label = 0;
  std::size_t line = 0;
};

struct LabeledDataset {
  std::vector<LabeledRecord> records;
  std::string provenance;

  std::size_t size() const { return records.size(); }
  bool empty() const { return records.empty(); }
  std::size_t count_label(int label) const;
};

struct LabelConflict {
  std::string smiles;
  std::vector<std::size_t> lines;
};

struct DedupReport {
  std::vector<Rejection> removed;
  std::vector<LabelConflict> conflicts;
};

struct DedupResult {
  std::vector<LabeledRecord> kept;
  DedupReport report;
};

// Keeps the first record of each (smiles, label) pair in input order. Equal
// SMILES with different labels are all kept and flagged, or all removed with
// drop_conflicts.
DedupResult dedup_records(std::span<const LabeledRecord> records,
                          bool drop_conflicts = false);

// Every failure (unparseable SMILES, missing embedding key) in record order.
std::vector<Rejection> validate_records(std::span<const LabeledRecord> records,
                                        const EmbeddingTable *table = nullptr);

// Keeps the dot-separated fragment with the most heavy atoms.
std::string largest_fragment(std::string_view smiles);

struct PrepareOptions {
  IngestMode mode = IngestMode::kIc50;
  double threshold_nm = 200.0;
  bool drop_conflicts = false;
  bool strip_fragments = false;
};

struct PrepareResult {
  LabeledDataset dataset;
  std::vector<Rejection> rejected;
  std::vector<LabelConflict> conflicts;
};

PrepareResult prepare_dataset(std::string_view csv_text, const PrepareOptions &opts,
                              std::string provenance = {});

std::string format_clean_csv(const LabeledDataset &ds);
std::string format_rejections_jsonl(std::span<const Rejection> rejected);

// Reads a `molecule_id,smiles,label` file; any malformed row is an error.
LabeledDataset read_labeled_dataset(const std::filesystem::path &path);

}  // namespace gcnllm
