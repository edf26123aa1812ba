// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/data_pipeline.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <utility>

#include <json.hpp>

#include "gcnllm/csv.h"
#include "gcnllm/smiles.h"

namespace gcnllm {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::string lower(std::string s) {
  for (char &c: s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::optional<double> parse_number(const std::string &s) {
  if (s.empty()) return std::nullopt;
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

}  // namespace

IngestMode parse_ingest_mode(std::string_view s) {
  if (s == "ic50") return IngestMode::kIc50;
  if (s == "labeled") return IngestMode::kLabeled;
  throw std::invalid_argument("unknown ingest mode '" + std::string(s) + "'");
}

MissingColumnError::MissingColumnError(const std::string &column)
    : std::runtime_error("MissingColumn: header lacks '" + column + "'") { }

UnitError::UnitError(std::size_t line, const std::string &unit)
    : std::runtime_error("unit '" + unit + "' at line " + std::to_string(line)
                         + " is not nM; convert values before ingest") { }

std::size_t LabeledDataset::count_label(int label) const {
  return static_cast<std::size_t>(std::count_if(
      records.begin(), records.end(), [&](const LabeledRecord &r) { return r.label == label; }));
}

LoadResult parse_dataset(std::string_view csv_text, IngestMode mode) {
  const std::vector<CsvRow> rows = parse_csv(csv_text);
  if (rows.empty()) throw MissingColumnError("molecule_id");

  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    col.emplace(lower(trim(rows[0].fields[i])), i);
  }
  const std::string value_col = mode == IngestMode::kIc50 ? "ic50_nm" : "label";
  for (const std::string &name: { std::string("molecule_id"), std::string("smiles"), value_col }) {
    if (!col.count(name)) throw MissingColumnError(name);
  }
  const std::size_t c_id = col["molecule_id"];
  const std::size_t c_smi = col["smiles"];
  const std::size_t c_val = col[value_col];
  const auto unit_it = col.find("unit");
  const std::size_t width = rows[0].fields.size();

  LoadResult out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const CsvRow &row = rows[r];
    RawRecord rec;
    rec.line = row.line;
    if (row.fields.size() != width) {
      const std::string id = c_id < row.fields.size() ? trim(row.fields[c_id]) : "";
      out.rejected.push_back({ row.line, id,
                               "expected " + std::to_string(width) + " fields, got "
                                   + std::to_string(row.fields.size()) });
      continue;
    }
    if (unit_it != col.end()) {
      const std::string unit = trim(row.fields[unit_it->second]);
      if (unit != "nM") throw UnitError(row.line, unit);
    }
    rec.molecule_id = trim(row.fields[c_id]);
    rec.smiles = trim(row.fields[c_smi]);
    const std::string value = trim(row.fields[c_val]);
    if (rec.smiles.empty()) {
      out.rejected.push_back({ row.line, rec.molecule_id, "empty smiles" });
      continue;
    }
    if (mode == IngestMode::kIc50) {
      if (value.empty()) {
        out.rejected.push_back({ row.line, rec.molecule_id, "missing ic50" });
        continue;
      }
      const auto v = parse_number(value);
      if (!v) {
        out.rejected.push_back({ row.line, rec.molecule_id, "unparseable ic50" });
        continue;
      }
      if (*v <= 0.0) {
        out.rejected.push_back({ row.line, rec.molecule_id, "non-positive ic50" });
        continue;
      }
      rec.ic50_nm = *v;
    } else {
      if (value != "0" && value != "1") {
        out.rejected.push_back({ row.line, rec.molecule_id, "invalid label" });
        continue;
      }
      rec.label = value == "1" ? 1 : 0;
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

LoadResult load_dataset(const std::filesystem::path &path, IngestMode mode) {
  return parse_dataset(read_file(path), mode);
}

int label_ic50(const RawRecord &r, double threshold_nm) {
  if (!r.ic50_nm || !(*r.ic50_nm > 0.0)) {
    throw MissingValueError("MissingValue: record '" + r.molecule_id + "' has no ic50");
  }
  return *r.ic50_nm <= threshold_nm ? 1 : 0;
}

DedupResult dedup_records(std::span<const LabeledRecord> records, bool drop_conflicts) {
  DedupResult out;
  std::map<std::pair<std::string, int>, std::size_t> first_line;
  std::map<std::string, std::set<int>> labels_of;
  std::map<std::string, std::vector<std::size_t>> lines_of;
  std::vector<const LabeledRecord *> kept;
  for (const LabeledRecord &r: records) {
    const auto key = std::make_pair(r.smiles, r.label);
    const auto it = first_line.find(key);
    if (it != first_line.end()) {
      out.report.removed.push_back(
          { r.line, r.molecule_id,
            "duplicate (smiles, label) of line " + std::to_string(it->second) });
      continue;
    }
    first_line.emplace(key, r.line);
    labels_of[r.smiles].insert(r.label);
    lines_of[r.smiles].push_back(r.line);
    kept.push_back(&r);
  }

  std::set<std::string> conflicted;
  for (const auto &[smiles, labels]: labels_of) {
    if (labels.size() > 1) {
      conflicted.insert(smiles);
      out.report.conflicts.push_back({ smiles, lines_of[smiles] });
    }
  }
  // Report conflicts in input order of their first appearance.
  std::sort(out.report.conflicts.begin(), out.report.conflicts.end(),
            [](const LabelConflict &a, const LabelConflict &b) { return a.lines < b.lines; });

  for (const LabeledRecord *r: kept) {
    if (drop_conflicts && conflicted.count(r->smiles)) {
      out.report.removed.push_back({ r->line, r->molecule_id, "conflicting labels for smiles" });
      continue;
    }
    out.kept.push_back(*r);
  }
  std::stable_sort(out.report.removed.begin(), out.report.removed.end(),
                   [](const Rejection &a, const Rejection &b) { return a.line < b.line; });
  return out;
}

std::vector<Rejection> validate_records(std::span<const LabeledRecord> records,
                                        const EmbeddingTable *table) {
  std::vector<Rejection> out;
  for (const LabeledRecord &r: records) {
    try {
      parse(r.smiles);
    } catch (const SmilesError &e) {
      out.push_back({ r.line, r.molecule_id, std::string("invalid smiles: ") + e.what() });
      continue;
    }
    if (table != nullptr && !table->contains(r.smiles)) {
      out.push_back({ r.line, r.molecule_id, "MissingKey: " + r.smiles });
    }
  }
  return out;
}

std::string largest_fragment(std::string_view smiles) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= smiles.size(); ++i) {
    if (i == smiles.size() || smiles[i] == '.') {
      parts.push_back(smiles.substr(start, i - start));
      start = i + 1;
    }
  }
  if (parts.size() < 2) return std::string(smiles);
  std::string_view best;
  int best_atoms = -1;
  for (std::string_view p: parts) {
    int atoms = -1;
    try {
      atoms = parse(p).num_atoms();
    } catch (const SmilesError &) {
      // ring closures spanning fragments; leave such inputs unstripped
      return std::string(smiles);
    }
    if (atoms > best_atoms) {
      best_atoms = atoms;
      best = p;
    }
  }
  return std::string(best);
}

PrepareResult prepare_dataset(std::string_view csv_text, const PrepareOptions &opts,
                              std::string provenance) {
  LoadResult loaded = parse_dataset(csv_text, opts.mode);
  PrepareResult out;
  out.rejected = std::move(loaded.rejected);

  std::vector<LabeledRecord> labeled;
  labeled.reserve(loaded.records.size());
  for (const RawRecord &r: loaded.records) {
    LabeledRecord lr;
    lr.molecule_id = r.molecule_id;
    lr.smiles = opts.strip_fragments ? largest_fragment(r.smiles) : r.smiles;
    lr.line = r.line;
    lr.label = opts.mode == IngestMode::kIc50 ? label_ic50(r, opts.threshold_nm) : *r.label;
    labeled.push_back(std::move(lr));
  }

  const std::vector<Rejection> invalid = validate_records(labeled);
  std::set<std::size_t> bad_lines;
  for (const Rejection &r: invalid) bad_lines.insert(r.line);
  std::vector<LabeledRecord> parseable;
  for (LabeledRecord &r: labeled) {
    if (!bad_lines.count(r.line)) parseable.push_back(std::move(r));
  }
  out.rejected.insert(out.rejected.end(), invalid.begin(), invalid.end());

  DedupResult dedup = dedup_records(parseable, opts.drop_conflicts);
  out.rejected.insert(out.rejected.end(), dedup.report.removed.begin(),
                      dedup.report.removed.end());
  std::stable_sort(out.rejected.begin(), out.rejected.end(),
                   [](const Rejection &a, const Rejection &b) { return a.line < b.line; });
  out.conflicts = std::move(dedup.report.conflicts);
  out.dataset.records = std::move(dedup.kept);
  out.dataset.provenance = std::move(provenance);
  return out;
}

std::string format_clean_csv(const LabeledDataset &ds) {
  std::string out = "molecule_id,smiles,label\n";
  for (const LabeledRecord &r: ds.records) {
    const std::string fields[] = { r.molecule_id, r.smiles, std::to_string(r.label) };
    out += csv_line(fields);
  }
  return out;
}

std::string format_rejections_jsonl(std::span<const Rejection> rejected) {
  std::string out;
  for (const Rejection &r: rejected) {
    nlohmann::ordered_json j;
    j["line"] = r.line;
    j["molecule_id"] = r.molecule_id;
    j["reason"] = r.reason;
    out += j.dump() + '\n';
  }
  return out;
}

LabeledDataset read_labeled_dataset(const std::filesystem::path &path) {
  LoadResult loaded = load_dataset(path, IngestMode::kLabeled);
  if (!loaded.rejected.empty()) {
    const Rejection &r = loaded.rejected.front();
    throw std::runtime_error(path.string() + ":" + std::to_string(r.line) + ": " + r.reason
                             + " (" + std::to_string(loaded.rejected.size())
                             + " malformed rows)");
  }
  LabeledDataset ds;
  ds.provenance = path.string();
  for (RawRecord &r: loaded.records) {
    ds.records.push_back({ std::move(r.molecule_id), std::move(r.smiles), *r.label, r.line });
  }
  return ds;
}

}  // namespace gcnllm
