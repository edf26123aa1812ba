// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/embedding_store.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gcnllm/rng.h"

namespace gcnllm {

namespace {

std::string_view strip(std::string_view s) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_double(std::string_view tok, double &out) {
  // strtod accepts the full decimal/exponent grammar; require it to consume
  // the whole token.
  std::string buf(tok);
  char *end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && !buf.empty();
}

void format_value(std::string &out, double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof(buf), "%.9g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

EmbeddingFormatError::EmbeddingFormatError(std::size_t line, const std::string &reason)
    : std::runtime_error("FormatError at line " + std::to_string(line) + ": " + reason),
      line_(line) { }

EmbeddingDimMismatch::EmbeddingDimMismatch(std::size_t line, std::size_t expected,
                                           std::size_t got)
    : std::runtime_error("DimMismatch at line " + std::to_string(line) + ": expected "
                         + std::to_string(expected) + " values, got "
                         + std::to_string(got)),
      line_(line) { }

ConflictingDuplicateError::ConflictingDuplicateError(std::size_t line,
                                                     const std::string &key)
    : std::runtime_error("ConflictingDuplicate at line " + std::to_string(line)
                         + ": key '" + key + "' already has a different vector"),
      line_(line) { }

MissingKeyError::MissingKeyError(std::string smiles)
    : std::out_of_range("MissingKey: no embedding for '" + smiles + "'"),
      smiles_(std::move(smiles)) { }

EmbeddingTable::EmbeddingTable(std::size_t dim, std::string source_tag)
    : dim_(dim), source_tag_(std::move(source_tag)) {
  if (dim_ == 0) throw std::invalid_argument("embedding dim must be positive");
}

bool EmbeddingTable::contains(std::string_view smiles) const {
  return index_.find(std::string(strip(smiles))) != index_.end();
}

std::span<const double> EmbeddingTable::lookup(std::string_view smiles) const {
  const std::string key(strip(smiles));
  const auto it = index_.find(key);
  if (it == index_.end()) throw MissingKeyError(key);
  return { data_.data() + it->second * dim_, dim_ };
}

bool EmbeddingTable::insert(std::string_view smiles, std::span<const double> values) {
  if (values.size() != dim_) throw EmbeddingDimMismatch(0, dim_, values.size());
  if (!std::all_of(values.begin(), values.end(),
                   [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("embedding values must be finite");
  }
  std::string key(strip(smiles));
  if (key.empty()) throw std::invalid_argument("embedding key must be non-empty");
  const auto it = index_.find(key);
  if (it != index_.end()) {
    const double *old = data_.data() + it->second * dim_;
    if (std::equal(values.begin(), values.end(), old)) return false;
    throw ConflictingDuplicateError(0, key);
  }
  index_.emplace(key, keys_.size());
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), values.begin(), values.end());
  return true;
}

EmbeddingTable parse_table(std::string_view text, std::string source_tag) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  const auto next_line = [&](std::string_view &line) {
    if (pos >= text.size()) return false;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line)) throw EmbeddingFormatError(1, "missing #EMBTAB header");
  const auto head = split_ws(line);
  if (head.size() < 3 || head[0] != "#EMBTAB" || head[1] != "v1"
      || head[2].substr(0, 4) != "dim=") {
    throw EmbeddingFormatError(1, "expected '#EMBTAB v1 dim=<d>' header");
  }
  std::size_t dim = 0;
  const std::string_view dim_text = head[2].substr(4);
  const auto [ptr, ec] =
      std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), dim);
  if (ec != std::errc() || ptr != dim_text.data() + dim_text.size() || dim == 0) {
    throw EmbeddingFormatError(1, "invalid dim in header");
  }

  EmbeddingTable table(dim, std::move(source_tag));
  std::vector<double> values;
  values.reserve(dim);
  while (next_line(line)) {
    if (strip(line).empty() || line.front() == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw EmbeddingFormatError(line_no, "missing TAB between key and values");
    }
    const std::string_view key = strip(line.substr(0, tab));
    if (key.empty()) throw EmbeddingFormatError(line_no, "empty SMILES key");
    const auto toks = split_ws(line.substr(tab + 1));
    if (toks.size() != dim) throw EmbeddingDimMismatch(line_no, dim, toks.size());
    values.clear();
    for (std::string_view t: toks) {
      double v = 0.0;
      if (!parse_double(t, v)) {
        throw EmbeddingFormatError(line_no, "unparseable value '" + std::string(t) + "'");
      }
      if (!std::isfinite(v)) throw EmbeddingFormatError(line_no, "non-finite value");
      values.push_back(v);
    }
    try {
      table.insert(key, values);
    } catch (const ConflictingDuplicateError &) {
      throw ConflictingDuplicateError(line_no, std::string(key));
    }
  }
  return table;
}

EmbeddingTable load_table(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embedding table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str(), path.string());
}

std::string format_table(const EmbeddingTable &table) {
  std::string out = "#EMBTAB v1 dim=" + std::to_string(table.dim()) + "\n";
  for (const std::string &key: table.keys()) {
    out += key;
    out += '\t';
    const auto vec = table.lookup(key);
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (i > 0) out += ' ';
      format_value(out, vec[i]);
    }
    out += '\n';
  }
  return out;
}

void save_table(const EmbeddingTable &table, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write embedding table " + path.string());
  out << format_table(table);
}

std::vector<double> pseudo_embed(std::string_view smiles, std::uint64_t seed,
                                 std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("pseudo_embed: dim must be >= 1");
  const std::uint64_t h = fnv1a64(strip(smiles));
  Rng rng(splitmix64(h ^ splitmix64(seed ^ splitmix64(dim))));
  std::vector<double> v(dim);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (double &x: v) {
      x = rng.normal();
      norm2 += x * x;
    }
  } while (norm2 == 0.0);
  const double inv = 1.0 / std::sqrt(norm2);
  for (double &x: v) x *= inv;
  return v;
}

}  // namespace gcnllm
