// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gcnllm {

class EmbeddingFormatError: public std::runtime_error {
 public:
  EmbeddingFormatError(std::size_t line, const std::string &reason);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmbeddingDimMismatch: public std::runtime_error {
 public:
  EmbeddingDimMismatch(std::size_t line, std::size_t expected, std::size_t got);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConflictingDuplicateError: public std::runtime_error {
 public:
  ConflictingDuplicateError(std::size_t line, const std::string &key);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingKeyError: public std::out_of_range {
 public:
  explicit MissingKeyError(std::string smiles);
  const std::string &smiles() const noexcept { return smiles_; }

 private:
  std::string smiles_;
};

// Precomputed SMILES -> vector map. Keys are whitespace-stripped; insertion
// order is preserved so a saved table reproduces its source file.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim, std::string source_tag = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return keys_.size(); }
  const std::string &source_tag() const noexcept { return source_tag_; }
  const std::vector<std::string> &keys() const noexcept { return keys_; }

  bool contains(std::string_view smiles) const;

  // Throws MissingKeyError.
  std::span<const double> lookup(std::string_view smiles) const;

  // Returns false if the key exists with an identical vector; throws
  // ConflictingDuplicateError (line 0) if it exists with a different one.
  bool insert(std::string_view smiles, std::span<const double> values);

 private:
  std::size_t dim_;
  std::string source_tag_;
  std::vector<std::string> keys_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> data_;
};

EmbeddingTable load_table(const std::filesystem::path &path);
EmbeddingTable parse_table(std::string_view text, std::string source_tag = {});

// `#EMBTAB v1 dim=<d>` header, then `<smiles>\t<values>` with 9 significant
// digits.
void save_table(const EmbeddingTable &table, const std::filesystem::path &path);
std::string format_table(const EmbeddingTable &table);

// Deterministic unit-norm stand-in for a language-model embedding.
std::vector<double> pseudo_embed(std::string_view smiles, std::uint64_t seed,
                                 std::size_t dim);

}  // namespace gcnllm
