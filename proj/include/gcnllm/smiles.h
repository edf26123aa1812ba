// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gcnllm {

enum class TokenKind {
  kAtom,
  kBracketAtom,
  kBond,
  kRingClosure,
  kBranchOpen,
  kBranchClose,
  kDot,
};

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t position;  // 0-based offset into the stripped input
};

enum class BondOrder {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;
  int formal_charge = 0;
  bool aromatic = false;
  std::optional<int> explicit_h;  // bracket H count, plus folded [H] nodes
  int implicit_h = 0;
  std::optional<int> isotope;
  bool in_ring = false;
  int index = 0;

  int total_h() const { return implicit_h + explicit_h.value_or(0); }
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
  bool in_ring = false;
};

// Heavy-atom graph of one SMILES string. Dot-separated fragments stay in the
// same graph as disconnected components. Immutable once returned by parse().
struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string source_smiles;
  std::vector<std::string> warnings;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }
  std::vector<int> degrees() const;
};

enum class SmilesErrc {
  kEmpty,
  kSyntax,
  kUnterminatedBracket,
  kUnmatchedRingClosure,
  kUnbalancedBranch,
  kValence,
};

std::string_view to_string(SmilesErrc code);

class SmilesError: public std::runtime_error {
 public:
  SmilesError(SmilesErrc code, std::size_t position, const std::string &msg);

  SmilesErrc code() const noexcept { return code_; }
  std::size_t position() const noexcept { return position_; }

 private:
  SmilesErrc code_;
  std::size_t position_;
};

struct ParseOptions {
  // Throw kValence when an atom's bond-order sum exceeds the largest allowed
  // valence of its element; otherwise such atoms get implicit_h = 0 and a
  // warning.
  bool strict_valence = false;
};

std::vector<Token> tokenize(std::string_view smiles);

MolecularGraph parse(std::string_view smiles, const ParseOptions &opts = {});

bool is_element_symbol(std::string_view symbol);

std::string_view to_string(BondOrder order);

// Line-oriented debug dump: `ATOM idx element charge aromatic implicit_h`
// followed by `BOND a b order`, one record per line.
std::string to_debug_text(const MolecularGraph &graph);

}  // namespace gcnllm
