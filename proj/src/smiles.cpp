// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/smiles.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <utility>

namespace gcnllm {

namespace {

constexpr std::array<std::string_view, 118> kElementSymbols = {
  "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
  "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
  "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
  "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
  "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
  "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
  "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
  "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
  "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
  "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
};

bool is_bond_char(char c) {
  return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\';
}

bool is_digit(char c) {
  return c >= '0' && c <= '9';
}

std::string_view strip(std::string_view s) {
  const auto is_space = [](char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

[[noreturn]] void fail(SmilesErrc code, std::size_t pos, const std::string &msg) {
  throw SmilesError(code, pos, msg);
}

// Default valences of the organic subset plus the aromatic-capable bracket
// elements. Empty for everything else (no valence model).
std::vector<int> default_valences(std::string_view el) {
  if (el == "B") return { 3 };
  if (el == "C" || el == "Si") return { 4 };
  if (el == "N") return { 3 };
  if (el == "O") return { 2 };
  if (el == "P" || el == "As") return { 3, 5 };
  if (el == "S" || el == "Se") return { 2, 4, 6 };
  if (el == "F" || el == "Cl" || el == "Br" || el == "I") return { 1 };
  return {};
}

// Charge shifts valence toward the isoelectronic neighbour: N+ behaves like C,
// O- like F, B- like C, C+/C- lose one bond.
std::vector<int> allowed_valences(std::string_view el, int charge) {
  std::vector<int> out;
  int shift = 0;
  if (el == "B") {
    shift = -charge;
  } else if (el == "C" || el == "Si") {
    shift = -std::abs(charge);
  } else {
    shift = charge;
  }
  for (int v: default_valences(el)) {
    if (v + shift > 0) out.push_back(v + shift);
  }
  return out;
}

std::optional<int> smallest_at_least(const std::vector<int> &vals, int v) {
  for (int x: vals) {
    if (x >= v) return x;
  }
  return std::nullopt;
}

struct RawAtom {
  Atom atom;
  bool bracket = false;
  std::size_t position = 0;
};

struct BracketContents {
  std::optional<int> isotope;
  std::string element;
  bool aromatic = false;
  bool chiral = false;
  int hcount = 0;
  int charge = 0;
};

BracketContents parse_bracket(std::string_view text, std::size_t pos) {
  // text includes the surrounding brackets
  std::string_view s = text.substr(1, text.size() - 2);
  std::size_t i = 0;
  BracketContents out;
  const auto here = [&]() { return pos + 1 + i; };

  if (i < s.size() && is_digit(s[i])) {
    int iso = 0;
    while (i < s.size() && is_digit(s[i])) {
      iso = iso * 10 + (s[i] - '0');
      ++i;
    }
    out.isotope = iso;
  }

  if (i >= s.size()) fail(SmilesErrc::kSyntax, here(), "missing element symbol");

  static constexpr std::array<std::string_view, 8> kAromaticBracket = {
    "se", "as", "b", "c", "n", "o", "p", "s",
  };
  bool matched = false;
  if (std::islower(static_cast<unsigned char>(s[i])) != 0) {
    for (std::string_view sym: kAromaticBracket) {
      if (s.substr(i, sym.size()) == sym) {
        out.element = std::string(1, static_cast<char>(std::toupper(sym[0])));
        out.element += sym.substr(1);
        out.aromatic = true;
        i += sym.size();
        matched = true;
        break;
      }
    }
  } else if (std::isupper(static_cast<unsigned char>(s[i])) != 0) {
    if (i + 1 < s.size() && std::islower(static_cast<unsigned char>(s[i + 1])) != 0
        && is_element_symbol(s.substr(i, 2))) {
      out.element = std::string(s.substr(i, 2));
      i += 2;
      matched = true;
    } else if (is_element_symbol(s.substr(i, 1))) {
      out.element = std::string(s.substr(i, 1));
      i += 1;
      matched = true;
    }
  }
  if (!matched) fail(SmilesErrc::kSyntax, here(), "unknown element symbol");

  if (i < s.size() && s[i] == '@') {
    out.chiral = true;
    ++i;
    if (i < s.size() && s[i] == '@') {
      ++i;
    } else if (i + 1 < s.size() && std::isupper(static_cast<unsigned char>(s[i])) != 0
               && std::isupper(static_cast<unsigned char>(s[i + 1])) != 0) {
      // @TH1, @SP2, @OH12 ...
      i += 2;
      if (i >= s.size() || !is_digit(s[i])) {
        fail(SmilesErrc::kSyntax, here(), "malformed chirality class");
      }
      while (i < s.size() && is_digit(s[i])) ++i;
    }
  }

  if (i < s.size() && s[i] == 'H') {
    ++i;
    out.hcount = 1;
    if (i < s.size() && is_digit(s[i])) {
      out.hcount = 0;
      while (i < s.size() && is_digit(s[i])) {
        out.hcount = out.hcount * 10 + (s[i] - '0');
        ++i;
      }
    }
  }

  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    const char sign = s[i];
    const int unit = sign == '+' ? 1 : -1;
    ++i;
    if (i < s.size() && is_digit(s[i])) {
      int mag = 0;
      while (i < s.size() && is_digit(s[i])) {
        mag = mag * 10 + (s[i] - '0');
        ++i;
      }
      out.charge = unit * mag;
    } else {
      out.charge = unit;
      while (i < s.size() && s[i] == sign) {
        out.charge += unit;
        ++i;
      }
    }
  }

  if (i < s.size() && s[i] == ':') {
    ++i;
    if (i >= s.size() || !is_digit(s[i])) {
      fail(SmilesErrc::kSyntax, here(), "malformed atom class");
    }
    while (i < s.size() && is_digit(s[i])) ++i;
  }

  if (i != s.size()) fail(SmilesErrc::kSyntax, here(), "unexpected character in bracket atom");
  return out;
}

class Builder {
 public:
  explicit Builder(std::string_view src): src_(src) { }

  int add_atom(const Token &tok) {
    RawAtom raw;
    raw.position = tok.position;
    if (tok.kind == TokenKind::kBracketAtom) {
      BracketContents bc = parse_bracket(tok.text, tok.position);
      raw.bracket = true;
      raw.atom.element = bc.element;
      raw.atom.aromatic = bc.aromatic;
      raw.atom.formal_charge = bc.charge;
      raw.atom.explicit_h = bc.hcount;
      raw.atom.isotope = bc.isotope;
      if (bc.chiral) note_stereo();
    } else {
      const char c = tok.text[0];
      raw.atom.aromatic = std::islower(static_cast<unsigned char>(c)) != 0;
      raw.atom.element = tok.text;
      raw.atom.element[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    atoms_.push_back(std::move(raw));
    return static_cast<int>(atoms_.size()) - 1;
  }

  void add_bond(int a, int b, std::optional<char> sym, std::size_t pos) {
    if (a == b) fail(SmilesErrc::kSyntax, pos, "atom bonded to itself");
    const auto key = std::minmax(a, b);
    if (!bond_pairs_.insert(key).second) {
      fail(SmilesErrc::kSyntax, pos, "duplicate bond between the same atoms");
    }
    Bond bond;
    bond.a = a;
    bond.b = b;
    if (!sym) {
      bond.order = atoms_[a].atom.aromatic && atoms_[b].atom.aromatic
                       ? BondOrder::kAromatic
                       : BondOrder::kSingle;
    } else {
      switch (*sym) {
      case '=':
        bond.order = BondOrder::kDouble;
        break;
      case '#':
        bond.order = BondOrder::kTriple;
        break;
      case ':':
        bond.order = BondOrder::kAromatic;
        break;
      case '/':
      case '\\':
        note_stereo();
        [[fallthrough]];
      default:
        bond.order = BondOrder::kSingle;
      }
    }
    bonds_.push_back(bond);
  }

  void note_stereo() {
    if (!stereo_noted_) {
      warnings_.emplace_back("stereochemistry discarded");
      stereo_noted_ = true;
    }
  }

  MolecularGraph finish(const ParseOptions &opts);

 private:
  void fold_hydrogens();
  void assign_hydrogens(const ParseOptions &opts);
  std::vector<bool> kekule_match(const std::vector<bool> &candidate);
  void mark_rings();

  std::string_view src_;
  std::vector<RawAtom> atoms_;
  std::vector<Bond> bonds_;
  std::set<std::pair<int, int>> bond_pairs_;
  std::vector<std::string> warnings_;
  std::vector<int> unmatched_;
  bool stereo_noted_ = false;
};

MolecularGraph Builder::finish(const ParseOptions &opts) {
  assign_hydrogens(opts);
  fold_hydrogens();
  mark_rings();

  MolecularGraph g;
  g.source_smiles = std::string(src_);
  g.atoms.reserve(atoms_.size());
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    Atom a = atoms_[i].atom;
    a.index = static_cast<int>(i);
    g.atoms.push_back(std::move(a));
  }
  g.bonds = std::move(bonds_);
  g.warnings = std::move(warnings_);
  return g;
}

// Bond-order sums count aromatic bonds as 1; aromatic atoms that take part
// in the Kekule matching get one more. Bracket atoms keep their written H.
void Builder::assign_hydrogens(const ParseOptions &opts) {
  const std::size_t n = atoms_.size();
  std::vector<int> sigma(n, 0);
  for (const Bond &b: bonds_) {
    const int o = b.order == BondOrder::kAromatic ? 1 : static_cast<int>(b.order);
    sigma[b.a] += o;
    sigma[b.b] += o;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (atoms_[i].bracket) sigma[i] += atoms_[i].atom.explicit_h.value_or(0);
  }

  std::vector<bool> candidate(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom &a = atoms_[i].atom;
    if (!a.aromatic) continue;
    const auto vals = allowed_valences(a.element, a.formal_charge);
    const auto target = smallest_at_least(vals, sigma[i]);
    candidate[i] = target && *target - sigma[i] >= 1;
  }
  const std::vector<bool> matched = kekule_match(candidate);

  for (std::size_t i = 0; i < n; ++i) {
    Atom &a = atoms_[i].atom;
    const int total = sigma[i] + (matched[i] ? 1 : 0);
    const auto vals = allowed_valences(a.element, a.formal_charge);
    if (vals.empty()) {
      if (!atoms_[i].bracket || default_valences(a.element).empty()) continue;
      warnings_.push_back("no valid valence for atom " + std::to_string(i));
      continue;
    }
    const auto target = smallest_at_least(vals, total);
    if (!target) {
      if (opts.strict_valence) {
        fail(SmilesErrc::kValence, atoms_[i].position,
             "bond order sum " + std::to_string(total) + " exceeds valence of "
                 + a.element);
      }
      warnings_.push_back("valence exceeded at atom " + std::to_string(i));
      continue;
    }
    if (!atoms_[i].bracket) a.implicit_h = *target - total;
  }
}

// Maximum matching over aromatic bonds between candidate atoms. Searches for
// a matching with the fewest unmatched candidates, allowing one more
// unmatched atom per round.
std::vector<bool> Builder::kekule_match(const std::vector<bool> &candidate) {
  const std::size_t n = atoms_.size();
  std::vector<std::vector<int>> adj(n);
  for (const Bond &b: bonds_) {
    if (b.order != BondOrder::kAromatic) continue;
    if (candidate[b.a] && candidate[b.b]) {
      adj[b.a].push_back(b.b);
      adj[b.b].push_back(b.a);
    }
  }

  std::vector<int> cand;
  for (std::size_t i = 0; i < n; ++i) {
    if (candidate[i]) cand.push_back(static_cast<int>(i));
  }
  std::vector<bool> matched(n, false);
  if (cand.empty()) return matched;

  constexpr long kStepLimit = 200000;
  long steps = 0;
  std::function<bool(int)> search = [&](int budget) -> bool {
    if (++steps > kStepLimit) return false;
    // Most constrained unmatched candidate first.
    int pick = -1;
    int best = 1 << 30;
    for (int i: cand) {
      if (matched[i]) continue;
      int free_nbrs = 0;
      for (int j: adj[i]) {
        if (!matched[j]) ++free_nbrs;
      }
      if (free_nbrs < best) {
        best = free_nbrs;
        pick = i;
      }
    }
    if (pick < 0) return true;
    matched[pick] = true;
    for (int j: adj[pick]) {
      if (matched[j]) continue;
      matched[j] = true;
      if (search(budget)) return true;
      matched[j] = false;
    }
    if (budget > 0 && search(budget - 1)) {
      // pick stays flagged so the recursion skips it; cleared below.
      unmatched_.push_back(pick);
      return true;
    }
    matched[pick] = false;
    return false;
  };

  int budget = static_cast<int>(cand.size() % 2);
  unmatched_.clear();
  while (!search(budget)) {
    std::fill(matched.begin(), matched.end(), false);
    unmatched_.clear();
    if (steps > kStepLimit) break;
    budget += 2;
  }
  if (steps > kStepLimit) {
    // Greedy fallback for pathological inputs.
    std::fill(matched.begin(), matched.end(), false);
    unmatched_.clear();
    for (int i: cand) {
      if (matched[i]) continue;
      for (int j: adj[i]) {
        if (!matched[j]) {
          matched[i] = matched[j] = true;
          break;
        }
      }
    }
    for (int i: cand) {
      if (!matched[i]) unmatched_.push_back(i);
    }
  }
  for (int i: unmatched_) matched[i] = false;
  if (!unmatched_.empty()) {
    warnings_.emplace_back("aromatic system could not be kekulized");
  }
  return matched;
}

void Builder::fold_hydrogens() {
  const std::size_t n = atoms_.size();
  std::vector<std::vector<int>> nbrs(n);
  for (const Bond &b: bonds_) {
    nbrs[b.a].push_back(b.b);
    nbrs[b.b].push_back(b.a);
  }
  std::vector<bool> drop(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (atoms_[i].atom.element != "H") continue;
    if (nbrs[i].size() == 1 && atoms_[nbrs[i][0]].atom.element != "H") {
      drop[i] = true;
    } else if (!nbrs[i].empty()) {
      warnings_.push_back("hydrogen kept as node at atom " + std::to_string(i));
    }
  }
  if (std::none_of(drop.begin(), drop.end(), [](bool d) { return d; })) return;

  std::vector<int> remap(n, -1);
  std::vector<RawAtom> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (drop[i]) {
      Atom &heavy = atoms_[nbrs[i][0]].atom;
      heavy.explicit_h = heavy.explicit_h.value_or(0) + 1;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (drop[i]) continue;
    remap[i] = static_cast<int>(kept.size());
    kept.push_back(std::move(atoms_[i]));
  }
  std::vector<Bond> bonds;
  for (const Bond &b: bonds_) {
    if (drop[b.a] || drop[b.b]) continue;
    Bond nb = b;
    nb.a = remap[b.a];
    nb.b = remap[b.b];
    bonds.push_back(nb);
  }
  atoms_ = std::move(kept);
  bonds_ = std::move(bonds);
}

// A bond is a ring bond iff it is not a bridge.
void Builder::mark_rings() {
  const int n = static_cast<int>(atoms_.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);
  for (int e = 0; e < static_cast<int>(bonds_.size()); ++e) {
    adj[bonds_[e].a].emplace_back(bonds_[e].b, e);
    adj[bonds_[e].b].emplace_back(bonds_[e].a, e);
  }
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> bridge(bonds_.size(), false);
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int u, int parent_edge) {
    disc[u] = low[u] = timer++;
    for (auto [v, e]: adj[u]) {
      if (e == parent_edge) continue;
      if (disc[v] >= 0) {
        low[u] = std::min(low[u], disc[v]);
      } else {
        dfs(v, e);
        low[u] = std::min(low[u], low[v]);
        if (low[v] > disc[u]) bridge[e] = true;
      }
    }
  };
  for (int i = 0; i < n; ++i) {
    if (disc[i] < 0) dfs(i, -1);
  }
  for (std::size_t e = 0; e < bonds_.size(); ++e) {
    bonds_[e].in_ring = !bridge[e];
    if (!bridge[e]) {
      atoms_[bonds_[e].a].atom.in_ring = true;
      atoms_[bonds_[e].b].atom.in_ring = true;
    }
  }
}

}  // namespace

std::string_view to_string(SmilesErrc code) {
  switch (code) {
  case SmilesErrc::kEmpty:
    return "EmptyInput";
  case SmilesErrc::kSyntax:
    return "SyntaxError";
  case SmilesErrc::kUnterminatedBracket:
    return "UnterminatedBracket";
  case SmilesErrc::kUnmatchedRingClosure:
    return "UnmatchedRingClosure";
  case SmilesErrc::kUnbalancedBranch:
    return "UnbalancedBranch";
  case SmilesErrc::kValence:
    return "ValenceError";
  }
  return "Unknown";
}

SmilesError::SmilesError(SmilesErrc code, std::size_t position, const std::string &msg)
    : std::runtime_error(std::string(to_string(code)) + " at position "
                         + std::to_string(position) + ": " + msg),
      code_(code), position_(position) { }

bool is_element_symbol(std::string_view symbol) {
  return std::find(kElementSymbols.begin(), kElementSymbols.end(), symbol)
         != kElementSymbols.end();
}

std::string_view to_string(BondOrder order) {
  switch (order) {
  case BondOrder::kSingle:
    return "single";
  case BondOrder::kDouble:
    return "double";
  case BondOrder::kTriple:
    return "triple";
  case BondOrder::kAromatic:
    return "aromatic";
  }
  return "single";
}

std::vector<int> MolecularGraph::degrees() const {
  std::vector<int> deg(atoms.size(), 0);
  for (const Bond &b: bonds) {
    ++deg[b.a];
    ++deg[b.b];
  }
  return deg;
}

std::vector<Token> tokenize(std::string_view smiles) {
  const std::string_view s = strip(smiles);
  if (s.empty()) fail(SmilesErrc::kEmpty, 0, "empty SMILES");

  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const char c = s[i];
    const std::size_t start = i;
    TokenKind kind;
    if (c == '[') {
      const std::size_t close = s.find(']', i);
      const std::size_t reopen = s.find('[', i + 1);
      if (close == std::string_view::npos || reopen < close) {
        fail(SmilesErrc::kUnterminatedBracket, i, "'[' without matching ']'");
      }
      kind = TokenKind::kBracketAtom;
      i = close + 1;
    } else if (c == 'B' || c == 'C') {
      kind = TokenKind::kAtom;
      ++i;
      if (i < s.size() && ((c == 'B' && s[i] == 'r') || (c == 'C' && s[i] == 'l'))) {
        ++i;
      }
    } else if (std::string_view("NOPSFIbcnops").find(c) != std::string_view::npos) {
      kind = TokenKind::kAtom;
      ++i;
    } else if (is_bond_char(c)) {
      kind = TokenKind::kBond;
      ++i;
    } else if (is_digit(c)) {
      kind = TokenKind::kRingClosure;
      ++i;
    } else if (c == '%') {
      if (i + 2 >= s.size() || !is_digit(s[i + 1]) || !is_digit(s[i + 2])) {
        fail(SmilesErrc::kSyntax, i, "'%' must be followed by two digits");
      }
      kind = TokenKind::kRingClosure;
      i += 3;
    } else if (c == '(') {
      kind = TokenKind::kBranchOpen;
      ++i;
    } else if (c == ')') {
      kind = TokenKind::kBranchClose;
      ++i;
    } else if (c == '.') {
      kind = TokenKind::kDot;
      ++i;
    } else {
      fail(SmilesErrc::kSyntax, i, std::string("unexpected character '") + c + "'");
    }
    out.push_back(Token { kind, std::string(s.substr(start, i - start)), start });
  }
  return out;
}

MolecularGraph parse(std::string_view smiles, const ParseOptions &opts) {
  const std::string_view s = strip(smiles);
  const std::vector<Token> tokens = tokenize(s);

  struct OpenRing {
    int atom;
    std::optional<char> bond;
    std::size_t position;
  };

  Builder builder(s);
  int prev = -1;
  std::optional<char> pending;
  std::size_t pending_pos = 0;
  // (atom the branch hangs from, whether the branch has an atom yet)
  std::vector<std::pair<int, bool>> branches;
  std::map<int, OpenRing> rings;

  for (const Token &tok: tokens) {
    switch (tok.kind) {
    case TokenKind::kAtom:
    case TokenKind::kBracketAtom: {
      const int idx = builder.add_atom(tok);
      if (prev >= 0) builder.add_bond(prev, idx, pending, tok.position);
      pending.reset();
      if (!branches.empty()) branches.back().second = true;
      prev = idx;
      break;
    }
    case TokenKind::kBond:
      if (prev < 0) fail(SmilesErrc::kSyntax, tok.position, "bond without preceding atom");
      if (pending) fail(SmilesErrc::kSyntax, tok.position, "consecutive bond symbols");
      pending = tok.text[0];
      pending_pos = tok.position;
      break;
    case TokenKind::kRingClosure: {
      if (prev < 0) fail(SmilesErrc::kSyntax, tok.position, "ring closure without atom");
      const int num = std::stoi(tok.text[0] == '%' ? tok.text.substr(1) : tok.text);
      auto it = rings.find(num);
      if (it == rings.end()) {
        rings.emplace(num, OpenRing { prev, pending, tok.position });
      } else {
        std::optional<char> sym = pending ? pending : it->second.bond;
        if (pending && it->second.bond && *pending != *it->second.bond) {
          fail(SmilesErrc::kSyntax, tok.position, "conflicting ring-closure bonds");
        }
        builder.add_bond(it->second.atom, prev, sym, tok.position);
        rings.erase(it);
      }
      pending.reset();
      break;
    }
    case TokenKind::kBranchOpen:
      if (prev < 0) fail(SmilesErrc::kSyntax, tok.position, "branch without atom");
      if (pending) fail(SmilesErrc::kSyntax, pending_pos, "bond before branch");
      branches.emplace_back(prev, false);
      break;
    case TokenKind::kBranchClose:
      if (branches.empty()) fail(SmilesErrc::kUnbalancedBranch, tok.position, "unmatched ')'");
      if (pending) fail(SmilesErrc::kSyntax, pending_pos, "dangling bond");
      if (!branches.back().second) fail(SmilesErrc::kSyntax, tok.position, "empty branch");
      prev = branches.back().first;
      branches.pop_back();
      break;
    case TokenKind::kDot:
      if (pending) fail(SmilesErrc::kSyntax, pending_pos, "dangling bond");
      if (prev < 0) fail(SmilesErrc::kSyntax, tok.position, "empty fragment");
      prev = -1;
      break;
    }
  }
  if (pending) fail(SmilesErrc::kSyntax, pending_pos, "dangling bond");
  if (prev < 0) fail(SmilesErrc::kSyntax, s.size(), "SMILES ends without an atom");
  if (!branches.empty()) fail(SmilesErrc::kUnbalancedBranch, s.size(), "unclosed '('");
  if (!rings.empty()) {
    const auto &[num, ring] = *rings.begin();
    fail(SmilesErrc::kUnmatchedRingClosure, ring.position,
         "ring bond " + std::to_string(num) + " never closed");
  }
  return builder.finish(opts);
}

std::string to_debug_text(const MolecularGraph &graph) {
  std::ostringstream os;
  for (const Atom &a: graph.atoms) {
    os << "ATOM " << a.index << ' ' << a.element << ' ' << a.formal_charge << ' '
       << (a.aromatic ? 1 : 0) << ' ' << a.implicit_h << '\n';
  }
  for (const Bond &b: graph.bonds) {
    os << "BOND " << b.a << ' ' << b.b << ' ' << to_string(b.order) << '\n';
  }
  return os.str();
}

}  // namespace gcnllm
