// SPDX-License-Identifier: Apache-2.0

#include "test_support.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <utility>

namespace gcnllm::testing {

std::string random_smiles(Rng &rng, const MoleculeShape &shape) {
  const int span = shape.max_atoms - shape.min_atoms + 1;
  int n = shape.min_atoms + static_cast<int>(rng.below(static_cast<std::size_t>(span)));
  const bool benzene = shape.benzene_prob > 0.0 && rng.uniform() < shape.benzene_prob;
  if (benzene) n = std::max(n, 6);

  std::vector<std::string> symbol(n);
  std::vector<std::set<int>> adj(n);
  auto add_edge = [&](int a, int b) {
    adj[a].insert(b);
    adj[b].insert(a);
  };
  int first_free = 0;
  if (benzene) {
    for (int i = 0; i < 6; ++i) {
      symbol[i] = "c";
      add_edge(i, (i + 1) % 6);
    }
    first_free = 6;
  }
  for (int i = first_free; i < n; ++i) {
    symbol[i] = shape.elements[rng.below(shape.elements.size())];
    if (i == 0) continue;
    // Aromatic carbons take at most one substituent.
    int parent = 0;
    do {
      parent = static_cast<int>(rng.below(static_cast<std::size_t>(i)));
    } while (symbol[parent] == "c" && adj[parent].size() >= 3);
    add_edge(parent, i);
  }
  const int rings = shape.max_extra_rings > 0
                        ? static_cast<int>(rng.below(static_cast<std::size_t>(shape.max_extra_rings) + 1))
                        : 0;
  for (int r = 0; r < rings && n >= 3; ++r) {
    const int a = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
    const int b = static_cast<int>(rng.below(static_cast<std::size_t>(n)));
    if (a == b || adj[a].count(b) || symbol[a] == "c" || symbol[b] == "c") continue;
    add_edge(a, b);
  }

  // Depth-first spanning tree; non-tree edges become ring closures.
  std::vector<int> parent(n, -1);
  std::vector<char> seen(n, 0);
  std::vector<std::vector<int>> children(n);
  std::function<void(int)> dfs = [&](int u) {
    seen[u] = 1;
    for (int v: adj[u]) {
      if (!seen[v]) {
        parent[v] = u;
        children[u].push_back(v);
        dfs(v);
      }
    }
  };
  dfs(0);

  std::map<std::pair<int, int>, int> open_digit;
  std::set<int> free_digits = { 1, 2, 3, 4, 5, 6, 7, 8, 9 };
  std::string out;
  std::function<void(int)> write = [&](int u) {
    out += symbol[u];
    for (int v: adj[u]) {
      if (v == parent[u] || parent[v] == u) continue;
      const auto key = std::minmax(u, v);
      const auto it = open_digit.find(key);
      if (it == open_digit.end()) {
        const int d = *free_digits.begin();
        free_digits.erase(free_digits.begin());
        open_digit.emplace(key, d);
        out += std::to_string(d);
      } else {
        out += std::to_string(it->second);
        free_digits.insert(it->second);
        open_digit.erase(it);
      }
    }
    const auto &kids = children[u];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      if (k + 1 < kids.size()) {
        out += '(';
        write(kids[k]);
        out += ')';
      } else {
        write(kids[k]);
      }
    }
  };
  write(0);
  return out;
}

MolecularGraph permute_graph(const MolecularGraph &g, std::span<const int> perm, Rng &rng) {
  MolecularGraph out;
  out.source_smiles = g.source_smiles;
  out.warnings = g.warnings;
  out.atoms.resize(g.atoms.size());
  for (std::size_t i = 0; i < g.atoms.size(); ++i) {
    Atom a = g.atoms[i];
    a.index = perm[i];
    out.atoms[static_cast<std::size_t>(perm[i])] = a;
  }
  for (const Bond &b: g.bonds) {
    Bond nb = b;
    nb.a = perm[static_cast<std::size_t>(b.a)];
    nb.b = perm[static_cast<std::size_t>(b.b)];
    if (rng.below(2) == 1) std::swap(nb.a, nb.b);
    out.bonds.push_back(nb);
  }
  rng.shuffle(out.bonds);
  return out;
}

std::vector<int> random_permutation(int n, Rng &rng) {
  std::vector<int> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  rng.shuffle(p);
  return p;
}

double pair_count_auc(std::span<const double> scores, std::span<const int> truth) {
  double credit = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) credit += 1.0;
      else if (scores[i] == scores[j]) credit += 0.5;
    }
  }
  return credit / pairs;
}

Matrix naive_matmul(const Matrix &a, const Matrix &b) {
  Matrix c(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng, double scale) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

std::vector<FiniteDifferenceResult> finite_difference_check(
    const ModelParams &params, const ModelConfig &config, const BatchedGraph &batch,
    const Matrix &embeddings, std::span<const int> labels, const LossOptions &opts, double h,
    double denominator_floor) {
  const LossAndGradients ref =
      loss_and_gradients(params, config, batch, embeddings, labels, opts);
  const auto analytic = trainable_arrays(ref.grads);
  ModelParams work = params;
  auto views = trainable_arrays(work);
  const auto loss_at = [&]() {
    const ForwardTrace t = forward(work, config, batch, embeddings, opts.mode, opts.dropout_seed);
    return cross_entropy(t.logits, labels, opts.class_weights);
  };
  std::vector<FiniteDifferenceResult> out;
  for (std::size_t a = 0; a < views.size(); ++a) {
    FiniteDifferenceResult r;
    r.name = views[a].name;
    for (std::size_t i = 0; i < views[a].values.size(); ++i) {
      double &x = views[a].values[i];
      const double saved = x;
      x = saved + h;
      const double up = loss_at();
      x = saved - h;
      const double down = loss_at();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double exact = analytic[a].values[i];
      r.max_abs_diff = std::max(r.max_abs_diff, std::abs(numeric - exact));
      r.max_analytic = std::max(r.max_analytic, std::abs(exact));
      r.max_numeric = std::max(r.max_numeric, std::abs(numeric));
    }
    r.rel_error =
        r.max_abs_diff / std::max({ r.max_analytic, r.max_numeric, denominator_floor });
    out.push_back(r);
  }
  return out;
}

std::vector<std::string> unique_random_smiles(int n, Rng &rng, const MoleculeShape &shape) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  while (static_cast<int>(out.size()) < n) {
    std::string s = random_smiles(rng, shape);
    if (seen.insert(s).second) out.push_back(std::move(s));
  }
  return out;
}

LabeledDataset contains_nitrogen_dataset(int n, std::uint64_t seed) {
  Rng rng(seed);
  MoleculeShape without;
  without.min_atoms = 3;
  without.max_atoms = 12;
  without.benzene_prob = 0.3;
  without.elements = { "C", "C", "C", "C", "O", "S", "F", "Cl" };
  MoleculeShape with = without;
  with.elements = { "C", "C", "C", "N", "N", "O", "S", "F" };

  LabeledDataset ds;
  ds.provenance = "synthetic:contains_nitrogen";
  std::set<std::string> seen;
  std::size_t line = 2;
  while (static_cast<int>(ds.size()) < n) {
    const int want = static_cast<int>(ds.size() % 2);
    std::string s = random_smiles(rng, want == 1 ? with : without);
    const int label = s.find('N') != std::string::npos ? 1 : 0;
    if (label != want || !seen.insert(s).second) continue;
    ds.records.push_back({ "S" + std::to_string(ds.size() + 1), std::move(s), label, line++ });
  }
  return ds;
}

EmbeddingTable pseudo_table(const LabeledDataset &data, std::uint64_t seed, std::size_t dim) {
  EmbeddingTable t(dim, "pseudo");
  for (const LabeledRecord &r: data.records) {
    if (!t.contains(r.smiles)) t.insert(r.smiles, pseudo_embed(r.smiles, seed, dim));
  }
  return t;
}

BatchedGraph batch_smiles(std::span<const std::string> smiles) {
  std::vector<std::pair<MolecularGraph, std::string>> graphs;
  for (const std::string &s: smiles) graphs.emplace_back(parse(s), s);
  return batch_graphs(graphs);
}

}  // namespace gcnllm::testing
