// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/featurizer.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <tuple>

namespace gcnllm {

namespace {

int element_slot(std::string_view el) {
  static constexpr std::array<std::string_view, 12> kKnown = {
    "C", "N", "O", "S", "F", "Cl", "Br", "I", "P", "B", "Si", "Se",
  };
  const auto it = std::find(kKnown.begin(), kKnown.end(), el);
  return static_cast<int>(it - kKnown.begin());  // 12 == other
}

}  // namespace

Matrix NormalizedAdjacency::to_dense() const {
  Matrix d = Matrix::Zero(n, n);
  for (const AdjacencyEntry &e: entries) d(e.row, e.col) = e.weight;
  return d;
}

SparseMatrix NormalizedAdjacency::to_sparse() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(entries.size());
  for (const AdjacencyEntry &e: entries) trips.emplace_back(e.row, e.col, e.weight);
  SparseMatrix m(n, n);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

Matrix node_features(const MolecularGraph &graph) {
  using namespace node_layout;
  const std::vector<int> deg = graph.degrees();
  Matrix f = Matrix::Zero(graph.num_atoms(), kWidth);
  for (const Atom &a: graph.atoms) {
    const int r = a.index;
    f(r, kElement + element_slot(a.element)) = 1.0;
    f(r, kDegree + std::clamp(deg[r], 0, 6)) = 1.0;
    f(r, kCharge + std::clamp(a.formal_charge, -2, 2) + 2) = 1.0;
    f(r, kAromatic) = a.aromatic ? 1.0 : 0.0;
    f(r, kTotalH + std::clamp(a.total_h(), 0, 4)) = 1.0;
    f(r, kInRing) = a.in_ring ? 1.0 : 0.0;
  }
  return f;
}

NormalizedAdjacency normalized_adjacency(const MolecularGraph &graph) {
  const int n = graph.num_atoms();
  const std::vector<int> deg = graph.degrees();
  std::vector<double> inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i] + 1.0);

  NormalizedAdjacency adj;
  adj.n = n;
  adj.entries.reserve(n + 2 * graph.bonds.size());
  for (int i = 0; i < n; ++i) adj.entries.push_back({ i, i, inv_sqrt[i] * inv_sqrt[i] });
  for (const Bond &b: graph.bonds) {
    const double w = inv_sqrt[b.a] * inv_sqrt[b.b];
    adj.entries.push_back({ b.a, b.b, w });
    adj.entries.push_back({ b.b, b.a, w });
  }
  std::sort(adj.entries.begin(), adj.entries.end(),
            [](const AdjacencyEntry &x, const AdjacencyEntry &y) {
              return std::tie(x.row, x.col) < std::tie(y.row, y.col);
            });
  return adj;
}

FeaturizedMolecule featurize(const MolecularGraph &graph, std::string key) {
  return { node_features(graph), normalized_adjacency(graph), std::move(key) };
}

BatchedGraph batch_featurized(std::span<const FeaturizedMolecule *const> mols) {
  if (mols.empty()) throw EmptyBatchError();
  int total = 0;
  std::size_t nnz = 0;
  for (const FeaturizedMolecule *m: mols) {
    total += static_cast<int>(m->features.rows());
    nnz += m->adjacency.entries.size();
  }

  BatchedGraph out;
  out.features.resize(total, node_layout::kWidth);
  out.adjacency.n = total;
  out.adjacency.entries.reserve(nnz);
  out.graph_index.reserve(total);
  out.molecule_keys.reserve(mols.size());
  out.node_counts.reserve(mols.size());

  int offset = 0;
  for (std::size_t g = 0; g < mols.size(); ++g) {
    const FeaturizedMolecule &m = *mols[g];
    const int n = static_cast<int>(m.features.rows());
    out.features.middleRows(offset, n) = m.features;
    for (const AdjacencyEntry &e: m.adjacency.entries) {
      out.adjacency.entries.push_back({ e.row + offset, e.col + offset, e.weight });
    }
    out.graph_index.insert(out.graph_index.end(), n, static_cast<int>(g));
    out.molecule_keys.push_back(m.key);
    out.node_counts.push_back(n);
    offset += n;
  }
  out.adjacency_sparse = out.adjacency.to_sparse();
  return out;
}

BatchedGraph batch_graphs(
    std::span<const std::pair<MolecularGraph, std::string>> graphs) {
  if (graphs.empty()) throw EmptyBatchError();
  std::vector<FeaturizedMolecule> mols;
  mols.reserve(graphs.size());
  for (const auto &[graph, key]: graphs) mols.push_back(featurize(graph, key));
  std::vector<const FeaturizedMolecule *> ptrs;
  for (const FeaturizedMolecule &m: mols) ptrs.push_back(&m);
  return batch_featurized(ptrs);
}

}  // namespace gcnllm
