// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gcnllm/smiles.h"

namespace gcnllm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Column layout of a node feature row.
namespace node_layout {
inline constexpr int kElement = 0;    // C N O S F Cl Br I P B Si Se other
inline constexpr int kDegree = 13;    // 0..6
inline constexpr int kCharge = 20;    // -2..+2
inline constexpr int kAromatic = 25;
inline constexpr int kTotalH = 26;    // 0..4
inline constexpr int kInRing = 31;
inline constexpr int kWidth = 32;
}  // namespace node_layout

struct AdjacencyEntry {
  int row;
  int col;
  double weight;
};

// D^-1/2 (A + I) D^-1/2 with D the degree of A + I, stored as a row-major
// sorted entry list.
struct NormalizedAdjacency {
  int n = 0;
  std::vector<AdjacencyEntry> entries;

  Matrix to_dense() const;
  SparseMatrix to_sparse() const;
};

Matrix node_features(const MolecularGraph &graph);

NormalizedAdjacency normalized_adjacency(const MolecularGraph &graph);

// Featurized form of one molecule, reusable across mini-batches.
struct FeaturizedMolecule {
  Matrix features;
  NormalizedAdjacency adjacency;
  std::string key;
};

FeaturizedMolecule featurize(const MolecularGraph &graph, std::string key);

class EmptyBatchError: public std::invalid_argument {
 public:
  EmptyBatchError(): std::invalid_argument("EmptyBatch: no graphs to batch") { }
};

// Block-diagonal union of several molecules.
struct BatchedGraph {
  Matrix features;
  NormalizedAdjacency adjacency;
  SparseMatrix adjacency_sparse;
  std::vector<int> graph_index;
  std::vector<std::string> molecule_keys;
  std::vector<int> node_counts;

  int num_graphs() const { return static_cast<int>(molecule_keys.size()); }
  int num_nodes() const { return static_cast<int>(graph_index.size()); }
};

BatchedGraph batch_graphs(
    std::span<const std::pair<MolecularGraph, std::string>> graphs);

BatchedGraph batch_featurized(std::span<const FeaturizedMolecule *const> mols);

}  // namespace gcnllm
