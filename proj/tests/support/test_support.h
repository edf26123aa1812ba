// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gcnllm/data_pipeline.h"
#include "gcnllm/embedding_store.h"
#include "gcnllm/featurizer.h"
#include "gcnllm/model.h"
#include "gcnllm/rng.h"
#include "gcnllm/smiles.h"

namespace gcnllm::testing {

struct MoleculeShape {
  int min_atoms = 2;
  int max_atoms = 8;
  int max_extra_rings = 1;
  double benzene_prob = 0.0;  // chance the first six atoms form an aromatic ring
  std::vector<std::string> elements = { "C", "C", "C", "C", "N", "O", "S" };
};

// Random connected molecule written as a SMILES string (single bonds, ring
// closures and branches; optionally one benzene ring).
std::string random_smiles(Rng &rng, const MoleculeShape &shape = {});

// Atom i of `g` becomes atom perm[i] of the result; bonds are remapped and
// shuffled into a different order as well.
MolecularGraph permute_graph(const MolecularGraph &g, std::span<const int> perm, Rng &rng);

std::vector<int> random_permutation(int n, Rng &rng);

// (#pos>neg + 0.5 #pos=neg) / (P N), by enumerating every pair.
double pair_count_auc(std::span<const double> scores, std::span<const int> truth);

// Triple-loop product, row-major.
Matrix naive_matmul(const Matrix &a, const Matrix &b);

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng &rng, double scale = 1.0);

struct FiniteDifferenceResult {
  std::string name;
  double max_abs_diff = 0.0;
  double max_analytic = 0.0;
  double max_numeric = 0.0;
  double rel_error = 0.0;  // max_abs_diff / max(max_analytic, max_numeric, floor)
};

// Central differences of the loss w.r.t. every entry of every trainable array.
std::vector<FiniteDifferenceResult> finite_difference_check(
    const ModelParams &params, const ModelConfig &config, const BatchedGraph &batch,
    const Matrix &embeddings, std::span<const int> labels, const LossOptions &opts, double h,
    double denominator_floor);

// Unique random molecules labeled 1 iff they contain nitrogen, balanced.
LabeledDataset contains_nitrogen_dataset(int n, std::uint64_t seed);

// Unique random molecules (labels left 0).
std::vector<std::string> unique_random_smiles(int n, Rng &rng, const MoleculeShape &shape);

EmbeddingTable pseudo_table(const LabeledDataset &data, std::uint64_t seed, std::size_t dim);

BatchedGraph batch_smiles(std::span<const std::string> smiles);

}  // namespace gcnllm::testing
