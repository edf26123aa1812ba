// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "gcnllm/featurizer.h"
#include "test_support.h"

namespace gcnllm {
namespace {

namespace L = node_layout;

std::set<int> hot(const Matrix &f, int row) {
  std::set<int> out;
  for (int c = 0; c < f.cols(); ++c) {
    if (f(row, c) != 0.0) out.insert(c);
  }
  return out;
}

TEST(NodeFeatures, BenzeneCarbon) {
  const Matrix f = node_features(parse("c1ccccc1"));
  ASSERT_EQ(f.cols(), 32);
  EXPECT_EQ(hot(f, 0), (std::set<int> { 0, L::kDegree + 2, L::kCharge + 2, L::kAromatic,
                                        L::kTotalH + 1, L::kInRing }));
}

TEST(NodeFeatures, IsolatedMethane) {
  const Matrix f = node_features(parse("C"));
  EXPECT_EQ(hot(f, 0), (std::set<int> { 0, L::kDegree + 0, L::kCharge + 2, L::kTotalH + 4 }));
}

TEST(NodeFeatures, QuaternaryAmmoniumCenter) {
  const Matrix f = node_features(parse("[N+](C)(C)(C)C"));
  EXPECT_EQ(hot(f, 0), (std::set<int> { 1, L::kDegree + 4, L::kCharge + 3, L::kTotalH + 0 }));
}

TEST(NodeFeatures, UnknownElementAndClipping) {
  const Matrix f = node_features(parse("[Fe+3]"));
  EXPECT_EQ(f(0, 12), 1.0);
  EXPECT_EQ(f(0, L::kCharge + 4), 1.0);  // +3 clipped to +2
  const Matrix g = node_features(parse("[O-2]"));
  EXPECT_EQ(g(0, L::kCharge + 0), 1.0);
}

TEST(NodeFeatures, OneHotBlocksOnRandomMolecules) {
  Rng rng(3);
  testing::MoleculeShape shape;
  shape.benzene_prob = 0.5;
  shape.max_atoms = 14;
  for (int t = 0; t < 100; ++t) {
    const Matrix f = node_features(parse(testing::random_smiles(rng, shape)));
    for (int r = 0; r < f.rows(); ++r) {
      EXPECT_EQ(f.row(r).segment(L::kElement, 13).sum(), 1.0);
      EXPECT_EQ(f.row(r).segment(L::kDegree, 7).sum(), 1.0);
      EXPECT_EQ(f.row(r).segment(L::kCharge, 5).sum(), 1.0);
      EXPECT_EQ(f.row(r).segment(L::kTotalH, 5).sum(), 1.0);
      for (int c = 0; c < 32; ++c) {
        EXPECT_TRUE(f(r, c) == 0.0 || f(r, c) == 1.0);
      }
    }
  }
}

TEST(Adjacency, SingleAtomIsIdentity) {
  const NormalizedAdjacency a = normalized_adjacency(parse("C"));
  ASSERT_EQ(a.entries.size(), 1u);
  EXPECT_EQ(a.entries[0].row, 0);
  EXPECT_EQ(a.entries[0].col, 0);
  EXPECT_DOUBLE_EQ(a.entries[0].weight, 1.0);
}

TEST(Adjacency, BondedPairIsAllHalf) {
  const Matrix d = normalized_adjacency(parse("CC")).to_dense();
  EXPECT_TRUE(d.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(Adjacency, TriangleIsAllThird) {
  const Matrix d = normalized_adjacency(parse("C1CC1")).to_dense();
  EXPECT_TRUE(d.isApprox(Matrix::Constant(3, 3, 1.0 / 3.0), 1e-15));
}

TEST(Adjacency, BondOrderDoesNotWeight) {
  EXPECT_EQ(normalized_adjacency(parse("C=C")).to_dense(),
            normalized_adjacency(parse("CC")).to_dense());
}

// Dense D^-1/2 (A+I) D^-1/2 built straight from the bond list.
Matrix dense_oracle(const MolecularGraph &g) {
  const int n = g.num_atoms();
  Matrix a = Matrix::Identity(n, n);
  for (const Bond &b: g.bonds) {
    a(b.a, b.b) = 1.0;
    a(b.b, b.a) = 1.0;
  }
  const Vector d = a.rowwise().sum();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) /= std::sqrt(d(i) * d(j));
  }
  return a;
}

double lambda_max(const Matrix &m) {
  Vector v = Vector::Ones(m.rows());
  double lambda = 0.0;
  for (int it = 0; it < 2000; ++it) {
    Vector w = m * v;
    lambda = w.norm() / v.norm();
    v = w / w.norm();
  }
  return lambda;
}

TEST(Adjacency, MatchesOracleSymmetricAndSpectrumBounded) {
  Rng rng(8);
  testing::MoleculeShape shape;
  shape.max_atoms = 12;
  shape.max_extra_rings = 2;
  shape.benzene_prob = 0.3;
  for (int t = 0; t < 100; ++t) {
    const MolecularGraph g = parse(testing::random_smiles(rng, shape));
    const NormalizedAdjacency adj = normalized_adjacency(g);
    const Matrix d = adj.to_dense();
    EXPECT_LE((d - dense_oracle(g)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(d, d.transpose());
    for (int i = 0; i < adj.n; ++i) EXPECT_GT(d(i, i), 0.0);
    EXPECT_LE(lambda_max(d), 1.0 + 1e-9);
    for (std::size_t k = 1; k < adj.entries.size(); ++k) {
      const auto &p = adj.entries[k - 1];
      const auto &q = adj.entries[k];
      EXPECT_TRUE(p.row < q.row || (p.row == q.row && p.col < q.col));
    }
  }
}

TEST(Featurizer, PermutationEquivariance) {
  Rng rng(13);
  testing::MoleculeShape shape;
  shape.max_atoms = 10;
  shape.benzene_prob = 0.3;
  for (int t = 0; t < 100; ++t) {
    const MolecularGraph g = parse(testing::random_smiles(rng, shape));
    const std::vector<int> perm = testing::random_permutation(g.num_atoms(), rng);
    const MolecularGraph h = testing::permute_graph(g, perm, rng);
    Matrix p = Matrix::Zero(g.num_atoms(), g.num_atoms());
    for (int i = 0; i < g.num_atoms(); ++i) p(perm[i], i) = 1.0;
    EXPECT_EQ(node_features(h), p * node_features(g));
    EXPECT_LE((normalized_adjacency(h).to_dense()
               - p * normalized_adjacency(g).to_dense() * p.transpose())
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
  }
}

TEST(Batch, TwoSingleAtoms) {
  const std::vector<std::string> s = { "C", "O" };
  const BatchedGraph b = testing::batch_smiles(s);
  EXPECT_EQ(b.num_nodes(), 2);
  EXPECT_EQ(b.graph_index, (std::vector<int> { 0, 1 }));
  EXPECT_EQ(b.adjacency.to_dense(), Matrix::Identity(2, 2));
}

TEST(Batch, SingletonEqualsGraph) {
  const std::vector<std::string> s = { "CC" };
  const BatchedGraph b = testing::batch_smiles(s);
  EXPECT_EQ(b.adjacency.to_dense(), normalized_adjacency(parse("CC")).to_dense());
  EXPECT_EQ(b.features, node_features(parse("CC")));
}

TEST(Batch, EmptyThrows) {
  EXPECT_THROW(batch_graphs({}), EmptyBatchError);
  EXPECT_THROW(batch_featurized({}), EmptyBatchError);
}

TEST(Batch, DirectSumOfIndividuals) {
  Rng rng(17);
  for (int t = 0; t < 50; ++t) {
    const int k = 1 + static_cast<int>(rng.below(5));
    std::vector<std::string> smiles;
    for (int i = 0; i < k; ++i) smiles.push_back(testing::random_smiles(rng));
    const BatchedGraph b = testing::batch_smiles(smiles);
    const Matrix dense = b.adjacency.to_dense();
    EXPECT_EQ(Matrix(b.adjacency_sparse), dense);
    int offset = 0;
    for (int g = 0; g < k; ++g) {
      const MolecularGraph mg = parse(smiles[g]);
      const int n = mg.num_atoms();
      EXPECT_EQ(b.node_counts[g], n);
      EXPECT_EQ(b.molecule_keys[g], smiles[g]);
      EXPECT_EQ(Matrix(b.features.middleRows(offset, n)), node_features(mg));
      EXPECT_EQ(Matrix(dense.block(offset, offset, n, n)), normalized_adjacency(mg).to_dense());
      for (int i = offset; i < offset + n; ++i) EXPECT_EQ(b.graph_index[i], g);
      offset += n;
    }
    for (const auto &e: b.adjacency.entries) {
      EXPECT_EQ(b.graph_index[e.row], b.graph_index[e.col]);
    }
    EXPECT_TRUE(std::is_sorted(b.graph_index.begin(), b.graph_index.end()));
  }
}

}  // namespace
}  // namespace gcnllm
