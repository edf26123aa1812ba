// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gcnllm/embedding_store.h"
#include "gcnllm/rng.h"

namespace gcnllm {
namespace {

nlohmann::json fixtures() {
  std::ifstream in(std::string(GCNLLM_FIXTURE_DIR) + "/numeric_fixtures.json");
  return nlohmann::json::parse(in);
}

TEST(EmbeddingTable, ParsesMinimalFile) {
  const EmbeddingTable t = parse_table("#EMBTAB v1 dim=3\nCCO\t0.1 0.2 0.3\n");
  EXPECT_EQ(t.dim(), 3u);
  EXPECT_EQ(t.size(), 1u);
  const auto v = t.lookup("CCO");
  EXPECT_EQ(v[0], 0.1);
  EXPECT_EQ(v[1], 0.2);
  EXPECT_EQ(v[2], 0.3);
}

TEST(EmbeddingTable, DimMismatchReportsLine) {
  try {
    parse_table("#EMBTAB v1 dim=3\n# comment\nCCO\t0.1 0.2\n");
    FAIL();
  } catch (const EmbeddingDimMismatch &e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EmbeddingTable, ConflictingDuplicateAborts) {
  EXPECT_THROW(parse_table("#EMBTAB v1 dim=2\nCCO\t1 2\nCCO\t1 3\n"),
               ConflictingDuplicateError);
}

TEST(EmbeddingTable, IdenticalDuplicateIsMerged) {
  const EmbeddingTable t = parse_table("#EMBTAB v1 dim=2\nCCO\t1 2\nCCO\t1 2\n");
  EXPECT_EQ(t.size(), 1u);
}

TEST(EmbeddingTable, FormatErrors) {
  EXPECT_THROW(parse_table(""), EmbeddingFormatError);
  EXPECT_THROW(parse_table("#EMBTAB v2 dim=3\n"), EmbeddingFormatError);
  EXPECT_THROW(parse_table("#EMBTAB v1 dim=0\n"), EmbeddingFormatError);
  EXPECT_THROW(parse_table("#EMBTAB v1 dim=2\nCCO 1 2\n"), EmbeddingFormatError);
  EXPECT_THROW(parse_table("#EMBTAB v1 dim=2\nCCO\t1 x\n"), EmbeddingFormatError);
  EXPECT_THROW(parse_table("#EMBTAB v1 dim=2\nCCO\t1 nan\n"), EmbeddingFormatError);
  try {
    parse_table("#EMBTAB v1 dim=1\nC\t1\n\t2\n");
    FAIL();
  } catch (const EmbeddingFormatError &e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EmbeddingTable, LookupStripsWhitespaceAndReportsMissing) {
  const EmbeddingTable t = parse_table("#EMBTAB v1 dim=1\n  CCO \t5\n");
  EXPECT_EQ(t.lookup(" CCO")[0], 5.0);
  EXPECT_TRUE(t.contains("CCO"));
  try {
    t.lookup("CCN");
    FAIL();
  } catch (const MissingKeyError &e) {
    EXPECT_EQ(e.smiles(), "CCN");
  }
}

TEST(EmbeddingTable, RoundTripThroughText) {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t dim = 1 + rng.below(12);
    EmbeddingTable t(dim);
    for (int k = 0; k < 10; ++k) {
      std::vector<double> v(dim);
      for (double &x: v) x = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(9)) - 4);
      t.insert("C" + std::string(static_cast<std::size_t>(k), 'C'), v);
    }
    const std::string text = format_table(t);
    const EmbeddingTable back = parse_table(text);
    EXPECT_EQ(format_table(back), text);
    ASSERT_EQ(back.keys(), t.keys());
    for (const std::string &k: t.keys()) {
      for (std::size_t i = 0; i < dim; ++i) {
        EXPECT_NEAR(back.lookup(k)[i], t.lookup(k)[i], 1e-8 * std::abs(t.lookup(k)[i]));
      }
    }
  }
}

TEST(EmbeddingTable, SaveAndLoadFile) {
  const auto path = std::filesystem::temp_directory_path() / "gcnllm_embtab_test.embtab";
  EmbeddingTable t(2, "x");
  const std::vector<double> v = { 0.125, -3.5 };
  t.insert("CCO", v);
  save_table(t, path);
  const EmbeddingTable back = load_table(path);
  EXPECT_EQ(back.lookup("CCO")[0], 0.125);
  EXPECT_EQ(back.lookup("CCO")[1], -3.5);
  std::filesystem::remove(path);
}

TEST(PseudoEmbed, DeterministicUnitNorm) {
  for (const char *s: { "CCO", "c1ccccc1", "N" }) {
    const auto a = pseudo_embed(s, 3, 768);
    EXPECT_EQ(a, pseudo_embed(s, 3, 768));
    double n2 = 0.0;
    for (double x: a) n2 += x * x;
    EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-12);
  }
  EXPECT_NE(pseudo_embed("CCO", 1, 768), pseudo_embed("CCN", 1, 768));
  EXPECT_NE(pseudo_embed("CCO", 1, 768), pseudo_embed("CCO", 2, 768));
  EXPECT_THROW(pseudo_embed("CCO", 1, 0), std::invalid_argument);
}

TEST(PseudoEmbed, MatchesFrozenIndependentFixture) {
  for (const auto &c: fixtures()["pseudo_embed"]) {
    const std::string smiles = c["smiles"];
    const auto v = pseudo_embed(smiles, c["seed"].get<std::uint64_t>(), c["dim"].get<std::size_t>());
    const auto &head = c["head"];
    for (std::size_t i = 0; i < head.size(); ++i) {
      EXPECT_NEAR(v[i], head[i].get<double>(), 1e-15) << smiles << " index " << i;
    }
  }
  EXPECT_EQ(pseudo_embed(" CCO ", 1, 8), pseudo_embed("CCO", 1, 8));
}

}  // namespace
}  // namespace gcnllm
