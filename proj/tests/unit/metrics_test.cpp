// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "gcnllm/metrics.h"
#include "gcnllm/rng.h"
#include "test_support.h"

namespace gcnllm {
namespace {

TEST(Confusion, Examples) {
  const std::vector<int> pred = { 1, 1, 0, 0 };
  const std::vector<int> truth = { 1, 0, 0, 1 };
  const ConfusionCounts c = confusion(pred, truth);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.tn, 1u);
  EXPECT_EQ(c.fn, 1u);
  const ConfusionCounts same = confusion(truth, truth);
  EXPECT_EQ(same.fp + same.fn, 0u);
  const std::vector<int> inv = { 0, 1, 1, 0 };
  const ConfusionCounts flipped = confusion(inv, truth);
  EXPECT_EQ(flipped.tp + flipped.tn, 0u);
}

TEST(Confusion, Errors) {
  const std::vector<int> a = { 1, 0 };
  const std::vector<int> b = { 1 };
  EXPECT_THROW(confusion(a, b), MetricsError);
  EXPECT_THROW(confusion({}, {}), MetricsError);
  const std::vector<int> bad = { 2, 0 };
  EXPECT_THROW(confusion(bad, a), MetricsError);
}

TEST(Scores, Examples) {
  const Scores s = scores_from_counts({ 2, 1, 0, 1 });
  EXPECT_NEAR(*s.precision, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*s.recall, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(*s.f1, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(s.accuracy, 0.5);
  const Scores none = scores_from_counts({ 0, 0, 3, 2 });
  EXPECT_FALSE(none.precision.has_value());
  EXPECT_TRUE(none.degenerate());
  EXPECT_EQ(none.precision.value_or(0.0), 0.0);
  const Scores perfect = scores_from_counts({ 3, 0, 4, 0 });
  EXPECT_EQ(perfect.accuracy, 1.0);
  EXPECT_EQ(*perfect.f1, 1.0);
  const Scores empty_truth = scores_from_counts({ 0, 0, 5, 0 });
  EXPECT_FALSE(empty_truth.f1.has_value());
}

TEST(Scores, AccuracyMatchesRawRecount) {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<int> pred(n), truth(n);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.below(2));
      truth[i] = static_cast<int>(rng.below(2));
      correct += pred[i] == truth[i];
    }
    const ConfusionCounts c = confusion(pred, truth);
    EXPECT_EQ(c.total(), n);
    EXPECT_DOUBLE_EQ(scores_from_counts(c).accuracy,
                     static_cast<double>(correct) / static_cast<double>(n));
  }
}

TEST(Auc, Examples) {
  EXPECT_EQ(auc_roc(std::vector<double> { 0.9, 0.8, 0.4, 0.35 }, std::vector<int> { 1, 1, 0, 0 }),
            1.0);
  EXPECT_EQ(auc_roc(std::vector<double> { 0.5, 0.5 }, std::vector<int> { 1, 0 }), 0.5);
  EXPECT_EQ(auc_roc(std::vector<double> { 0.9, 0.4, 0.8, 0.2 }, std::vector<int> { 1, 0, 0, 1 }),
            0.5);
}

TEST(Auc, Errors) {
  EXPECT_THROW(auc_roc(std::vector<double> { 0.1, 0.2 }, std::vector<int> { 1, 1 }), MetricsError);
  EXPECT_THROW(auc_roc(std::vector<double> { std::nan(""), 0.2 }, std::vector<int> { 1, 0 }),
               MetricsError);
}

TEST(Auc, MatchesPairCountingWithTies) {
  Rng rng(99);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(99);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.below(3) == 0 ? static_cast<double>(rng.below(5)) / 4.0 : rng.uniform();
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(auc_roc(s, y), testing::pair_count_auc(s, y), 1e-12);
  }
}

TEST(Auc, AntisymmetryAndMonotoneInvariance) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + rng.below(50);
    std::vector<double> s(n), neg(n), warped(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.normal();
      neg[i] = -s[i];
      warped[i] = std::exp(3.0 * s[i]) + 7.0;
      y[i] = static_cast<int>(rng.below(2));
    }
    y[0] = 0;
    y[1] = 1;
    EXPECT_NEAR(auc_roc(s, y) + auc_roc(neg, y), 1.0, 1e-12);
    EXPECT_NEAR(auc_roc(warped, y), auc_roc(s, y), 1e-12);
  }
}

TEST(Roc, CurveShape) {
  const std::vector<double> s = { 0.9, 0.5, 0.5, 0.1 };
  const std::vector<int> y = { 1, 0, 1, 0 };
  const auto curve = roc_curve(s, y);
  ASSERT_EQ(curve.size(), 4u);
  EXPECT_EQ(curve.front().fpr, 0.0);
  EXPECT_EQ(curve.front().tpr, 0.0);
  EXPECT_TRUE(std::isinf(curve.front().threshold));
  EXPECT_EQ(curve.back().fpr, 1.0);
  EXPECT_EQ(curve.back().tpr, 1.0);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GE(curve[i].fpr, curve[i - 1].fpr);
    EXPECT_GE(curve[i].tpr, curve[i - 1].tpr);
  }
}

}  // namespace
}  // namespace gcnllm
