// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace gcnllm {

class MetricsError: public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Class 1 is the positive class.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
};

ConfusionCounts confusion(std::span<const int> pred, std::span<const int> truth);

// Undefined ratios (zero denominators) are nullopt; value_or(0.0) is the
// reported number.
struct Scores {
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;

  bool degenerate() const { return !precision || !recall || !f1; }
};

Scores scores_from_counts(const ConfusionCounts &c);

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;  // +inf for the (0, 0) start
};

// One point per distinct score (descending), plus the (0, 0) start.
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> truth);

// Trapezoidal area under roc_curve(); ties contribute half credit.
double auc_roc(std::span<const double> scores, std::span<const int> truth);

}  // namespace gcnllm
