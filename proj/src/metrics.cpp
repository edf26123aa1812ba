// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/metrics.h"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace gcnllm {

namespace {

void check_binary(std::span<const int> v, const char *what) {
  for (int x: v) {
    if (x != 0 && x != 1) {
      throw MetricsError(std::string(what) + ": labels must be 0 or 1, got "
                         + std::to_string(x));
    }
  }
}

}  // namespace

ConfusionCounts confusion(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw MetricsError("confusion: LengthMismatch");
  if (pred.empty()) throw MetricsError("confusion: Empty");
  check_binary(pred, "confusion");
  check_binary(truth, "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1) {
      (truth[i] == 1 ? c.tp : c.fp) += 1;
    } else {
      (truth[i] == 1 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

Scores scores_from_counts(const ConfusionCounts &c) {
  Scores s;
  const double total = static_cast<double>(c.total());
  s.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 0.0;
  if (c.tp + c.fp > 0) s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (s.precision && s.recall) {
    const double sum = *s.precision + *s.recall;
    s.f1 = sum > 0 ? 2.0 * *s.precision * *s.recall / sum : 0.0;
  } else if (s.precision || s.recall) {
    // One side defined: F1 is 0 when the defined side is 0 or the other side
    // has no support.
    s.f1 = 0.0;
  }
  return s;
}

namespace {

struct CountPoint {
  std::size_t fp;
  std::size_t tp;
  double threshold;
};

struct CountCurve {
  std::vector<CountPoint> points;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

CountCurve count_curve(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw MetricsError("roc: LengthMismatch");
  check_binary(truth, "roc");
  for (double s: scores) {
    if (std::isnan(s)) throw MetricsError("roc: NaN score");
  }
  CountCurve c;
  c.n_pos = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), 1));
  c.n_neg = truth.size() - c.n_pos;
  if (c.n_pos == 0 || c.n_neg == 0) throw MetricsError("roc: SingleClass");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t { 0 });
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  c.points.push_back({ 0, 0, std::numeric_limits<double>::infinity() });
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double thr = scores[order[i]];
    while (i < order.size() && scores[order[i]] == thr) {
      (truth[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    c.points.push_back({ fp, tp, thr });
  }
  return c;
}

}  // namespace

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> truth) {
  const CountCurve c = count_curve(scores, truth);
  std::vector<RocPoint> out;
  out.reserve(c.points.size());
  for (const CountPoint &p: c.points) {
    out.push_back({ static_cast<double>(p.fp) / static_cast<double>(c.n_neg),
                    static_cast<double>(p.tp) / static_cast<double>(c.n_pos), p.threshold });
  }
  return out;
}

double auc_roc(std::span<const double> scores, std::span<const int> truth) {
  const CountCurve c = count_curve(scores, truth);
  // Twice the area in count units: each trapezoid is dfp * (tp_prev + tp).
  std::uint64_t area2 = 0;
  for (std::size_t k = 1; k < c.points.size(); ++k) {
    const std::uint64_t dfp = c.points[k].fp - c.points[k - 1].fp;
    area2 += dfp * (c.points[k].tp + c.points[k - 1].tp);
  }
  return static_cast<double>(area2)
         / (2.0 * static_cast<double>(c.n_pos) * static_cast<double>(c.n_neg));
}

}  // namespace gcnllm
