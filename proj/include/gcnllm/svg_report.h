// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gcnllm {

// One row of a metrics CSV:
// dataset,accuracy,precision,recall,f1,auc_roc,tp,fp,tn,fn
struct MetricsRow {
  std::string dataset;
  double accuracy = 0.0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
  std::optional<double> auc_roc;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
};

inline constexpr std::string_view kMetricsHeader =
    "dataset,accuracy,precision,recall,f1,auc_roc,tp,fp,tn,fn";

// Absent values are written as empty fields.
std::string format_metrics_csv(std::span<const MetricsRow> rows);
std::vector<MetricsRow> parse_metrics_csv(std::string_view text);

// Grouped bar chart (one group per dataset, one bar per score) as SVG 1.1.
std::string render_bar_chart(std::span<const MetricsRow> rows, std::string_view title = {});

}  // namespace gcnllm
