// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/svg_report.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>

#include "gcnllm/csv.h"

namespace gcnllm {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string opt(const std::optional<double> &v) { return v ? num(*v) : std::string(); }

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c: s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

std::optional<double> parse_opt(const std::string &s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  char *end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw CsvError(line, "bad number '" + s + "'");
  return v;
}

std::size_t parse_count(const std::string &s, std::size_t line) {
  char *end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw CsvError(line, "bad count '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

std::string format_metrics_csv(std::span<const MetricsRow> rows) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const MetricsRow &r: rows) {
    const std::string fields[] = {
      r.dataset, num(r.accuracy), opt(r.precision), opt(r.recall), opt(r.f1), opt(r.auc_roc),
      std::to_string(r.tp), std::to_string(r.fp), std::to_string(r.tn), std::to_string(r.fn),
    };
    out += csv_line(fields);
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(std::string_view text) {
  const std::vector<CsvRow> rows = parse_csv(text);
  if (rows.empty()) throw CsvError(1, "empty metrics file");
  std::string header;
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    if (i > 0) header += ',';
    header += rows[0].fields[i];
  }
  if (header != kMetricsHeader) throw CsvError(rows[0].line, "unexpected metrics header");
  std::vector<MetricsRow> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const CsvRow &row = rows[i];
    if (row.fields.size() != 10) throw CsvError(row.line, "expected 10 fields");
    MetricsRow r;
    r.dataset = row.fields[0];
    const auto acc = parse_opt(row.fields[1], row.line);
    if (!acc) throw CsvError(row.line, "missing accuracy");
    r.accuracy = *acc;
    r.precision = parse_opt(row.fields[2], row.line);
    r.recall = parse_opt(row.fields[3], row.line);
    r.f1 = parse_opt(row.fields[4], row.line);
    r.auc_roc = parse_opt(row.fields[5], row.line);
    r.tp = parse_count(row.fields[6], row.line);
    r.fp = parse_count(row.fields[7], row.line);
    r.tn = parse_count(row.fields[8], row.line);
    r.fn = parse_count(row.fields[9], row.line);
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_bar_chart(std::span<const MetricsRow> rows, std::string_view title) {
  static constexpr std::array<const char *, 5> kNames = { "Accuracy", "Precision", "Recall",
                                                          "F1", "AUC-ROC" };
  static constexpr std::array<const char *, 5> kColors = { "#4c72b0", "#dd8452", "#55a868",
                                                           "#c44e52", "#8172b3" };
  const double bar_w = 18.0;
  const double group_gap = 30.0;
  const double left = 60.0;
  const double top = 50.0;
  const double plot_h = 240.0;
  const double group_w = bar_w * kNames.size() + group_gap;
  const double width =
      left + std::max<double>(1, rows.size()) * group_w + 150.0;
  const double height = top + plot_h + 70.0;

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + px(width)
       + "\" height=\"" + px(height) + "\" viewBox=\"0 0 " + px(width) + " " + px(height)
       + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + px(width / 2) + "\" y=\"25\" text-anchor=\"middle\" "
       "font-family=\"sans-serif\" font-size=\"16\">"
       + xml_escape(title.empty() ? "Classification metrics" : title) + "</text>\n";

  for (int tick = 0; tick <= 10; tick += 2) {
    const double y = top + plot_h - plot_h * tick / 10.0;
    s += "<line x1=\"" + px(left) + "\" y1=\"" + px(y) + "\" x2=\"" + px(width - 140.0)
         + "\" y2=\"" + px(y) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + px(left - 6) + "\" y=\"" + px(y + 4)
         + "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
         + num(tick / 10.0) + "</text>\n";
  }
  s += "<line x1=\"" + px(left) + "\" y1=\"" + px(top) + "\" x2=\"" + px(left) + "\" y2=\""
       + px(top + plot_h) + "\" stroke=\"black\"/>\n";

  for (std::size_t g = 0; g < rows.size(); ++g) {
    const MetricsRow &r = rows[g];
    const std::array<std::optional<double>, 5> vals = { r.accuracy, r.precision, r.recall,
                                                        r.f1, r.auc_roc };
    const double x0 = left + group_gap / 2 + g * group_w;
    for (std::size_t m = 0; m < vals.size(); ++m) {
      const double v = std::clamp(vals[m].value_or(0.0), 0.0, 1.0);
      const double h = plot_h * v;
      s += "<rect x=\"" + px(x0 + m * bar_w) + "\" y=\"" + px(top + plot_h - h)
           + "\" width=\"" + px(bar_w - 2) + "\" height=\"" + px(h) + "\" fill=\""
           + kColors[m] + "\"><title>" + xml_escape(r.dataset) + " " + kNames[m] + ": "
           + (vals[m] ? num(*vals[m]) : std::string("undefined")) + "</title></rect>\n";
    }
    s += "<text x=\"" + px(x0 + bar_w * vals.size() / 2) + "\" y=\"" + px(top + plot_h + 18)
         + "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
         + xml_escape(r.dataset) + "</text>\n";
  }

  const double lx = width - 130.0;
  for (std::size_t m = 0; m < kNames.size(); ++m) {
    const double y = top + 10 + m * 20.0;
    s += "<rect x=\"" + px(lx) + "\" y=\"" + px(y - 10) + "\" width=\"12\" height=\"12\" fill=\""
         + kColors[m] + "\"/>\n";
    s += "<text x=\"" + px(lx + 18) + "\" y=\"" + px(y)
         + "\" font-family=\"sans-serif\" font-size=\"12\">" + kNames[m] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace gcnllm
