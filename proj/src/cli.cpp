// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/cli.h"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include <CLI11.hpp>

#include "gcnllm/checkpoint.h"
#include "gcnllm/csv.h"
#include "gcnllm/data_pipeline.h"
#include "gcnllm/embedding_store.h"
#include "gcnllm/model.h"
#include "gcnllm/run_config.h"
#include "gcnllm/smiles.h"
#include "gcnllm/svg_report.h"
#include "gcnllm/trainer.h"

namespace gcnllm {

namespace {

namespace fs = std::filesystem;

struct UsageError: std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string fmt_opt(const std::optional<double> &v) { return v ? fmt(*v) : "undefined"; }

void print_rejections(std::ostream &err, std::span<const Rejection> rejected) {
  for (const Rejection &r: rejected) {
    err << "  line " << r.line << " [" << r.molecule_id << "]: " << r.reason << '\n';
  }
}

// Fusion mode `none` never reads the table; an empty placeholder stands in.
EmbeddingTable load_embeddings(const std::string &path, const ModelConfig &config) {
  if (path.empty()) {
    if (config.uses_projection()) {
      throw UsageError("--emb is required for fusion mode " + std::string(to_string(config.fusion_mode)));
    }
    return EmbeddingTable(1);
  }
  return load_table(path);
}

MetricsRow to_metrics_row(const std::string &name, const EvalResult &ev) {
  MetricsRow r;
  r.dataset = name;
  r.accuracy = ev.scores.accuracy;
  r.precision = ev.scores.precision;
  r.recall = ev.scores.recall;
  r.f1 = ev.scores.f1;
  r.auc_roc = ev.auc;
  r.tp = ev.counts.tp;
  r.fp = ev.counts.fp;
  r.tn = ev.counts.tn;
  r.fn = ev.counts.fn;
  return r;
}

struct PrepareArgs {
  std::string in, out, reject, mode = "ic50";
  double threshold = 200.0;
  bool drop_conflicts = false;
  bool strip_salts = false;
};

int cmd_prepare(const PrepareArgs &a, std::ostream &out, std::ostream &err) {
  PrepareOptions opts;
  opts.mode = parse_ingest_mode(a.mode);
  opts.threshold_nm = a.threshold;
  opts.drop_conflicts = a.drop_conflicts;
  opts.strip_fragments = a.strip_salts;
  const PrepareResult res = prepare_dataset(read_file(a.in), opts, a.in);
  write_file(a.out, format_clean_csv(res.dataset));
  write_file(a.reject, format_rejections_jsonl(res.rejected));
  for (const LabelConflict &c: res.conflicts) {
    err << "warning: conflicting labels for " << c.smiles << " at lines";
    for (std::size_t l: c.lines) err << ' ' << l;
    err << (a.drop_conflicts ? " (removed)\n" : " (kept)\n");
  }
  out << "kept " << res.dataset.size() << " records (" << res.dataset.count_label(1)
      << " active, " << res.dataset.count_label(0) << " inactive), rejected "
      << res.rejected.size() << '\n';
  return kExitOk;
}

struct PseudoArgs {
  std::string in, out;
  std::size_t dim = 768;
  std::uint64_t seed = 0;
};

int cmd_pseudo_embed(const PseudoArgs &a, std::ostream &out) {
  const std::vector<CsvRow> rows = parse_csv(read_file(a.in));
  if (rows.empty()) throw MissingColumnError("smiles");
  std::size_t col = rows[0].fields.size();
  for (std::size_t i = 0; i < rows[0].fields.size(); ++i) {
    if (rows[0].fields[i] == "smiles") col = i;
  }
  if (col == rows[0].fields.size()) throw MissingColumnError("smiles");
  EmbeddingTable table(a.dim, "pseudo seed=" + std::to_string(a.seed));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (col >= rows[r].fields.size() || rows[r].fields[col].empty()) {
      throw CsvError(rows[r].line, "missing smiles");
    }
    const std::string &smiles = rows[r].fields[col];
    if (!table.contains(smiles)) table.insert(smiles, pseudo_embed(smiles, a.seed, a.dim));
  }
  save_table(table, a.out);
  out << "wrote " << table.size() << " embeddings of dim " << a.dim << '\n';
  return kExitOk;
}

struct TrainArgs {
  std::string data, emb, config, out, history, test_out;
  std::vector<std::string> sets;
  bool quiet = false;
};

int cmd_train(const TrainArgs &a, std::ostream &out) {
  RunConfig rc = a.config.empty() ? RunConfig {} : load_run_config(a.config);
  apply_overrides(rc, a.sets);
  rc.model.validate();
  rc.train.validate();

  const LabeledDataset data = read_labeled_dataset(a.data);
  const EmbeddingTable table = load_embeddings(a.emb, rc.model);
  auto [train, test] = stratified_split(data, rc.train.train_ratio, rc.train.seed);
  if (!a.test_out.empty()) write_file(a.test_out, format_clean_csv(test));

  const ModelParams init = init_params(rc.model, rc.train.seed);
  const EpochCallback progress = [&](const EpochReport &r) {
    if (a.quiet) return;
    out << "epoch " << r.epoch << " train_loss " << fmt(r.train_loss) << " val_loss "
        << fmt(r.val_loss) << " val_f1 " << fmt(r.val_f1) << " val_auc " << fmt_opt(r.val_auc)
        << '\n';
  };
  const FitResult res = fit(rc.model, init, train, table, rc.train, progress);

  save_checkpoint(Checkpoint { rc.model, res.best_params, rc.train.seed }, a.out);
  write_file(a.history, format_history_csv(res.history, rc.train.record_time));
  out << "best epoch " << res.best_epoch << " val_f1 " << fmt_opt(res.best_val.scores.f1)
      << " (train " << res.train.size() << ", val " << res.val.size() << ", test "
      << test.size() << ")\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string data, emb, model, out, name;
  int eval_batch_size = 256;
};

int cmd_evaluate(const EvaluateArgs &a, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const LabeledDataset data = read_labeled_dataset(a.data);
  const EmbeddingTable table = load_embeddings(a.emb, ckpt.config);
  const EvalResult ev = evaluate_model(ckpt.params, ckpt.config, data, table, a.eval_batch_size);
  const std::string name = a.name.empty() ? fs::path(a.data).stem().string() : a.name;
  const MetricsRow row = to_metrics_row(name, ev);
  write_file(a.out, format_metrics_csv(std::span(&row, 1)));
  out << name << ": accuracy " << fmt(ev.scores.accuracy) << " precision "
      << fmt_opt(ev.scores.precision) << " recall " << fmt_opt(ev.scores.recall) << " f1 "
      << fmt_opt(ev.scores.f1) << " auc " << fmt_opt(ev.auc) << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::vector<std::string> smiles;
  std::string emb, model;
};

int cmd_predict(const PredictArgs &a, std::ostream &out) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const EmbeddingTable table = load_embeddings(a.emb, ckpt.config);
  LabeledDataset ds;
  for (std::size_t i = 0; i < a.smiles.size(); ++i) {
    ds.records.push_back({ "smiles" + std::to_string(i + 1), a.smiles[i], 0, i + 1 });
  }
  const PreparedSet set = prepare_set(ds, table, ckpt.config);
  std::vector<const FeaturizedMolecule *> mols;
  for (const FeaturizedMolecule &m: set.molecules) mols.push_back(&m);
  const BatchedGraph batch = batch_featurized(mols);
  const ForwardTrace t = forward(ckpt.params, ckpt.config, batch, table, Mode::kEval);
  const Matrix prob = softmax_rows(t.logits);
  for (std::size_t i = 0; i < a.smiles.size(); ++i) {
    const auto g = static_cast<Eigen::Index>(i);
    const int cls = t.logits(g, 1) > t.logits(g, 0) ? 1 : 0;
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", prob(g, 1));
    out << a.smiles[i] << '\t' << cls << '\t' << buf << '\n';
  }
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string out, merged, title;
};

int cmd_report(const ReportArgs &a, std::ostream &out) {
  std::vector<MetricsRow> rows;
  for (const std::string &path: a.metrics) {
    std::vector<MetricsRow> part;
    try {
      part = parse_metrics_csv(read_file(path));
    } catch (const CsvError &e) {
      throw std::runtime_error(path + ": " + e.what());
    }
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string merged =
      a.merged.empty() ? fs::path(a.out).replace_extension(".csv").string() : a.merged;
  write_file(a.out, render_bar_chart(rows, a.title));
  write_file(merged, format_metrics_csv(rows));
  out << "wrote " << a.out << " and " << merged << " (" << rows.size() << " datasets)\n";
  return kExitOk;
}

std::string config_key_help() {
  std::string s = "Config keys (config file or --set):\n";
  for (const ConfigKey &k: config_keys()) s += "  " + k.name + ": " + k.description + "\n";
  return s;
}

}  // namespace

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app { "Graph convolutional classifier fused with precomputed molecule embeddings",
                 "gcnllm" };
  app.require_subcommand(1);
  app.fallthrough(false);

  PrepareArgs pa;
  auto *prepare = app.add_subcommand("prepare", "Clean, label and deduplicate a raw CSV");
  prepare->add_option("--in", pa.in, "Raw CSV (molecule_id,smiles,ic50_nm or label)")->required();
  prepare->add_option("--mode", pa.mode, "ic50 (threshold IC50) or labeled (0/1 label column)")
      ->check(CLI::IsMember({ "ic50", "labeled" }))
      ->capture_default_str();
  prepare->add_option("--out", pa.out, "Clean CSV output (molecule_id,smiles,label)")->required();
  prepare->add_option("--reject", pa.reject, "JSON-lines rejection report")->required();
  prepare->add_option("--threshold", pa.threshold, "Active if IC50 (nM) <= threshold")
      ->capture_default_str();
  prepare->add_flag("--drop-conflicts", pa.drop_conflicts,
                    "Remove every record of a SMILES with conflicting labels");
  prepare->add_flag("--strip-salts", pa.strip_salts,
                    "Keep only the largest dot-separated fragment of each SMILES");

  PseudoArgs ea;
  auto *pseudo = app.add_subcommand("pseudo-embed", "Write a deterministic test embedding table");
  pseudo->add_option("--in", ea.in, "CSV with a smiles column")->required();
  pseudo->add_option("--dim", ea.dim, "Embedding width")->capture_default_str()
      ->check(CLI::PositiveNumber);
  pseudo->add_option("--seed", ea.seed, "Generator seed")->capture_default_str();
  pseudo->add_option("--out", ea.out, "EMBTAB output path")->required();

  TrainArgs ta;
  auto *train = app.add_subcommand("train", "Split, train with early stopping, save best model");
  train->add_option("--data", ta.data, "Clean CSV (molecule_id,smiles,label)")->required();
  train->add_option("--emb", ta.emb, "EMBTAB embedding table (optional for fusion_mode=none)");
  train->add_option("--config", ta.config, "Config file of key = value lines");
  train->add_option("--set", ta.sets, "Override a config key, key=value (repeatable)");
  train->add_option("--out", ta.out, "Checkpoint output path")->required();
  train->add_option("--history", ta.history, "Per-epoch history CSV output")->required();
  train->add_option("--test-out", ta.test_out, "Write the held-out test split as a clean CSV");
  train->add_flag("--quiet", ta.quiet, "Do not print per-epoch progress");
  train->footer(config_key_help());

  EvaluateArgs va;
  auto *evaluate = app.add_subcommand("evaluate", "Score a labeled CSV with a checkpoint");
  evaluate->add_option("--data", va.data, "Clean CSV (molecule_id,smiles,label)")->required();
  evaluate->add_option("--emb", va.emb, "EMBTAB embedding table (optional for fusion_mode=none)");
  evaluate->add_option("--model", va.model, "Checkpoint path")->required();
  evaluate->add_option("--out", va.out, "Metrics CSV output")->required();
  evaluate->add_option("--name", va.name, "Dataset name in the metrics row (default: file stem)");
  evaluate->add_option("--eval-batch-size", va.eval_batch_size, "Graphs per forward pass")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  PredictArgs pr;
  auto *predict = app.add_subcommand("predict", "Print class and class-1 probability per SMILES");
  predict->add_option("--smiles", pr.smiles, "SMILES to classify (repeatable)")->required();
  predict->add_option("--emb", pr.emb, "EMBTAB embedding table (optional for fusion_mode=none)");
  predict->add_option("--model", pr.model, "Checkpoint path")->required();

  ReportArgs ra;
  auto *report = app.add_subcommand("report", "Grouped bar chart and merged CSV of metrics files");
  report->add_option("--metrics", ra.metrics, "Metrics CSVs written by evaluate")->required();
  report->add_option("--out", ra.out, "SVG output path")->required();
  report->add_option("--merged", ra.merged, "Merged CSV path (default: --out with .csv)");
  report->add_option("--title", ra.title, "Chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands()[0]->help());
    return kExitUsage;
  }

  try {
    if (*prepare) return cmd_prepare(pa, out, err);
    if (*pseudo) return cmd_pseudo_embed(ea, out);
    if (*train) return cmd_train(ta, out);
    if (*evaluate) return cmd_evaluate(va, out);
    if (*predict) return cmd_predict(pr, out);
    if (*report) return cmd_report(ra, out);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataValidationError &e) {
    err << "error: " << e.what() << '\n';
    print_rejections(err, e.failures());
    return kExitValidation;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  std::vector<const char *> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("gcnllm");
  for (const std::string &a: args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gcnllm
