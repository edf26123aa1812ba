// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gcnllm/rng.h"
#include "gcnllm/smiles.h"

namespace gcnllm {

namespace {

constexpr std::uint64_t kValSplitSalt = 0x76616c5f73706c74ULL;
constexpr std::uint64_t kShuffleSalt = 0x73687566666c6531ULL;

void check_two_classes(std::span<const int> labels) {
  if (labels.empty()) throw EmptyDatasetError();
  bool has[2] = { false, false };
  for (int y: labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    has[y] = true;
  }
  if (!has[0]) throw SingleClassDatasetError(1);
  if (!has[1]) throw SingleClassDatasetError(0);
}

std::vector<int> labels_of(const LabeledDataset &d) {
  std::vector<int> out;
  out.reserve(d.size());
  for (const LabeledRecord &r: d.records) out.push_back(r.label);
  return out;
}

LabeledDataset subset(const LabeledDataset &d, std::span<const std::size_t> idx,
                      const std::string &tag) {
  LabeledDataset out;
  out.provenance = d.provenance.empty() ? tag : d.provenance + ":" + tag;
  out.records.reserve(idx.size());
  for (std::size_t i: idx) out.records.push_back(d.records[i]);
  return out;
}

BatchedGraph batch_of(const PreparedSet &set, std::span<const std::size_t> idx) {
  std::vector<const FeaturizedMolecule *> mols;
  mols.reserve(idx.size());
  for (std::size_t i: idx) mols.push_back(&set.molecules[i]);
  return batch_featurized(mols);
}

void append_number(std::string &out, double v) {
  char buf[40];
  const int n = std::snprintf(buf, sizeof(buf), "%.12g", v);
  out.append(buf, static_cast<std::size_t>(n));
}

}  // namespace

DataValidationError::DataValidationError(std::vector<Rejection> failures)
    : std::runtime_error("validation failed for " + std::to_string(failures.size())
                         + " record(s)"
                         + (failures.empty() ? std::string()
                                             : "; first at line "
                                                   + std::to_string(failures[0].line)
                                                   + ": " + failures[0].reason)),
      failures_(std::move(failures)) { }

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be >= 0");
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in (0, 1)");
  }
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("train_ratio must be in (0, 1)");
  }
  if (eval_batch_size < 1) throw std::invalid_argument("eval_batch_size must be >= 1");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)
      || !(adam_eps > 0.0)) {
    throw std::invalid_argument("invalid Adam constants");
  }
}

SplitIndices stratified_split_indices(std::span<const int> labels, double train_ratio,
                                      std::uint64_t seed) {
  if (!(train_ratio > 0.0 && train_ratio < 1.0)) {
    throw std::invalid_argument("train_ratio must be in (0, 1)");
  }
  check_two_classes(labels);
  Rng rng(seed);
  std::vector<char> in_test(labels.size(), 0);
  for (int c = 0; c < 2; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    const auto n_test = static_cast<std::size_t>(
        std::llround((1.0 - train_ratio) * static_cast<double>(members.size())));
    rng.shuffle(members);
    for (std::size_t k = 0; k < n_test; ++k) in_test[members[k]] = 1;
  }
  SplitIndices out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    (in_test[i] ? out.test : out.train).push_back(i);
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset &data,
                                                           double train_ratio,
                                                           std::uint64_t seed) {
  const std::vector<int> y = labels_of(data);
  const SplitIndices s = stratified_split_indices(y, train_ratio, seed);
  return { subset(data, s.train, "train"), subset(data, s.test, "test") };
}

AdamState adam_init(const ModelConfig &config) {
  return AdamState { zeros_like(config), zeros_like(config), 0 };
}

void adam_step(ModelParams &params, const ModelParams &grads, AdamState &state,
               const AdamOptions &opts) {
  auto p = trainable_arrays(params);
  const auto g = trainable_arrays(grads);
  auto m = trainable_arrays(state.m);
  auto v = trainable_arrays(state.v);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw DimMismatchError("ShapeMismatch: Adam array counts differ");
  }
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (g[a].values.size() != p[a].values.size() || m[a].values.size() != p[a].values.size()
        || v[a].values.size() != p[a].values.size()) {
      throw DimMismatchError("ShapeMismatch: Adam array " + p[a].name);
    }
  }
  ++state.t;
  const double bc1 = 1.0 - std::pow(opts.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(opts.beta2, static_cast<double>(state.t));
  for (std::size_t a = 0; a < p.size(); ++a) {
    double *pv = p[a].values.data();
    const double *gv = g[a].values.data();
    double *mv = m[a].values.data();
    double *vv = v[a].values.data();
    for (std::size_t i = 0; i < p[a].values.size(); ++i) {
      mv[i] = opts.beta1 * mv[i] + (1.0 - opts.beta1) * gv[i];
      vv[i] = opts.beta2 * vv[i] + (1.0 - opts.beta2) * gv[i] * gv[i];
      const double mhat = mv[i] / bc1;
      const double vhat = vv[i] / bc2;
      pv[i] -= opts.lr * mhat / (std::sqrt(vhat) + opts.eps);
    }
  }
}

PreparedSet prepare_set(const LabeledDataset &data, const EmbeddingTable &table,
                        const ModelConfig &config) {
  if (config.uses_projection() && static_cast<int>(table.dim()) != config.embed_dim) {
    throw DimMismatchError("embedding table dim " + std::to_string(table.dim())
                           + " != model embed_dim " + std::to_string(config.embed_dim));
  }
  std::vector<Rejection> failures;
  PreparedSet out;
  out.molecules.reserve(data.size());
  out.labels.reserve(data.size());
  for (const LabeledRecord &r: data.records) {
    std::optional<MolecularGraph> g;
    try {
      g = parse(r.smiles);
    } catch (const SmilesError &e) {
      failures.push_back({ r.line, r.molecule_id, std::string("invalid smiles: ") + e.what() });
      continue;
    }
    if (config.uses_projection() && !table.contains(r.smiles)) {
      failures.push_back({ r.line, r.molecule_id, "MissingKey: " + r.smiles });
      continue;
    }
    if (r.label != 0 && r.label != 1) {
      failures.push_back({ r.line, r.molecule_id, "invalid label" });
      continue;
    }
    out.molecules.push_back(featurize(*g, r.smiles));
    out.labels.push_back(r.label);
  }
  if (!failures.empty()) throw DataValidationError(std::move(failures));
  return out;
}

EvalResult evaluate_prepared(const ModelParams &params, const ModelConfig &config,
                             const PreparedSet &data, const EmbeddingTable &table,
                             int eval_batch_size) {
  if (data.size() == 0) throw EmptyDatasetError();
  if (eval_batch_size < 1) throw std::invalid_argument("eval_batch_size must be >= 1");
  EvalResult r;
  r.prob_active.reserve(data.size());
  r.predicted.reserve(data.size());
  double loss_sum = 0.0;
  const auto step = static_cast<std::size_t>(eval_batch_size);
  for (std::size_t start = 0; start < data.size(); start += step) {
    const std::size_t stop = std::min(data.size(), start + step);
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const BatchedGraph batch = batch_of(data, idx);
    const ForwardTrace t = forward(params, config, batch, table, Mode::kEval);
    const Matrix prob = softmax_rows(t.logits);
    const std::span<const int> y(data.labels.data() + start, stop - start);
    loss_sum += cross_entropy(t.logits, y) * static_cast<double>(stop - start);
    for (Eigen::Index g = 0; g < t.logits.rows(); ++g) {
      r.prob_active.push_back(prob(g, 1));
      r.predicted.push_back(t.logits(g, 1) > t.logits(g, 0) ? 1 : 0);
    }
  }
  r.loss = loss_sum / static_cast<double>(data.size());
  r.counts = confusion(r.predicted, data.labels);
  r.scores = scores_from_counts(r.counts);
  if (r.counts.tp + r.counts.fn > 0 && r.counts.tn + r.counts.fp > 0) {
    r.auc = auc_roc(r.prob_active, data.labels);
  }
  return r;
}

EvalResult evaluate_model(const ModelParams &params, const ModelConfig &config,
                          const LabeledDataset &data, const EmbeddingTable &table,
                          int eval_batch_size) {
  if (data.empty()) throw EmptyDatasetError();
  return evaluate_prepared(params, config, prepare_set(data, table, config), table,
                           eval_batch_size);
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> order,
                                                   int batch_size) {
  if (batch_size < 2) throw std::invalid_argument("batch_size must be >= 2");
  std::vector<std::vector<std::size_t>> out;
  const auto step = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < order.size(); start += step) {
    const std::size_t stop = std::min(order.size(), start + step);
    if (stop - start < 2 && !out.empty()) {
      out.back().insert(out.back().end(), order.begin() + start, order.begin() + stop);
    } else {
      out.emplace_back(order.begin() + start, order.begin() + stop);
    }
  }
  return out;
}

FitResult fit(const ModelConfig &config, ModelParams params, const LabeledDataset &data,
              const EmbeddingTable &table, const TrainConfig &cfg,
              const EpochCallback &on_epoch) {
  cfg.validate();
  auto [train, val] =
      stratified_split(data, 1.0 - cfg.val_fraction, splitmix64(cfg.seed ^ kValSplitSalt));
  return fit(config, std::move(params), train, val, table, cfg, on_epoch);
}

FitResult fit(const ModelConfig &config, ModelParams params, const LabeledDataset &train,
              const LabeledDataset &val, const EmbeddingTable &table, const TrainConfig &cfg,
              const EpochCallback &on_epoch) {
  cfg.validate();
  config.validate();
  check_shapes(params, config);
  if (train.size() < 2) throw std::invalid_argument("training set needs >= 2 records");
  if (val.empty()) throw EmptyDatasetError();
  check_two_classes(labels_of(train));

  // Validate both splits fully before the first step.
  std::vector<Rejection> failures;
  std::optional<PreparedSet> train_set;
  std::optional<PreparedSet> val_set;
  try {
    train_set = prepare_set(train, table, config);
  } catch (const DataValidationError &e) {
    failures = e.failures();
  }
  try {
    val_set = prepare_set(val, table, config);
  } catch (const DataValidationError &e) {
    failures.insert(failures.end(), e.failures().begin(), e.failures().end());
  }
  if (!failures.empty()) throw DataValidationError(std::move(failures));

  LossOptions loss_opts;
  loss_opts.mode = Mode::kTrain;
  if (cfg.class_weighting) {
    const double n = static_cast<double>(train_set->size());
    const auto pos = static_cast<double>(
        std::count(train_set->labels.begin(), train_set->labels.end(), 1));
    loss_opts.class_weights = { n / (2.0 * (n - pos)), n / (2.0 * pos) };
  }
  const AdamOptions adam { cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps };
  AdamState state = adam_init(config);
  Rng rng(splitmix64(cfg.seed ^ kShuffleSalt));

  FitResult result;
  result.train = train;
  result.val = val;
  result.best_params = params;
  double best_f1 = -1.0;
  int since_best = 0;

  std::vector<std::size_t> order(train_set->size());
  std::iota(order.begin(), order.end(), std::size_t { 0 });
  std::vector<int> batch_labels;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    if (cfg.shuffle) rng.shuffle(order);
    double loss_sum = 0.0;
    for (const std::vector<std::size_t> &idx: make_batches(order, cfg.batch_size)) {
      const BatchedGraph batch = batch_of(*train_set, idx);
      batch_labels.clear();
      for (std::size_t i: idx) batch_labels.push_back(train_set->labels[i]);
      loss_opts.dropout_seed = rng.next();
      LossAndGradients lg =
          loss_and_gradients(params, config, batch, table, batch_labels, loss_opts);
      adam_step(params, lg.grads, state, adam);
      update_running_stats(params, config, lg.trace);
      loss_sum += lg.loss * static_cast<double>(idx.size());
    }

    const EvalResult ev = evaluate_prepared(params, config, *val_set, table,
                                            cfg.eval_batch_size);
    EpochReport rep;
    rep.epoch = epoch;
    rep.train_loss = loss_sum / static_cast<double>(train_set->size());
    rep.val_loss = ev.loss;
    rep.val_accuracy = ev.scores.accuracy;
    rep.val_f1 = ev.scores.f1.value_or(0.0);
    rep.val_auc = ev.auc;
    rep.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.push_back(rep);
    if (on_epoch) on_epoch(rep);

    if (rep.val_f1 > best_f1) {
      best_f1 = rep.val_f1;
      result.best_params = params;
      result.best_epoch = epoch;
      result.best_val = ev;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

std::string format_history_csv(std::span<const EpochReport> history, bool record_time) {
  std::string out = "epoch,train_loss,val_loss,val_acc,val_f1,val_auc,seconds\n";
  for (const EpochReport &r: history) {
    out += std::to_string(r.epoch);
    for (double v: { r.train_loss, r.val_loss, r.val_accuracy, r.val_f1 }) {
      out += ',';
      append_number(out, v);
    }
    out += ',';
    if (r.val_auc) append_number(out, *r.val_auc);
    out += ',';
    append_number(out, record_time ? r.seconds : 0.0);
    out += '\n';
  }
  return out;
}

}  // namespace gcnllm
