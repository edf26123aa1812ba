// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gcnllm/data_pipeline.h"
#include "gcnllm/embedding_store.h"
#include "gcnllm/featurizer.h"
#include "gcnllm/metrics.h"
#include "gcnllm/model.h"

namespace gcnllm {

class EmptyDatasetError: public std::invalid_argument {
 public:
  EmptyDatasetError(): std::invalid_argument("EmptyDataset: no records") { }
};

class SingleClassDatasetError: public std::invalid_argument {
 public:
  explicit SingleClassDatasetError(int present)
      : std::invalid_argument("SingleClassDataset: only class " + std::to_string(present)
                              + " present") { }
};

// Raised before any optimization step; carries the full failure list.
class DataValidationError: public std::runtime_error {
 public:
  explicit DataValidationError(std::vector<Rejection> failures);
  const std::vector<Rejection> &failures() const noexcept { return failures_; }

 private:
  std::vector<Rejection> failures_;
};

struct TrainConfig {
  double learning_rate = 0.001;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  double val_fraction = 0.1;
  double train_ratio = 0.8;  // outer train/test split used by the CLI
  std::uint64_t seed = 0;
  bool shuffle = true;
  bool class_weighting = false;  // inverse-frequency loss weights
  bool record_time = false;      // write wall-clock seconds into the history CSV
  int eval_batch_size = 256;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per class c, round((1 - train_ratio) * n_c) indices go to test, chosen by a
// seeded shuffle. Both outputs are in ascending index order.
SplitIndices stratified_split_indices(std::span<const int> labels, double train_ratio,
                                      std::uint64_t seed);

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset &data,
                                                           double train_ratio,
                                                           std::uint64_t seed);

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  ModelParams m;
  ModelParams v;
  long t = 0;
};

AdamState adam_init(const ModelConfig &config);

// Bias-corrected Adam on trainable arrays; running statistics are untouched.
void adam_step(ModelParams &params, const ModelParams &grads, AdamState &state,
               const AdamOptions &opts);

// Parsed and featurized records ready for batching.
struct PreparedSet {
  std::vector<FeaturizedMolecule> molecules;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

// Throws DataValidationError listing every unparseable SMILES and, when the
// model uses embeddings, every key missing from `table`.
PreparedSet prepare_set(const LabeledDataset &data, const EmbeddingTable &table,
                        const ModelConfig &config);

struct EvalResult {
  ConfusionCounts counts;
  Scores scores;
  std::optional<double> auc;  // absent when only one class is present
  double loss = 0.0;
  std::vector<double> prob_active;
  std::vector<int> predicted;
};

EvalResult evaluate_prepared(const ModelParams &params, const ModelConfig &config,
                             const PreparedSet &data, const EmbeddingTable &table,
                             int eval_batch_size = 256);

EvalResult evaluate_model(const ModelParams &params, const ModelConfig &config,
                          const LabeledDataset &data, const EmbeddingTable &table,
                          int eval_batch_size = 256);

struct EpochReport {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
  std::optional<double> val_auc;
  double seconds = 0.0;
};

struct FitResult {
  ModelParams best_params;
  int best_epoch = 0;
  EvalResult best_val;
  std::vector<EpochReport> history;
  LabeledDataset train;
  LabeledDataset val;
};

using EpochCallback = std::function<void(const EpochReport &)>;

// Holds out cfg.val_fraction of `data` (stratified) for model selection.
FitResult fit(const ModelConfig &config, ModelParams params, const LabeledDataset &data,
              const EmbeddingTable &table, const TrainConfig &cfg,
              const EpochCallback &on_epoch = {});

FitResult fit(const ModelConfig &config, ModelParams params, const LabeledDataset &train,
              const LabeledDataset &val, const EmbeddingTable &table, const TrainConfig &cfg,
              const EpochCallback &on_epoch = {});

// Graph-count chunks of a permutation; a trailing chunk of one graph joins
// the previous chunk.
std::vector<std::vector<std::size_t>> make_batches(std::span<const std::size_t> order,
                                                   int batch_size);

std::string format_history_csv(std::span<const EpochReport> history, bool record_time);

}  // namespace gcnllm
