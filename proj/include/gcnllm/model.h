// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gcnllm/embedding_store.h"
#include "gcnllm/featurizer.h"

namespace gcnllm {

using RowVector = Eigen::RowVectorXd;

// Where the projected molecule embedding joins the graph stream.
enum class FusionMode {
  kPerLayer,   // before every convolution
  kFinalOnly,  // concatenated to the pooled vector only
  kNone,       // plain GCN, no projection
};

// Order inside each convolution block.
enum class BlockOrder {
  kConvBnRelu,
  kConvReluBn,
};

enum class Mode { kTrain, kEval };

std::string_view to_string(FusionMode m);
std::string_view to_string(BlockOrder o);
FusionMode parse_fusion_mode(std::string_view s);
BlockOrder parse_block_order(std::string_view s);

class DimMismatchError: public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateBatchError: public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  int node_feat_dim = node_layout::kWidth;
  int embed_dim = 768;
  int proj_dim = 10;
  int hidden = 64;
  int n_conv_layers = 6;
  int n_classes = 2;
  double dropout_p = 0.5;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  FusionMode fusion_mode = FusionMode::kPerLayer;
  BlockOrder block_order = BlockOrder::kConvBnRelu;

  void validate() const;
  bool uses_projection() const { return fusion_mode != FusionMode::kNone; }
  // Width of the graph-stream part of conv layer `layer`'s input.
  int conv_stream_dim(int layer) const { return layer == 0 ? node_feat_dim : hidden; }
  int conv_input_dim(int layer) const;
  int fc1_input_dim() const;
};

struct ModelParams {
  Matrix proj_W;  // embed_dim x proj_dim (empty for FusionMode::kNone)
  RowVector proj_b;
  // Input rows are [graph stream | projected embedding].
  std::vector<Matrix> conv_W;
  std::vector<RowVector> conv_b;
  std::vector<RowVector> bn_gamma;
  std::vector<RowVector> bn_beta;
  std::vector<RowVector> bn_run_mean;  // not trainable
  std::vector<RowVector> bn_run_var;   // not trainable, unbiased
  Matrix fc1_W;
  RowVector fc1_b;
  Matrix fc2_W;
  RowVector fc2_b;
};

// Named view of one parameter array; `values` spans its row-major storage.
struct ArrayView {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  std::span<double> values;
};

struct ConstArrayView {
  std::string name;
  Eigen::Index rows;
  Eigen::Index cols;
  std::span<const double> values;
};

// Trainable arrays in declaration order; running statistics excluded.
std::vector<ArrayView> trainable_arrays(ModelParams &p);
std::vector<ConstArrayView> trainable_arrays(const ModelParams &p);

// Every array including running statistics, in checkpoint order.
std::vector<ArrayView> all_arrays(ModelParams &p);
std::vector<ConstArrayView> all_arrays(const ModelParams &p);

// Correctly shaped, all-zero parameters (running var included as zeros).
ModelParams zeros_like(const ModelConfig &config);

ModelParams init_params(const ModelConfig &config, std::uint64_t seed);

// Throws DimMismatchError when any array disagrees with the config.
void check_shapes(const ModelParams &p, const ModelConfig &config);

struct LayerCount {
  std::string name;
  long count;
};

// One entry per parameterized layer in network order (projection, conv1, bn1,
// ..., fc1, fc2).
std::vector<LayerCount> layer_param_counts(const ModelConfig &config);
long param_count(const ModelConfig &config);

RowVector project_embedding(const ModelParams &p, std::span<const double> embedding);

Matrix graph_conv(const NormalizedAdjacency &adj, const Matrix &h, const Matrix &w,
                  const RowVector &b);

struct BatchNormState {
  RowVector gamma;
  RowVector beta;
  RowVector running_mean;
  RowVector running_var;
};

// Train mode uses batch statistics (biased) and folds them into the running
// averages (variance unbiased); eval mode uses the running averages.
Matrix batch_norm(const Matrix &x, BatchNormState &state, Mode mode, double eps,
                  double momentum);

struct LayerTrace {
  Matrix agg_stream;     // A * H_prev
  Matrix agg_embed;      // A * P_nodes (empty unless fused)
  Matrix pre;            // convolution output
  Matrix normalized;     // BN x-hat
  RowVector inv_std;
  RowVector batch_mean;
  RowVector batch_var_unbiased;
  Matrix bn_out;         // BN output (kConvBnRelu) or ReLU output (kConvReluBn)
  Matrix out;
};

struct ForwardTrace {
  Mode mode = Mode::kEval;
  Matrix embeddings;     // graphs x embed_dim
  Matrix projected;      // graphs x proj_dim
  std::vector<LayerTrace> layers;
  Matrix pooled;         // graphs x hidden
  Matrix fc1_pre;
  Matrix dropout_scale;  // 0 or 1/(1-p) per entry; empty in eval mode
  Matrix fc1_out;        // after ReLU and dropout
  Matrix logits;
};

// Rows of the embedding table for the batch's molecule keys (empty matrix for
// FusionMode::kNone). Throws MissingKeyError.
Matrix gather_embeddings(const ModelConfig &config, const BatchedGraph &batch,
                         const EmbeddingTable &table);

ForwardTrace forward(const ModelParams &p, const ModelConfig &config,
                     const BatchedGraph &batch, const Matrix &embeddings, Mode mode,
                     std::uint64_t dropout_seed = 0);

ForwardTrace forward(const ModelParams &p, const ModelConfig &config,
                     const BatchedGraph &batch, const EmbeddingTable &table, Mode mode,
                     std::uint64_t dropout_seed = 0);

struct LossOptions {
  Mode mode = Mode::kTrain;
  std::uint64_t dropout_seed = 0;
  std::array<double, 2> class_weights = { 1.0, 1.0 };
};

struct LossAndGradients {
  double loss = 0.0;
  ModelParams grads;  // running statistics left empty
  ForwardTrace trace;
};

// Weighted mean softmax cross-entropy (natural log) and its exact gradient.
LossAndGradients loss_and_gradients(const ModelParams &p, const ModelConfig &config,
                                    const BatchedGraph &batch, const Matrix &embeddings,
                                    std::span<const int> labels,
                                    const LossOptions &opts = {});

LossAndGradients loss_and_gradients(const ModelParams &p, const ModelConfig &config,
                                    const BatchedGraph &batch,
                                    const EmbeddingTable &table,
                                    std::span<const int> labels,
                                    const LossOptions &opts = {});

// Loss only (same definition as above), for evaluation and finite differences.
double cross_entropy(const Matrix &logits, std::span<const int> labels,
                     const std::array<double, 2> &class_weights = { 1.0, 1.0 });

Matrix softmax_rows(const Matrix &logits);

// Folds the train-mode batch statistics of `trace` into the running averages.
void update_running_stats(ModelParams &p, const ModelConfig &config,
                          const ForwardTrace &trace);

}  // namespace gcnllm
