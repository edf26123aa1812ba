// SPDX-License-Identifier: Apache-2.0

#include "gcnllm/model.h"

#include <algorithm>
#include <cmath>

#include "gcnllm/rng.h"

namespace gcnllm {

namespace {

template <class View, class Params>
std::vector<View> collect(Params &p, bool include_state) {
  std::vector<View> out;
  const auto add = [&](std::string name, auto &m) {
    out.push_back(View { std::move(name), m.rows(), m.cols(),
                         { m.data(), static_cast<std::size_t>(m.size()) } });
  };
  if (p.proj_W.size() > 0) {
    add("proj_W", p.proj_W);
    add("proj_b", p.proj_b);
  }
  for (std::size_t i = 0; i < p.conv_W.size(); ++i) {
    const std::string k = std::to_string(i);
    add("conv_W" + k, p.conv_W[i]);
    add("conv_b" + k, p.conv_b[i]);
  }
  for (std::size_t i = 0; i < p.bn_gamma.size(); ++i) {
    const std::string k = std::to_string(i);
    add("bn_gamma" + k, p.bn_gamma[i]);
    add("bn_beta" + k, p.bn_beta[i]);
    if (include_state) {
      add("bn_run_mean" + k, p.bn_run_mean[i]);
      add("bn_run_var" + k, p.bn_run_var[i]);
    }
  }
  add("fc1_W", p.fc1_W);
  add("fc1_b", p.fc1_b);
  add("fc2_W", p.fc2_W);
  add("fc2_b", p.fc2_b);
  return out;
}

void glorot(Matrix &w, Rng &rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    w.data()[i] = (2.0 * rng.uniform() - 1.0) * bound;
  }
}

// Sum of rows per graph.
Matrix segment_sum(const Matrix &x, const std::vector<int> &graph_index, int n_graphs) {
  Matrix out = Matrix::Zero(n_graphs, x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(graph_index[i]) += x.row(i);
  return out;
}

Matrix broadcast_rows(const Matrix &per_graph, const std::vector<int> &graph_index) {
  Matrix out(static_cast<Eigen::Index>(graph_index.size()), per_graph.cols());
  for (std::size_t i = 0; i < graph_index.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = per_graph.row(graph_index[i]);
  }
  return out;
}

Matrix relu(const Matrix &x) {
  return x.cwiseMax(0.0);
}

Matrix relu_backward(const Matrix &grad, const Matrix &activation_input) {
  return (activation_input.array() > 0.0).select(grad, 0.0);
}

struct BnForward {
  Matrix y;
  Matrix xhat;
  RowVector inv_std;
  RowVector mean;
  RowVector var_unbiased;
};

BnForward bn_forward(const Matrix &x, const RowVector &gamma, const RowVector &beta,
                     const RowVector &run_mean, const RowVector &run_var, Mode mode,
                     double eps) {
  BnForward r;
  const Eigen::Index n = x.rows();
  RowVector mean;
  RowVector var;
  if (mode == Mode::kTrain) {
    if (n < 2) {
      throw DegenerateBatchError("DegenerateBatch: batch norm in train mode needs >= 2 "
                                 "nodes, got " + std::to_string(n));
    }
    mean = x.colwise().mean();
    const Matrix centered = x.rowwise() - mean;
    var = centered.colwise().squaredNorm() / static_cast<double>(n);
    r.mean = mean;
    r.var_unbiased = var * (static_cast<double>(n) / static_cast<double>(n - 1));
  } else {
    mean = run_mean;
    var = run_var;
  }
  r.inv_std = (var.array() + eps).rsqrt().matrix();
  r.xhat = (x.rowwise() - mean).array().rowwise() * r.inv_std.array();
  r.y = (r.xhat.array().rowwise() * gamma.array()).rowwise() + beta.array();
  return r;
}

// Returns dx; accumulates dgamma/dbeta.
Matrix bn_backward(const Matrix &dy, const Matrix &xhat, const RowVector &inv_std,
                   const RowVector &gamma, Mode mode, RowVector &dgamma,
                   RowVector &dbeta) {
  dgamma += (dy.array() * xhat.array()).colwise().sum().matrix();
  dbeta += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gamma.array();
  if (mode == Mode::kEval) return dxhat.array().rowwise() * inv_std.array();
  const double n = static_cast<double>(dy.rows());
  const RowVector sum_dxhat = dxhat.colwise().sum();
  const RowVector sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
  Matrix dx = (n * dxhat.array()).rowwise() - sum_dxhat.array();
  dx.array() -= xhat.array().rowwise() * sum_dxhat_xhat.array();
  dx.array().rowwise() *= (inv_std.array() / n);
  return dx;
}

std::vector<int> check_labels(const ModelConfig &config, const BatchedGraph &batch,
                              std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != batch.num_graphs()) {
    throw DimMismatchError("labels: expected " + std::to_string(batch.num_graphs())
                           + " entries, got " + std::to_string(labels.size()));
  }
  for (int y: labels) {
    if (y < 0 || y >= config.n_classes) {
      throw std::invalid_argument("label out of range: " + std::to_string(y));
    }
  }
  return { labels.begin(), labels.end() };
}

double class_weight(const std::array<double, 2> &w, int label) {
  return label < 2 ? w[label] : 1.0;
}

}  // namespace

std::string_view to_string(FusionMode m) {
  switch (m) {
  case FusionMode::kPerLayer:
    return "per_layer";
  case FusionMode::kFinalOnly:
    return "final_only";
  case FusionMode::kNone:
    return "none";
  }
  return "per_layer";
}

std::string_view to_string(BlockOrder o) {
  return o == BlockOrder::kConvBnRelu ? "conv_bn_relu" : "conv_relu_bn";
}

FusionMode parse_fusion_mode(std::string_view s) {
  if (s == "per_layer") return FusionMode::kPerLayer;
  if (s == "final_only") return FusionMode::kFinalOnly;
  if (s == "none") return FusionMode::kNone;
  throw std::invalid_argument("unknown fusion mode '" + std::string(s) + "'");
}

BlockOrder parse_block_order(std::string_view s) {
  if (s == "conv_bn_relu") return BlockOrder::kConvBnRelu;
  if (s == "conv_relu_bn") return BlockOrder::kConvReluBn;
  throw std::invalid_argument("unknown block order '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  if (node_feat_dim < 1 || embed_dim < 1 || proj_dim < 1 || hidden < 1
      || n_conv_layers < 1 || n_classes < 2) {
    throw std::invalid_argument("model config: dimensions must be positive "
                                "(n_classes >= 2)");
  }
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) {
    throw std::invalid_argument("model config: dropout must be in [0, 1)");
  }
  if (!(bn_eps >= 0.0) || !(bn_momentum >= 0.0 && bn_momentum <= 1.0)) {
    throw std::invalid_argument("model config: invalid batch-norm constants");
  }
}

int ModelConfig::conv_input_dim(int layer) const {
  return conv_stream_dim(layer) + (fusion_mode == FusionMode::kPerLayer ? proj_dim : 0);
}

int ModelConfig::fc1_input_dim() const {
  return hidden + (fusion_mode == FusionMode::kFinalOnly ? proj_dim : 0);
}

std::vector<ArrayView> trainable_arrays(ModelParams &p) {
  return collect<ArrayView>(p, false);
}
std::vector<ConstArrayView> trainable_arrays(const ModelParams &p) {
  return collect<ConstArrayView>(p, false);
}
std::vector<ArrayView> all_arrays(ModelParams &p) {
  return collect<ArrayView>(p, true);
}
std::vector<ConstArrayView> all_arrays(const ModelParams &p) {
  return collect<ConstArrayView>(p, true);
}

ModelParams zeros_like(const ModelConfig &config) {
  config.validate();
  ModelParams p;
  if (config.uses_projection()) {
    p.proj_W = Matrix::Zero(config.embed_dim, config.proj_dim);
    p.proj_b = RowVector::Zero(config.proj_dim);
  }
  for (int l = 0; l < config.n_conv_layers; ++l) {
    p.conv_W.push_back(Matrix::Zero(config.conv_input_dim(l), config.hidden));
    p.conv_b.push_back(RowVector::Zero(config.hidden));
    p.bn_gamma.push_back(RowVector::Zero(config.hidden));
    p.bn_beta.push_back(RowVector::Zero(config.hidden));
    p.bn_run_mean.push_back(RowVector::Zero(config.hidden));
    p.bn_run_var.push_back(RowVector::Zero(config.hidden));
  }
  p.fc1_W = Matrix::Zero(config.fc1_input_dim(), config.hidden);
  p.fc1_b = RowVector::Zero(config.hidden);
  p.fc2_W = Matrix::Zero(config.hidden, config.n_classes);
  p.fc2_b = RowVector::Zero(config.n_classes);
  return p;
}

ModelParams init_params(const ModelConfig &config, std::uint64_t seed) {
  ModelParams p = zeros_like(config);
  Rng rng(seed);
  if (config.uses_projection()) glorot(p.proj_W, rng);
  for (int l = 0; l < config.n_conv_layers; ++l) {
    glorot(p.conv_W[l], rng);
    p.bn_gamma[l].setOnes();
    p.bn_run_var[l].setOnes();
  }
  glorot(p.fc1_W, rng);
  glorot(p.fc2_W, rng);
  return p;
}

void check_shapes(const ModelParams &p, const ModelConfig &config) {
  const ModelParams ref = zeros_like(config);
  const auto want = all_arrays(ref);
  const auto got = all_arrays(p);
  if (want.size() != got.size()) {
    throw DimMismatchError("parameter set has " + std::to_string(got.size())
                           + " arrays, config expects " + std::to_string(want.size()));
  }
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (want[i].name != got[i].name || want[i].rows != got[i].rows
        || want[i].cols != got[i].cols) {
      throw DimMismatchError("array " + got[i].name + " is "
                             + std::to_string(got[i].rows) + "x"
                             + std::to_string(got[i].cols) + ", expected "
                             + want[i].name + " " + std::to_string(want[i].rows) + "x"
                             + std::to_string(want[i].cols));
    }
  }
}

std::vector<LayerCount> layer_param_counts(const ModelConfig &config) {
  config.validate();
  std::vector<LayerCount> out;
  const long h = config.hidden;
  if (config.uses_projection()) {
    out.push_back({ "projection", static_cast<long>(config.embed_dim) * config.proj_dim
                                      + config.proj_dim });
  }
  for (int l = 0; l < config.n_conv_layers; ++l) {
    out.push_back({ "conv" + std::to_string(l + 1), config.conv_input_dim(l) * h + h });
    out.push_back({ "bn" + std::to_string(l + 1), 2 * h });
  }
  out.push_back({ "fc1", config.fc1_input_dim() * h + h });
  out.push_back({ "fc2", h * config.n_classes + config.n_classes });
  return out;
}

long param_count(const ModelConfig &config) {
  long total = 0;
  for (const LayerCount &c: layer_param_counts(config)) total += c.count;
  return total;
}

RowVector project_embedding(const ModelParams &p, std::span<const double> embedding) {
  if (static_cast<Eigen::Index>(embedding.size()) != p.proj_W.rows()) {
    throw DimMismatchError("embedding has " + std::to_string(embedding.size())
                           + " values, projection expects "
                           + std::to_string(p.proj_W.rows()));
  }
  const Eigen::Map<const RowVector> e(embedding.data(),
                                      static_cast<Eigen::Index>(embedding.size()));
  return e * p.proj_W + p.proj_b;
}

Matrix graph_conv(const NormalizedAdjacency &adj, const Matrix &h, const Matrix &w,
                  const RowVector &b) {
  if (h.cols() != w.rows() || w.cols() != b.size() || h.rows() != adj.n) {
    throw DimMismatchError("graph_conv: incompatible shapes");
  }
  Matrix out = Matrix(adj.to_sparse() * h) * w;
  out.rowwise() += b;
  return out;
}

Matrix batch_norm(const Matrix &x, BatchNormState &state, Mode mode, double eps,
                  double momentum) {
  if (x.cols() != state.gamma.size()) throw DimMismatchError("batch_norm: width mismatch");
  BnForward r = bn_forward(x, state.gamma, state.beta, state.running_mean,
                           state.running_var, mode, eps);
  if (mode == Mode::kTrain) {
    state.running_mean = (1.0 - momentum) * state.running_mean + momentum * r.mean;
    state.running_var = (1.0 - momentum) * state.running_var + momentum * r.var_unbiased;
  }
  return std::move(r.y);
}

Matrix gather_embeddings(const ModelConfig &config, const BatchedGraph &batch,
                         const EmbeddingTable &table) {
  if (!config.uses_projection()) return {};
  if (static_cast<int>(table.dim()) != config.embed_dim) {
    throw DimMismatchError("embedding table dim " + std::to_string(table.dim())
                           + " != model embed_dim " + std::to_string(config.embed_dim));
  }
  Matrix e(batch.num_graphs(), config.embed_dim);
  for (int g = 0; g < batch.num_graphs(); ++g) {
    const auto v = table.lookup(batch.molecule_keys[g]);
    e.row(g) = Eigen::Map<const RowVector>(v.data(), config.embed_dim);
  }
  return e;
}

ForwardTrace forward(const ModelParams &p, const ModelConfig &config,
                     const BatchedGraph &batch, const Matrix &embeddings, Mode mode,
                     std::uint64_t dropout_seed) {
  const int n_graphs = batch.num_graphs();
  if (batch.features.cols() != config.node_feat_dim) {
    throw DimMismatchError("node features have " + std::to_string(batch.features.cols())
                           + " columns, model expects "
                           + std::to_string(config.node_feat_dim));
  }
  ForwardTrace t;
  t.mode = mode;
  const bool fused = config.fusion_mode == FusionMode::kPerLayer;

  Matrix proj_nodes;
  if (config.uses_projection()) {
    if (embeddings.rows() != n_graphs || embeddings.cols() != config.embed_dim) {
      throw DimMismatchError("embeddings must be graphs x embed_dim");
    }
    t.embeddings = embeddings;
    t.projected = embeddings * p.proj_W;
    t.projected.rowwise() += p.proj_b;
    if (fused) proj_nodes = broadcast_rows(t.projected, batch.graph_index);
  }

  const SparseMatrix &adj = batch.adjacency_sparse;
  const Matrix *h = &batch.features;
  t.layers.resize(config.n_conv_layers);
  for (int l = 0; l < config.n_conv_layers; ++l) {
    LayerTrace &lt = t.layers[l];
    const Matrix &w = p.conv_W[l];
    const int stream = config.conv_stream_dim(l);
    lt.agg_stream = adj * *h;
    lt.pre = lt.agg_stream * w.topRows(stream);
    if (fused) {
      lt.agg_embed = adj * proj_nodes;
      lt.pre.noalias() += lt.agg_embed * w.bottomRows(config.proj_dim);
    }
    lt.pre.rowwise() += p.conv_b[l];

    const Matrix &bn_in = config.block_order == BlockOrder::kConvBnRelu
                              ? lt.pre
                              : (lt.bn_out = relu(lt.pre));
    BnForward bn = bn_forward(bn_in, p.bn_gamma[l], p.bn_beta[l], p.bn_run_mean[l],
                              p.bn_run_var[l], mode, config.bn_eps);
    lt.normalized = std::move(bn.xhat);
    lt.inv_std = std::move(bn.inv_std);
    lt.batch_mean = std::move(bn.mean);
    lt.batch_var_unbiased = std::move(bn.var_unbiased);
    if (config.block_order == BlockOrder::kConvBnRelu) {
      lt.bn_out = std::move(bn.y);
      lt.out = relu(lt.bn_out);
    } else {
      lt.out = std::move(bn.y);
    }
    h = &lt.out;
  }

  Matrix pooled = segment_sum(*h, batch.graph_index, n_graphs);
  for (int g = 0; g < n_graphs; ++g) pooled.row(g) /= batch.node_counts[g];
  t.pooled = pooled;

  t.fc1_pre = pooled * p.fc1_W.topRows(config.hidden);
  if (config.fusion_mode == FusionMode::kFinalOnly) {
    t.fc1_pre.noalias() += t.projected * p.fc1_W.bottomRows(config.proj_dim);
  }
  t.fc1_pre.rowwise() += p.fc1_b;
  t.fc1_out = relu(t.fc1_pre);

  if (mode == Mode::kTrain && config.dropout_p > 0.0) {
    Rng rng(dropout_seed);
    const double keep_scale = 1.0 / (1.0 - config.dropout_p);
    t.dropout_scale.resize(t.fc1_out.rows(), t.fc1_out.cols());
    for (Eigen::Index i = 0; i < t.dropout_scale.size(); ++i) {
      t.dropout_scale.data()[i] = rng.uniform() >= config.dropout_p ? keep_scale : 0.0;
    }
    t.fc1_out.array() *= t.dropout_scale.array();
  }

  t.logits = t.fc1_out * p.fc2_W;
  t.logits.rowwise() += p.fc2_b;
  return t;
}

ForwardTrace forward(const ModelParams &p, const ModelConfig &config,
                     const BatchedGraph &batch, const EmbeddingTable &table, Mode mode,
                     std::uint64_t dropout_seed) {
  return forward(p, config, batch, gather_embeddings(config, batch, table), mode,
                 dropout_seed);
}

Matrix softmax_rows(const Matrix &logits) {
  Matrix out = logits;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    const double m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

double cross_entropy(const Matrix &logits, std::span<const int> labels,
                     const std::array<double, 2> &class_weights) {
  double total = 0.0;
  double weight_sum = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    const double lse = m + std::log((logits.row(r).array() - m).exp().sum());
    const int y = labels[static_cast<std::size_t>(r)];
    const double w = class_weight(class_weights, y);
    total += w * (lse - logits(r, y));
    weight_sum += w;
  }
  return total / weight_sum;
}

LossAndGradients loss_and_gradients(const ModelParams &p, const ModelConfig &config,
                                    const BatchedGraph &batch, const Matrix &embeddings,
                                    std::span<const int> labels,
                                    const LossOptions &opts) {
  const std::vector<int> y = check_labels(config, batch, labels);
  LossAndGradients r;
  r.trace = forward(p, config, batch, embeddings, opts.mode, opts.dropout_seed);
  const ForwardTrace &t = r.trace;
  r.loss = cross_entropy(t.logits, y, opts.class_weights);

  ModelParams g = zeros_like(config);
  g.bn_run_mean.clear();
  g.bn_run_var.clear();

  const int n_graphs = batch.num_graphs();
  double weight_sum = 0.0;
  for (int c: y) weight_sum += class_weight(opts.class_weights, c);

  Matrix dlogits = softmax_rows(t.logits);
  for (int i = 0; i < n_graphs; ++i) {
    dlogits(i, y[i]) -= 1.0;
    dlogits.row(i) *= class_weight(opts.class_weights, y[i]) / weight_sum;
  }

  g.fc2_W = t.fc1_out.transpose() * dlogits;
  g.fc2_b = dlogits.colwise().sum();
  Matrix dfc1 = dlogits * p.fc2_W.transpose();
  if (t.dropout_scale.size() > 0) dfc1.array() *= t.dropout_scale.array();
  dfc1 = relu_backward(dfc1, t.fc1_pre);

  g.fc1_b = dfc1.colwise().sum();
  Matrix dprojected;
  if (config.uses_projection()) dprojected = Matrix::Zero(n_graphs, config.proj_dim);
  g.fc1_W.topRows(config.hidden) = t.pooled.transpose() * dfc1;
  if (config.fusion_mode == FusionMode::kFinalOnly) {
    g.fc1_W.bottomRows(config.proj_dim) = t.projected.transpose() * dfc1;
    dprojected += dfc1 * p.fc1_W.bottomRows(config.proj_dim).transpose();
  }
  Matrix dpooled = dfc1 * p.fc1_W.topRows(config.hidden).transpose();
  for (int gi = 0; gi < n_graphs; ++gi) dpooled.row(gi) /= batch.node_counts[gi];
  Matrix dh = broadcast_rows(dpooled, batch.graph_index);

  const SparseMatrix adj_t = batch.adjacency_sparse.transpose();
  const bool fused = config.fusion_mode == FusionMode::kPerLayer;
  for (int l = config.n_conv_layers - 1; l >= 0; --l) {
    const LayerTrace &lt = t.layers[l];
    Matrix dpre;
    if (config.block_order == BlockOrder::kConvBnRelu) {
      const Matrix dbn = relu_backward(dh, lt.bn_out);
      dpre = bn_backward(dbn, lt.normalized, lt.inv_std, p.bn_gamma[l], t.mode,
                         g.bn_gamma[l], g.bn_beta[l]);
    } else {
      const Matrix drelu = bn_backward(dh, lt.normalized, lt.inv_std, p.bn_gamma[l],
                                       t.mode, g.bn_gamma[l], g.bn_beta[l]);
      dpre = relu_backward(drelu, lt.pre);
    }

    const int stream = config.conv_stream_dim(l);
    g.conv_b[l] = dpre.colwise().sum();
    g.conv_W[l].topRows(stream) = lt.agg_stream.transpose() * dpre;
    if (fused) {
      g.conv_W[l].bottomRows(config.proj_dim) = lt.agg_embed.transpose() * dpre;
      const Matrix dembed_nodes =
          adj_t * Matrix(dpre * p.conv_W[l].bottomRows(config.proj_dim).transpose());
      dprojected += segment_sum(dembed_nodes, batch.graph_index, n_graphs);
    }
    if (l > 0) {
      dh = adj_t * Matrix(dpre * p.conv_W[l].topRows(stream).transpose());
    }
  }

  if (config.uses_projection()) {
    g.proj_W = t.embeddings.transpose() * dprojected;
    g.proj_b = dprojected.colwise().sum();
  }
  r.grads = std::move(g);
  return r;
}

LossAndGradients loss_and_gradients(const ModelParams &p, const ModelConfig &config,
                                    const BatchedGraph &batch,
                                    const EmbeddingTable &table,
                                    std::span<const int> labels,
                                    const LossOptions &opts) {
  return loss_and_gradients(p, config, batch, gather_embeddings(config, batch, table),
                            labels, opts);
}

void update_running_stats(ModelParams &p, const ModelConfig &config,
                          const ForwardTrace &trace) {
  if (trace.mode != Mode::kTrain) return;
  const double m = config.bn_momentum;
  for (int l = 0; l < config.n_conv_layers; ++l) {
    p.bn_run_mean[l] = (1.0 - m) * p.bn_run_mean[l] + m * trace.layers[l].batch_mean;
    p.bn_run_var[l] =
        (1.0 - m) * p.bn_run_var[l] + m * trace.layers[l].batch_var_unbiased;
  }
}

}  // namespace gcnllm
