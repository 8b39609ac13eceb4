// Copyright 2026 The lpx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lpx/autodiff.hpp"
#include "lpx/graph.hpp"

namespace lpx {

enum class EncoderKind {
  /// GCN encoder of a variational graph autoencoder; the mean path is used
  /// outside training.
  gcn_vgae,
  /// Graph isomorphism network: h' = MLP((1 + eps) h_i + sum_j w_ij h_j).
  gin,
  /// Parameter-free white-box encoder: e_i = X_i + mean of neighbor features.
  toy,
};

enum class DecoderKind {
  /// sigmoid(e_i . e_j)
  inner_product,
  /// (cos(e_i, e_j) + 1) / 2
  cosine,
};

struct ModelConfig {
  EncoderKind encoder = EncoderKind::gin;
  DecoderKind decoder = DecoderKind::inner_product;
  int layers = 2;
  int hidden_dim = 32;
  int embed_dim = 16;
  double gin_epsilon = 0.0;
  bool learn_gin_epsilon = false;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

using ParameterMap = std::map<std::string, Matrix>;
using ParameterVars = std::map<std::string, ad::Var>;

enum class Optimizer { sgd, adam };

struct TrainOptions {
  /// sgd is gradient descent with optional momentum.
  Optimizer optimizer = Optimizer::adam;
  int epochs = 200;
  double learning_rate = 0.01;
  double momentum = 0.0;
  double kl_weight = 1.0;
  /// Rescales the full gradient to this L2 norm when larger; 0 disables.
  double max_grad_norm = 0.0;
  std::uint64_t seed = 0;
};

struct TrainingMetadata {
  TrainOptions options;
  double test_auc = 0.5;
  double test_accuracy = 0.5;
  double accuracy_threshold = 0.5;
  std::vector<double> loss_history;
};

/// Encoder + decoder link predictor. Immutable once trained; inference and
/// explanation are deterministic.
class LinkPredictor {
 public:
  LinkPredictor(ModelConfig config, std::size_t num_features, ParameterMap params);

  /// Glorot-uniform weights, zero biases.
  static LinkPredictor initialize(const ModelConfig& config, std::size_t num_features,
                                  std::uint64_t seed);
  /// The parameter-free white-box model used to illustrate edge signs.
  static LinkPredictor toy(DecoderKind decoder = DecoderKind::cosine, std::size_t num_features = 2);

  const ModelConfig& config() const { return config_; }
  const ParameterMap& parameters() const { return params_; }
  std::size_t num_features() const { return num_features_; }
  /// Receptive field of the encoder in hops.
  int hops() const { return config_.encoder == EncoderKind::toy ? 1 : config_.layers; }

  TrainingMetadata& metadata() { return metadata_; }
  const TrainingMetadata& metadata() const { return metadata_; }

  /// Records every parameter on `tape`, as variables when `trainable`.
  ParameterVars bind(ad::Tape& tape, bool trainable) const;

  /// Node embeddings (VGAE: the mean). `x` is num_nodes x num_features,
  /// `edge_weights` num_edges x 1 with values in [0, 1].
  ad::Var encode(const ParameterVars& params, ad::Var x, ad::Var edge_weights,
                 const std::shared_ptr<const ad::MessageIndex>& messages) const;

  struct VariationalEncoding {
    ad::Var sample;
    ad::Var mu;
    ad::Var logstd;
  };
  /// Reparameterized VGAE encoding used during training only.
  VariationalEncoding encode_variational(const ParameterVars& params, ad::Var x,
                                         ad::Var edge_weights,
                                         const std::shared_ptr<const ad::MessageIndex>& messages,
                                         Rng& rng) const;

  /// Tape-free encode with the same operation order; used wherever only
  /// values are needed. With `rows`, returns just those embeddings, in order.
  Matrix encode_values(const Matrix& x, const Matrix& edge_weights, const ad::MessageIndex& messages,
                       std::span<const NodeId> rows = {}) const;

  /// Edge probabilities for aligned rows of `ei` and `ej` (rows x 1).
  ad::Var decode(ad::Var ei, ad::Var ej) const;

  /// Embeddings of `g` with every edge at weight 1.
  Matrix embed(const Graph& g) const;
  /// Probability of the edge (u, v) given `g`. Throws on unknown node ids.
  double predict(const Graph& g, Edge target) const;
  std::vector<double> predict_many(const Graph& g, std::span<const Edge> targets) const;

  friend bool operator==(const LinkPredictor& a, const LinkPredictor& b) {
    return a.config_ == b.config_ && a.num_features_ == b.num_features_ &&
           std::equal(a.params_.begin(), a.params_.end(), b.params_.begin(), b.params_.end(),
                      [](const auto& x, const auto& y) {
                        return x.first == y.first && matrices_equal(x.second, y.second);
                      });
  }

 private:
  ad::Var gcn_layer(const ParameterVars& params, const std::string& name, ad::Var h, ad::Var w,
                    const std::shared_ptr<const ad::MessageIndex>& messages) const;
  ad::Var gcn_hidden(const ParameterVars& params, ad::Var x, ad::Var w,
                     const std::shared_ptr<const ad::MessageIndex>& messages) const;

  ModelConfig config_;
  std::size_t num_features_ = 0;
  ParameterMap params_;
  TrainingMetadata metadata_;
};

/// Probability decoded from two plain embedding vectors. `zero_norm` is set
/// when the cosine decoder met a zero vector and fell back to 0.5.
struct DecodeResult {
  double probability = 0.5;
  bool zero_norm = false;
};
DecodeResult decode_embeddings(DecoderKind decoder, const Eigen::RowVectorXd& ei,
                               const Eigen::RowVectorXd& ej);

/// e_i = X_i + (1 / |N(i)|) sum_{j in N(i)} X_j; isolated nodes keep X_i.
Matrix toy_embed(const Graph& g, const Matrix& x);

/// Area under the ROC curve (Mann-Whitney, ties counted one half).
double roc_auc(std::span<const double> positive_scores, std::span<const double> negative_scores);

/// Full-batch training on binary cross-entropy over train positives and
/// per-epoch resampled negatives. Throws NumericError on divergence.
LinkPredictor train(const ModelConfig& config, const EdgeSplit& split, const TrainOptions& options);

/// Test AUC and accuracy (threshold 0.5) of `model` on a split.
std::pair<double, double> evaluate_split(const LinkPredictor& model, const EdgeSplit& split);

}  // namespace lpx
