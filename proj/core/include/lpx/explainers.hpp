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

// Attribution methods for a single predicted link.
//
// Every explainer works on an ExplanationContext: the part of the graph the
// model can see when scoring the target. Scores are reported for the scope
// edges (both endpoints within `hops` of the target) and per feature column.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpx/autodiff.hpp"
#include "lpx/graph.hpp"
#include "lpx/models.hpp"

namespace lpx {

enum class ExplainerKind { gnnexplainer, integrated_gradients, deconvolution, lrp, random };

std::string_view explainer_name(ExplainerKind kind);
/// Accepts the names returned by explainer_name ("gnnexplainer", "ig",
/// "deconvolution", "lrp", "random").
std::optional<ExplainerKind> parse_explainer(std::string_view name);

/// Inputs to the model restricted to what can influence one prediction.
///
/// The model is evaluated on the (hops + 1)-hop induced subgraph of the
/// target endpoints. The extra ring keeps degree normalizations exact; its
/// outer edges are held at weight 1 and never attributed.
class ExplanationContext {
 public:
  ExplanationContext(const LinkPredictor& model, const Graph& g, Edge target);
  /// The context keeps a reference to the model.
  ExplanationContext(LinkPredictor&&, const Graph&, Edge) = delete;

  const LinkPredictor& model() const { return *model_; }
  Edge target() const { return target_; }
  const Subgraph& computation() const { return sub_; }
  /// Scope edges in original ids, sorted.
  const std::vector<Edge>& scope_edges() const { return scope_edges_; }
  /// Local ids of nodes within `hops` of the target.
  const std::vector<NodeId>& scope_nodes() const { return scope_nodes_; }
  std::size_t num_scope_edges() const { return scope_edges_.size(); }
  std::size_t num_features() const { return model_->num_features(); }
  /// Local feature matrix (rows follow computation().to_original).
  const Matrix& features() const { return sub_.graph.features(); }

  /// Probability of the target with the given local features and scope edge
  /// weights (one per scope edge).
  double evaluate(const Matrix& features, std::span<const double> scope_weights) const;
  double evaluate() const;

  /// Records the forward pass on the tape of `x`. `x` is the local feature matrix,
  /// `scope_w` a num_scope_edges x 1 column.
  ad::Var forward(const ParameterVars& params, ad::Var x, ad::Var scope_w) const;

  /// Per-column sums of a local node x feature matrix over scope nodes.
  std::vector<double> column_scores(const Matrix& node_scores) const;
  /// Rows of `node_scores` for scope nodes, in scope_nodes() order.
  Matrix scope_rows(const Matrix& node_scores) const;

 private:
  const LinkPredictor* model_;
  Edge target_;
  Subgraph sub_;
  NodeId local_u_ = 0;
  NodeId local_v_ = 0;
  std::shared_ptr<const ad::MessageIndex> messages_;
  std::vector<std::size_t> scope_index_;
  std::vector<Edge> scope_edges_;
  std::vector<NodeId> scope_nodes_;
};

/// Scores for one target edge.
struct Attribution {
  Edge target;
  ExplainerKind method = ExplainerKind::random;
  /// False for mask-valued methods whose scores lie in [0, 1].
  bool is_signed = true;
  std::vector<Edge> scope_edges;
  std::vector<double> edge_scores;
  /// One entry per feature column, summed over scope nodes.
  std::vector<double> feature_scores;
  /// Original ids of the scope nodes and their per-feature scores.
  std::vector<NodeId> scope_nodes;
  Matrix node_feature_scores;
  std::map<std::string, double> hyperparameters;
  std::uint64_t seed = 0;

  friend bool operator==(const Attribution& a, const Attribution& b) {
    return a.target == b.target && a.method == b.method && a.is_signed == b.is_signed &&
           a.scope_edges == b.scope_edges && a.edge_scores == b.edge_scores &&
           a.feature_scores == b.feature_scores && a.scope_nodes == b.scope_nodes &&
           matrices_equal(a.node_feature_scores, b.node_feature_scores) &&
           a.hyperparameters == b.hyperparameters && a.seed == b.seed;
  }
};

struct IgOptions {
  int steps = 50;
};

struct LrpOptions {
  double epsilon = 1e-4;
};

struct GnnExplainerOptions {
  int epochs = 100;
  double learning_rate = 0.01;
  double sparsity = 0.005;
  double entropy = 0.1;
  /// Standard deviation of the N(0, std^2) mask-logit initialization.
  double init_std = 1.0;
};

struct ExplainerOptions {
  IgOptions ig;
  LrpOptions lrp;
  GnnExplainerOptions gnnexplainer;
};

Attribution explain_ig(const ExplanationContext& ctx, const IgOptions& opts = {});
Attribution explain_deconv(const ExplanationContext& ctx);
Attribution explain_lrp(const ExplanationContext& ctx, const LrpOptions& opts = {});
/// `loss_history`, when given, receives the objective value of every epoch.
Attribution explain_gnnx(const ExplanationContext& ctx, const GnnExplainerOptions& opts,
                         std::uint64_t seed, std::vector<double>* loss_history = nullptr);
Attribution explain_random(const ExplanationContext& ctx, std::uint64_t seed);

/// Dispatches on `kind`. `seed` is used by the stochastic methods only.
Attribution explain(ExplainerKind kind, const ExplanationContext& ctx,
                    const ExplainerOptions& opts, std::uint64_t seed);

}  // namespace lpx
