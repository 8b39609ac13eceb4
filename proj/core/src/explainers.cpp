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

#include "lpx/explainers.hpp"

#include <cmath>
#include <string>

#include "adam.hpp"
#include "lpx/error.hpp"
#include "lpx/rng.hpp"

namespace lpx {

namespace {

std::vector<double> to_vector(const Matrix& m) { return {m.data(), m.data() + m.size()}; }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericError(std::string(what) + ": non-finite attribution");
}

Attribution skeleton(const ExplanationContext& ctx, ExplainerKind kind, bool is_signed) {
  Attribution a;
  a.target = ctx.target();
  a.method = kind;
  a.is_signed = is_signed;
  a.scope_edges = ctx.scope_edges();
  a.scope_nodes.reserve(ctx.scope_nodes().size());
  for (NodeId local : ctx.scope_nodes()) a.scope_nodes.push_back(ctx.computation().to_original[local]);
  return a;
}

// Fills edge and feature scores from gradients/relevances w.r.t. the scope
// weights and the local feature matrix.
void fill_signed(Attribution& a, const ExplanationContext& ctx, const Matrix& edge,
                 const Matrix& node_features) {
  require_finite(edge, explainer_name(a.method).data());
  require_finite(node_features, explainer_name(a.method).data());
  a.edge_scores = to_vector(edge);
  a.feature_scores = ctx.column_scores(node_features);
  a.node_feature_scores = ctx.scope_rows(node_features);
}

// Mask-valued methods: per-column feature scores broadcast to every scope node.
void fill_mask(Attribution& a, const std::vector<double>& edge, const std::vector<double>& feature) {
  a.edge_scores = edge;
  a.feature_scores = feature;
  a.node_feature_scores.resize(static_cast<Eigen::Index>(a.scope_nodes.size()),
                               static_cast<Eigen::Index>(feature.size()));
  for (Eigen::Index r = 0; r < a.node_feature_scores.rows(); ++r) {
    for (std::size_t f = 0; f < feature.size(); ++f) {
      a.node_feature_scores(r, static_cast<Eigen::Index>(f)) = feature[f];
    }
  }
}

ad::Var binary_entropy(ad::Var m) {
  constexpr double kTiny = 1e-12;
  ad::Var one_minus = ad::add_scalar(ad::scale(m, -1.0), 1.0);
  ad::Var h = ad::add(ad::mul(m, ad::log(ad::add_scalar(m, kTiny))),
                      ad::mul(one_minus, ad::log(ad::add_scalar(one_minus, kTiny))));
  return ad::scale(ad::mean_all(h), -1.0);
}

Matrix sigmoid_of(const Matrix& logits) {
  return logits.unaryExpr([](double z) {
    return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  });
}

}  // namespace

std::string_view explainer_name(ExplainerKind kind) {
  switch (kind) {
    case ExplainerKind::gnnexplainer: return "gnnexplainer";
    case ExplainerKind::integrated_gradients: return "ig";
    case ExplainerKind::deconvolution: return "deconvolution";
    case ExplainerKind::lrp: return "lrp";
    case ExplainerKind::random: return "random";
  }
  return "unknown";
}

std::optional<ExplainerKind> parse_explainer(std::string_view name) {
  for (auto k : {ExplainerKind::gnnexplainer, ExplainerKind::integrated_gradients,
                 ExplainerKind::deconvolution, ExplainerKind::lrp, ExplainerKind::random}) {
    if (explainer_name(k) == name) return k;
  }
  return std::nullopt;
}

ExplanationContext::ExplanationContext(const LinkPredictor& model, const Graph& g, Edge target)
    : model_(&model), target_(Edge::canonical(target.u, target.v)) {
  if (!g.contains_node(target.u) || !g.contains_node(target.v)) {
    throw InvalidArgument("explain: target (" + std::to_string(target.u) + ", " +
                          std::to_string(target.v) + ") references an unknown node");
  }
  if (target.u == target.v) throw InvalidArgument("explain: target must join two distinct nodes");
  if (g.num_features() != model.num_features()) {
    throw InvalidArgument("explain: graph has " + std::to_string(g.num_features()) +
                          " features, model expects " + std::to_string(model.num_features()));
  }
  const int hops = model.hops();
  const NodeId seeds[] = {target_.u, target_.v};
  sub_ = k_hop_subgraph(g, seeds, hops + 1);
  local_u_ = *sub_.to_local(target_.u);
  local_v_ = *sub_.to_local(target_.v);
  messages_ = ad::MessageIndex::from_graph(sub_.graph);

  const auto& edges = sub_.graph.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    if (sub_.distance[edges[k].u] <= hops && sub_.distance[edges[k].v] <= hops) {
      scope_index_.push_back(k);
      scope_edges_.push_back(
          Edge::canonical(sub_.to_original[edges[k].u], sub_.to_original[edges[k].v]));
    }
  }
  for (std::size_t i = 0; i < sub_.distance.size(); ++i) {
    if (sub_.distance[i] <= hops) scope_nodes_.push_back(static_cast<NodeId>(i));
  }
}

ad::Var ExplanationContext::forward(const ParameterVars& params, ad::Var x, ad::Var scope_w) const {
  ad::Var w = ad::scatter_rows(Matrix::Ones(static_cast<Eigen::Index>(sub_.graph.num_edges()), 1),
                               scope_w, scope_index_);
  ad::Var z = model_->encode(params, x, w, messages_);
  const NodeId iu[] = {local_u_};
  const NodeId iv[] = {local_v_};
  return model_->decode(ad::gather_rows(z, iu), ad::gather_rows(z, iv));
}

double ExplanationContext::evaluate(const Matrix& features, std::span<const double> scope_weights) const {
  if (scope_weights.size() != scope_edges_.size()) {
    throw InvalidArgument("evaluate: expected " + std::to_string(scope_edges_.size()) +
                          " scope weights, got " + std::to_string(scope_weights.size()));
  }
  Matrix w = Matrix::Ones(static_cast<Eigen::Index>(sub_.graph.num_edges()), 1);
  for (std::size_t k = 0; k < scope_index_.size(); ++k) {
    w(static_cast<Eigen::Index>(scope_index_[k]), 0) = scope_weights[k];
  }
  const NodeId rows[] = {local_u_, local_v_};
  const Matrix z = model_->encode_values(features, w, *messages_, rows);
  const DecodeResult r = decode_embeddings(model_->config().decoder, z.row(0), z.row(1));
  if (!std::isfinite(r.probability)) throw NumericError("evaluate: non-finite model output");
  return r.probability;
}

double ExplanationContext::evaluate() const {
  const std::vector<double> ones(scope_edges_.size(), 1.0);
  return evaluate(features(), ones);
}

std::vector<double> ExplanationContext::column_scores(const Matrix& node_scores) const {
  std::vector<double> out(static_cast<std::size_t>(node_scores.cols()), 0.0);
  for (NodeId i : scope_nodes_) {
    for (Eigen::Index f = 0; f < node_scores.cols(); ++f) out[static_cast<std::size_t>(f)] += node_scores(i, f);
  }
  return out;
}

Matrix ExplanationContext::scope_rows(const Matrix& node_scores) const {
  Matrix out(static_cast<Eigen::Index>(scope_nodes_.size()), node_scores.cols());
  for (std::size_t k = 0; k < scope_nodes_.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = node_scores.row(scope_nodes_[k]);
  }
  return out;
}

Attribution explain_ig(const ExplanationContext& ctx, const IgOptions& opts) {
  if (opts.steps < 1) throw InvalidArgument("ig: steps must be >= 1");
  const Matrix& x = ctx.features();
  const auto s = static_cast<Eigen::Index>(ctx.num_scope_edges());
  Matrix grad_w = Matrix::Zero(s, 1);
  Matrix grad_x = Matrix::Zero(x.rows(), x.cols());
  for (int step = 0; step < opts.steps; ++step) {
    const double alpha = (step + 0.5) / opts.steps;
    ad::Tape tape;
    const ParameterVars params = ctx.model().bind(tape, false);
    ad::Var xv = tape.variable(alpha * x);
    ad::Var wv = tape.variable(Matrix::Constant(s, 1, alpha));
    tape.backward(ctx.forward(params, xv, wv));
    grad_w += tape.grad(wv);
    grad_x += tape.grad(xv);
  }
  grad_w /= opts.steps;
  grad_x /= opts.steps;
  // Baseline is all-zero, so (input - baseline) is the input itself.
  Attribution a = skeleton(ctx, ExplainerKind::integrated_gradients, true);
  a.hyperparameters["steps"] = opts.steps;
  fill_signed(a, ctx, grad_w, x.cwiseProduct(grad_x));
  return a;
}

Attribution explain_deconv(const ExplanationContext& ctx) {
  ad::Tape tape;
  const ParameterVars params = ctx.model().bind(tape, false);
  ad::Var xv = tape.variable(ctx.features());
  ad::Var wv = tape.variable(Matrix::Ones(static_cast<Eigen::Index>(ctx.num_scope_edges()), 1));
  tape.backward(ctx.forward(params, xv, wv), ad::BackwardMode::deconv);
  Attribution a = skeleton(ctx, ExplainerKind::deconvolution, true);
  fill_signed(a, ctx, tape.grad(wv), tape.grad(xv));
  return a;
}

Attribution explain_lrp(const ExplanationContext& ctx, const LrpOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw InvalidArgument("lrp: epsilon must be > 0");
  ad::Tape tape;
  const ParameterVars params = ctx.model().bind(tape, false);
  ad::Var xv = tape.variable(ctx.features());
  ad::Var wv = tape.variable(Matrix::Ones(static_cast<Eigen::Index>(ctx.num_scope_edges()), 1));
  tape.relevance(ctx.forward(params, xv, wv), opts.epsilon);
  Attribution a = skeleton(ctx, ExplainerKind::lrp, true);
  a.hyperparameters["epsilon"] = opts.epsilon;
  fill_signed(a, ctx, tape.relevance_of(wv), tape.relevance_of(xv));
  return a;
}

Attribution explain_gnnx(const ExplanationContext& ctx, const GnnExplainerOptions& opts,
                         std::uint64_t seed, std::vector<double>* loss_history) {
  if (opts.epochs < 0) throw InvalidArgument("gnnexplainer: epochs must be >= 0");
  if (!(opts.learning_rate > 0.0)) throw InvalidArgument("gnnexplainer: learning_rate must be > 0");
  if (opts.sparsity < 0.0 || opts.entropy < 0.0) {
    throw InvalidArgument("gnnexplainer: penalty coefficients must be >= 0");
  }
  const auto s = static_cast<Eigen::Index>(ctx.num_scope_edges());
  const auto f = static_cast<Eigen::Index>(ctx.num_features());
  Rng rng(seed);
  Matrix edge_logits(s, 1);
  for (Eigen::Index k = 0; k < s; ++k) edge_logits(k, 0) = opts.init_std * standard_normal(rng);
  Matrix feat_logits(1, f);
  for (Eigen::Index k = 0; k < f; ++k) feat_logits(0, k) = opts.init_std * standard_normal(rng);

  detail::Adam edge_opt(opts.learning_rate);
  detail::Adam feat_opt(opts.learning_rate);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    ad::Tape tape;
    const ParameterVars params = ctx.model().bind(tape, false);
    ad::Var el = tape.variable(edge_logits);
    ad::Var fl = tape.variable(feat_logits);
    ad::Var me = ad::sigmoid(el);
    ad::Var mf = ad::sigmoid(fl);
    ad::Var x = ad::mul(tape.constant(ctx.features()), mf);
    ad::Var p = ctx.forward(params, x, me);
    ad::Var loss = ad::scale(ad::log(ad::add_scalar(p, 1e-12)), -1.0);
    ad::Var size = ad::mean_all(mf);
    ad::Var ent = binary_entropy(mf);
    if (s > 0) {
      size = ad::add(size, ad::mean_all(me));
      ent = ad::add(ent, binary_entropy(me));
    }
    loss = ad::add(loss, ad::add(ad::scale(size, opts.sparsity), ad::scale(ent, opts.entropy)));
    const double value = loss.scalar();
    if (!std::isfinite(value)) {
      throw NumericError("gnnexplainer diverged at epoch " + std::to_string(epoch));
    }
    if (loss_history) loss_history->push_back(value);
    tape.backward(loss);
    edge_opt.step(edge_logits, tape.grad(el));
    feat_opt.step(feat_logits, tape.grad(fl));
    if (!edge_logits.allFinite() || !feat_logits.allFinite()) {
      throw NumericError("gnnexplainer diverged at epoch " + std::to_string(epoch));
    }
  }

  Attribution a = skeleton(ctx, ExplainerKind::gnnexplainer, false);
  a.seed = seed;
  a.hyperparameters = {{"epochs", opts.epochs},
                       {"learning_rate", opts.learning_rate},
                       {"sparsity", opts.sparsity},
                       {"entropy", opts.entropy},
                       {"init_std", opts.init_std}};
  fill_mask(a, to_vector(sigmoid_of(edge_logits)), to_vector(sigmoid_of(feat_logits)));
  return a;
}

Attribution explain_random(const ExplanationContext& ctx, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> edge(ctx.num_scope_edges());
  for (double& v : edge) v = uniform01(rng);
  std::vector<double> feature(ctx.num_features());
  for (double& v : feature) v = uniform01(rng);
  Attribution a = skeleton(ctx, ExplainerKind::random, false);
  a.seed = seed;
  fill_mask(a, edge, feature);
  return a;
}

Attribution explain(ExplainerKind kind, const ExplanationContext& ctx, const ExplainerOptions& opts,
                    std::uint64_t seed) {
  switch (kind) {
    case ExplainerKind::gnnexplainer: return explain_gnnx(ctx, opts.gnnexplainer, seed);
    case ExplainerKind::integrated_gradients: return explain_ig(ctx, opts.ig);
    case ExplainerKind::deconvolution: return explain_deconv(ctx);
    case ExplainerKind::lrp: return explain_lrp(ctx, opts.lrp);
    case ExplainerKind::random: return explain_random(ctx, seed);
  }
  throw InvalidArgument("explain: unknown explainer");
}

}  // namespace lpx
