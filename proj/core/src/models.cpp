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

#include "lpx/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "adam.hpp"
#include "lpx/error.hpp"

namespace lpx {

namespace {

std::string layer_name(const char* prefix, int layer) { return prefix + std::to_string(layer); }

// h * w, walking only the nonzeros of h when it is mostly zero (one-hot
// features, masked aggregates).
Matrix sparse_aware_product(const Matrix& h, const Matrix& w) {
  const Eigen::Index nnz = (h.array() != 0.0).count();
  if (4 * nnz > h.size()) return h * w;
  Matrix out = Matrix::Zero(h.rows(), w.cols());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index k = 0; k < h.cols(); ++k) {
      if (h(i, k) != 0.0) out.row(i) += h(i, k) * w.row(k);
    }
  }
  return out;
}

const ad::Var& param(const ParameterVars& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw InvalidArgument("model is missing parameter '" + name + "'");
  return it->second;
}

Matrix glorot(Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = (2.0 * uniform01(rng) - 1.0) * limit;
  return w;
}

void validate(const ModelConfig& c) {
  if (c.layers < 1) throw InvalidArgument("model: layers must be >= 1");
  if (c.hidden_dim < 1 || c.embed_dim < 1) throw InvalidArgument("model: dimensions must be >= 1");
}

}  // namespace

LinkPredictor::LinkPredictor(ModelConfig config, std::size_t num_features, ParameterMap params)
    : config_(config), num_features_(num_features), params_(std::move(params)) {
  validate(config_);
}

LinkPredictor LinkPredictor::initialize(const ModelConfig& config, std::size_t num_features,
                                        std::uint64_t seed) {
  validate(config);
  if (num_features == 0) throw InvalidArgument("model: need at least one input feature");
  Rng rng(derive_seed(seed, {10}));
  ParameterMap p;
  const auto f = static_cast<Eigen::Index>(num_features);
  const Eigen::Index hid = config.hidden_dim;
  const Eigen::Index emb = config.embed_dim;
  switch (config.encoder) {
    case EncoderKind::gin:
      for (int l = 0; l < config.layers; ++l) {
        const std::string name = layer_name("gin", l);
        const Eigen::Index in = l == 0 ? f : hid;
        const Eigen::Index out = l == config.layers - 1 ? emb : hid;
        p[name + ".lin1.weight"] = glorot(in, hid, rng);
        p[name + ".lin1.bias"] = Matrix::Zero(1, hid);
        p[name + ".lin2.weight"] = glorot(hid, out, rng);
        p[name + ".lin2.bias"] = Matrix::Zero(1, out);
        if (config.learn_gin_epsilon) p[name + ".eps"] = Matrix::Constant(1, 1, config.gin_epsilon);
      }
      break;
    case EncoderKind::gcn_vgae: {
      for (int l = 0; l + 1 < config.layers; ++l) {
        const std::string name = layer_name("gcn", l);
        p[name + ".weight"] = glorot(l == 0 ? f : hid, hid, rng);
        p[name + ".bias"] = Matrix::Zero(1, hid);
      }
      const Eigen::Index in = config.layers == 1 ? f : hid;
      p["gcn_mu.weight"] = glorot(in, emb, rng);
      p["gcn_mu.bias"] = Matrix::Zero(1, emb);
      p["gcn_logstd.weight"] = glorot(in, emb, rng);
      p["gcn_logstd.bias"] = Matrix::Zero(1, emb);
      break;
    }
    case EncoderKind::toy:
      break;
  }
  LinkPredictor model(config, num_features, std::move(p));
  model.metadata_.options.seed = seed;
  model.metadata_.options.epochs = 0;
  return model;
}

LinkPredictor LinkPredictor::toy(DecoderKind decoder, std::size_t num_features) {
  ModelConfig cfg;
  cfg.encoder = EncoderKind::toy;
  cfg.decoder = decoder;
  cfg.layers = 1;
  return LinkPredictor(cfg, num_features, {});
}

ParameterVars LinkPredictor::bind(ad::Tape& tape, bool trainable) const {
  ParameterVars vars;
  for (const auto& [name, value] : params_) {
    vars.emplace(name, trainable ? tape.variable(value) : tape.constant(value));
  }
  return vars;
}

ad::Var LinkPredictor::gcn_layer(const ParameterVars& params, const std::string& name, ad::Var h,
                                 ad::Var w,
                                 const std::shared_ptr<const ad::MessageIndex>& messages) const {
  ad::Var z = ad::matmul(h, param(params, name + ".weight"));
  z = ad::masked_neighbor_sum(z, w, messages, ad::Normalization::symmetric_self_loops);
  return ad::add(z, param(params, name + ".bias"));
}

ad::Var LinkPredictor::gcn_hidden(const ParameterVars& params, ad::Var x, ad::Var w,
                                  const std::shared_ptr<const ad::MessageIndex>& messages) const {
  ad::Var h = x;
  for (int l = 0; l + 1 < config_.layers; ++l) {
    h = ad::relu(gcn_layer(params, layer_name("gcn", l), h, w, messages));
  }
  return h;
}

ad::Var LinkPredictor::encode(const ParameterVars& params, ad::Var x, ad::Var edge_weights,
                              const std::shared_ptr<const ad::MessageIndex>& messages) const {
  if (static_cast<std::size_t>(x.cols()) != num_features_) {
    throw InvalidArgument("encode: expected " + std::to_string(num_features_) + " features, got " +
                          std::to_string(x.cols()));
  }
  if (static_cast<std::size_t>(edge_weights.rows()) != messages->num_edges) {
    throw InvalidArgument("encode: got " + std::to_string(edge_weights.rows()) +
                          " edge weights for " + std::to_string(messages->num_edges) + " edges");
  }
  switch (config_.encoder) {
    case EncoderKind::toy:
      return ad::add(x, ad::masked_neighbor_sum(x, edge_weights, messages,
                                                ad::Normalization::structural_mean));
    case EncoderKind::gcn_vgae:
      return gcn_layer(params, "gcn_mu", gcn_hidden(params, x, edge_weights, messages),
                       edge_weights, messages);
    case EncoderKind::gin: {
      ad::Var h = x;
      for (int l = 0; l < config_.layers; ++l) {
        const std::string name = layer_name("gin", l);
        ad::Var agg = ad::masked_neighbor_sum(h, edge_weights, messages, ad::Normalization::none);
        ad::Var self;
        if (config_.learn_gin_epsilon) {
          self = ad::add(h, ad::mul(h, param(params, name + ".eps")));
        } else {
          self = ad::scale(h, 1.0 + config_.gin_epsilon);
        }
        ad::Var z = ad::add(self, agg);
        z = ad::relu(ad::add(ad::matmul(z, param(params, name + ".lin1.weight")),
                             param(params, name + ".lin1.bias")));
        z = ad::add(ad::matmul(z, param(params, name + ".lin2.weight")),
                    param(params, name + ".lin2.bias"));
        h = l + 1 < config_.layers ? ad::relu(z) : z;
      }
      return h;
    }
  }
  throw InvalidArgument("encode: unknown encoder kind");
}

LinkPredictor::VariationalEncoding LinkPredictor::encode_variational(
    const ParameterVars& params, ad::Var x, ad::Var edge_weights,
    const std::shared_ptr<const ad::MessageIndex>& messages, Rng& rng) const {
  if (config_.encoder != EncoderKind::gcn_vgae) {
    throw InvalidArgument("encode_variational requires the gcn_vgae encoder");
  }
  ad::Var h = gcn_hidden(params, x, edge_weights, messages);
  VariationalEncoding enc;
  enc.mu = gcn_layer(params, "gcn_mu", h, edge_weights, messages);
  enc.logstd = gcn_layer(params, "gcn_logstd", h, edge_weights, messages);
  Matrix noise(enc.mu.rows(), enc.mu.cols());
  for (Eigen::Index k = 0; k < noise.size(); ++k) noise.data()[k] = standard_normal(rng);
  ad::Tape& tape = *x.tape();
  enc.sample = ad::add(enc.mu, ad::mul(tape.constant(std::move(noise)), ad::exp(enc.logstd)));
  return enc;
}

ad::Var LinkPredictor::decode(ad::Var ei, ad::Var ej) const {
  if (config_.decoder == DecoderKind::inner_product) return ad::sigmoid(ad::dot_rows(ei, ej));
  ad::Var c = ad::dot_rows(ad::rowwise_l2_normalize(ei), ad::rowwise_l2_normalize(ej));
  return ad::add_scalar(ad::scale(c, 0.5), 0.5);
}

Matrix LinkPredictor::encode_values(const Matrix& x, const Matrix& edge_weights,
                                    const ad::MessageIndex& messages,
                                    std::span<const NodeId> rows) const {
  if (static_cast<std::size_t>(x.cols()) != num_features_) {
    throw InvalidArgument("encode: expected " + std::to_string(num_features_) + " features, got " +
                          std::to_string(x.cols()));
  }
  if (static_cast<std::size_t>(edge_weights.rows()) != messages.num_edges) {
    throw InvalidArgument("encode: got " + std::to_string(edge_weights.rows()) +
                          " edge weights for " + std::to_string(messages.num_edges) + " edges");
  }
  auto gcn = [&](const std::string& name, const Matrix& h) -> Matrix {
    Matrix z = sparse_aware_product(h, params_.at(name + ".weight"));
    z = ad::neighbor_sum_values(z, edge_weights, messages, ad::Normalization::symmetric_self_loops);
    return z.rowwise() + params_.at(name + ".bias").row(0);
  };
  for (NodeId r : rows) {
    if (r < 0 || static_cast<std::size_t>(r) >= messages.num_nodes) {
      throw InvalidArgument("encode: row " + std::to_string(r) + " out of range");
    }
  }
  auto select = [&](const Matrix& m) -> Matrix {
    if (rows.empty()) return m;
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = m.row(rows[k]);
    return out;
  };
  switch (config_.encoder) {
    case EncoderKind::toy:
      return select(x + ad::neighbor_sum_values(x, edge_weights, messages, ad::Normalization::structural_mean));
    case EncoderKind::gcn_vgae: {
      Matrix h = x;
      for (int l = 0; l + 1 < config_.layers; ++l) h = gcn(layer_name("gcn", l), h).cwiseMax(0.0);
      return select(gcn("gcn_mu", h));
    }
    case EncoderKind::gin: {
      Matrix h = x;
      for (int l = 0; l < config_.layers; ++l) {
        const std::string name = layer_name("gin", l);
        const bool last = l + 1 == config_.layers;
        const Matrix& w1 = params_.at(name + ".lin1.weight");
        const double self_scale =
            config_.learn_gin_epsilon ? 1.0 + params_.at(name + ".eps")(0, 0) : 1.0 + config_.gin_epsilon;
        // The first linear map commutes with aggregation; apply it first when
        // that shrinks the rows being summed.
        const bool project_first = w1.cols() < h.cols();
        if (project_first) h = sparse_aware_product(h, w1);
        Matrix agg = ad::neighbor_sum_values(h, edge_weights, messages, ad::Normalization::none);
        // The MLP is row-wise, so the last layer only needs the requested rows.
        if (last) {
          agg = select(agg);
          h = select(h);
        }
        Matrix z = h * self_scale + agg;
        if (!project_first) z = sparse_aware_product(z, w1);
        z = (z.rowwise() + params_.at(name + ".lin1.bias").row(0)).cwiseMax(0.0);
        z = sparse_aware_product(z, params_.at(name + ".lin2.weight"));
        z.rowwise() += params_.at(name + ".lin2.bias").row(0);
        h = last ? z : Matrix(z.cwiseMax(0.0));
      }
      return h;
    }
  }
  throw InvalidArgument("encode: unknown encoder kind");
}

Matrix LinkPredictor::embed(const Graph& g) const {
  const auto messages = ad::MessageIndex::from_graph(g);
  return encode_values(g.features(), Matrix::Ones(static_cast<Eigen::Index>(g.num_edges()), 1), *messages);
}

std::vector<double> LinkPredictor::predict_many(const Graph& g, std::span<const Edge> targets) const {
  for (const Edge& e : targets) {
    if (!g.contains_node(e.u) || !g.contains_node(e.v)) {
      throw InvalidArgument("predict: unknown node in (" + std::to_string(e.u) + ", " +
                            std::to_string(e.v) + ")");
    }
  }
  const Matrix z = embed(g);
  std::vector<double> out;
  out.reserve(targets.size());
  for (const Edge& e : targets) {
    out.push_back(decode_embeddings(config_.decoder, z.row(e.u), z.row(e.v)).probability);
  }
  return out;
}

double LinkPredictor::predict(const Graph& g, Edge target) const {
  const Edge one[] = {target};
  return predict_many(g, one).front();
}

DecodeResult decode_embeddings(DecoderKind decoder, const Eigen::RowVectorXd& ei,
                               const Eigen::RowVectorXd& ej) {
  if (ei.size() != ej.size()) throw InvalidArgument("decode: embedding dimensions differ");
  DecodeResult r;
  if (decoder == DecoderKind::inner_product) {
    const double s = ei.dot(ej);
    r.probability = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
    return r;
  }
  const double ni = ei.norm();
  const double nj = ej.norm();
  if (ni == 0.0 || nj == 0.0) {
    r.zero_norm = true;
    return r;
  }
  r.probability = std::clamp((ei.dot(ej) / (ni * nj) + 1.0) / 2.0, 0.0, 1.0);
  return r;
}

Matrix toy_embed(const Graph& g, const Matrix& x) {
  if (static_cast<std::size_t>(x.rows()) != g.num_nodes()) {
    throw InvalidArgument("toy_embed: feature rows do not match node count");
  }
  Matrix e = x;
  for (NodeId i = 0; static_cast<std::size_t>(i) < g.num_nodes(); ++i) {
    const auto nb = g.neighbors(i);
    if (nb.empty()) continue;
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
    for (NodeId j : nb) mean += x.row(j);
    e.row(i) += mean / static_cast<double>(nb.size());
  }
  return e;
}

double roc_auc(std::span<const double> positive_scores, std::span<const double> negative_scores) {
  if (positive_scores.empty() || negative_scores.empty()) {
    throw InvalidArgument("roc_auc: need at least one positive and one negative score");
  }
  double wins = 0.0;
  for (double p : positive_scores) {
    for (double n : negative_scores) {
      if (p > n) {
        wins += 1.0;
      } else if (p == n) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(positive_scores.size()) * static_cast<double>(negative_scores.size()));
}

std::pair<double, double> evaluate_split(const LinkPredictor& model, const EdgeSplit& split) {
  const auto pos = model.predict_many(split.train_graph, split.test_pos);
  const auto neg = model.predict_many(split.train_graph, split.test_neg);
  const double threshold = model.metadata().accuracy_threshold;
  std::size_t correct = 0;
  for (double p : pos) correct += p >= threshold ? 1 : 0;
  for (double p : neg) correct += p < threshold ? 1 : 0;
  return {roc_auc(pos, neg), static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size())};
}

LinkPredictor train(const ModelConfig& config, const EdgeSplit& split, const TrainOptions& options) {
  const Graph& g = split.train_graph;
  if (g.num_edges() == 0) throw InvalidArgument("train: training graph has no edges");
  if (options.epochs < 0) throw InvalidArgument("train: epochs must be >= 0");

  LinkPredictor model = LinkPredictor::initialize(config, g.num_features(), options.seed);
  model.metadata().options = options;
  if (config.encoder == EncoderKind::toy) {
    // Nothing to learn.
  } else {
    Rng rng(derive_seed(options.seed, {11}));
    const auto messages = ad::MessageIndex::from_graph(g);
    const std::size_t m = g.num_edges();
    const double n = static_cast<double>(g.num_nodes());

    std::vector<NodeId> pos_src;
    std::vector<NodeId> pos_dst;
    for (const Edge& e : g.edges()) {
      pos_src.push_back(e.u);
      pos_dst.push_back(e.v);
    }
    Matrix targets(static_cast<Eigen::Index>(2 * m), 1);
    targets.topRows(static_cast<Eigen::Index>(m)).setOnes();
    targets.bottomRows(static_cast<Eigen::Index>(m)).setZero();

    std::map<std::string, Matrix> velocity;
    std::map<std::string, detail::Adam> adam;
    for (const auto& [name, value] : model.parameters()) {
      velocity[name] = Matrix::Zero(value.rows(), value.cols());
      adam.emplace(name, detail::Adam(options.learning_rate));
    }

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
      const std::vector<Edge> negatives = sample_non_edges(g, m, rng);
      std::vector<NodeId> src = pos_src;
      std::vector<NodeId> dst = pos_dst;
      for (const Edge& e : negatives) {
        src.push_back(e.u);
        dst.push_back(e.v);
      }

      ad::Tape tape;
      const ParameterVars params = model.bind(tape, true);
      ad::Var x = tape.constant(g.features());
      ad::Var w = tape.constant(Matrix::Ones(static_cast<Eigen::Index>(m), 1));
      double loss_value = 0.0;
      try {
        ad::Var z;
        ad::Var kl;
        if (config.encoder == EncoderKind::gcn_vgae) {
          const auto enc = model.encode_variational(params, x, w, messages, rng);
          z = enc.sample;
          // -(0.5 / N) * mean_i sum_d (1 + 2 logstd - mu^2 - std^2)
          ad::Var two_logstd = ad::scale(enc.logstd, 2.0);
          ad::Var term = ad::add_scalar(
              ad::sub(ad::sub(two_logstd, ad::mul(enc.mu, enc.mu)), ad::exp(two_logstd)), 1.0);
          kl = ad::scale(ad::sum_all(term), -0.5 / (n * n));
        } else {
          z = model.encode(params, x, w, messages);
        }
        ad::Var zi = ad::gather_rows(z, src);
        ad::Var zj = ad::gather_rows(z, dst);
        ad::Var loss = config.decoder == DecoderKind::inner_product
                           ? ad::bce_with_logits(ad::dot_rows(zi, zj), targets)
                           : ad::binary_cross_entropy(model.decode(zi, zj), targets);
        if (kl.valid()) loss = ad::add(loss, ad::scale(kl, options.kl_weight));
        loss_value = loss.scalar();
        tape.backward(loss);
      } catch (const NumericError& err) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + err.what());
      }
      if (!std::isfinite(loss_value)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": non-finite loss");
      }
      model.metadata().loss_history.push_back(loss_value);

      std::map<std::string, Matrix> grads;
      double sq_norm = 0.0;
      for (const auto& [name, var] : params) {
        grads[name] = tape.grad(var);
        sq_norm += grads[name].squaredNorm();
      }
      const double norm = std::sqrt(sq_norm);
      const double clip =
          options.max_grad_norm > 0.0 && norm > options.max_grad_norm ? options.max_grad_norm / norm : 1.0;

      ParameterMap updated = model.parameters();
      for (auto& [name, value] : updated) {
        const Matrix grad = clip * grads[name];
        if (options.optimizer == Optimizer::adam) {
          adam.at(name).step(value, grad);
        } else {
          Matrix& v = velocity[name];
          v = options.momentum * v + grad;
          value -= options.learning_rate * v;
        }
        if (!value.allFinite()) {
          throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                             ": parameter '" + name + "' became non-finite");
        }
      }
      TrainingMetadata meta = model.metadata();
      model = LinkPredictor(config, g.num_features(), std::move(updated));
      model.metadata() = std::move(meta);
    }
  }
  const auto [auc, acc] = evaluate_split(model, split);
  model.metadata().test_auc = auc;
  model.metadata().test_accuracy = acc;
  return model;
}

}  // namespace lpx
