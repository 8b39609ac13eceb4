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

#include "lpx/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpx/error.hpp"

namespace lpx::ad {

namespace {

using Node = Tape::Node;

constexpr double kProbClamp = 1e-7;

std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

Tape& same_tape(Var a, Var b) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw InvalidArgument("operands live on different tapes");
  }
  return *a.tape();
}

Tape& tape_of(Var a) {
  if (!a.valid()) throw InvalidArgument("operand is not attached to a tape");
  return *a.tape();
}

int broadcast_kind(const Matrix& a, const Matrix& b, std::string_view op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return 0;
  if (b.rows() == 1 && b.cols() == a.cols()) return 1;
  if (b.rows() == 1 && b.cols() == 1) return 2;
  throw InvalidArgument(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " +
                        shape_str(b));
}

Matrix expand(const Matrix& b, Eigen::Index rows, Eigen::Index cols, int kind) {
  switch (kind) {
    case 1:
      return b.replicate(rows, 1);
    case 2:
      return Matrix::Constant(rows, cols, b(0, 0));
    default:
      return b;
  }
}

Matrix reduce_to(const Matrix& g, int kind) {
  switch (kind) {
    case 1:
      return g.colwise().sum();
    case 2:
      return Matrix::Constant(1, 1, g.sum());
    default:
      return g;
  }
}

/// z + eps * sign(z), with sign(0) = +1.
Matrix stabilize(const Matrix& z, double eps) {
  return z.unaryExpr([eps](double v) { return v + (v >= 0.0 ? eps : -eps); });
}

void accumulate(std::vector<Matrix>& slots, int id, const Matrix& g) {
  Matrix& slot = slots[static_cast<std::size_t>(id)];
  if (slot.size() == 0) {
    slot = g;
  } else {
    slot += g;
  }
}

Node make_node(OpKind op, std::vector<int> inputs, Matrix value, bool requires_grad) {
  Node n;
  n.op = op;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return n;
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::leaf: return "leaf";
    case OpKind::matmul: return "matmul";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::add_scalar: return "add_scalar";
    case OpKind::relu: return "relu";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::exp: return "exp";
    case OpKind::log: return "log";
    case OpKind::concat_rows: return "concat_rows";
    case OpKind::gather_rows: return "gather_rows";
    case OpKind::scatter_rows: return "scatter_rows";
    case OpKind::masked_neighbor_sum: return "masked_neighbor_sum";
    case OpKind::mean_rows: return "mean_rows";
    case OpKind::sum_all: return "sum_all";
    case OpKind::mean_all: return "mean_all";
    case OpKind::rowwise_l2_normalize: return "rowwise_l2_normalize";
    case OpKind::dot_rows: return "dot_rows";
    case OpKind::bce_with_logits: return "bce_with_logits";
    case OpKind::binary_cross_entropy: return "binary_cross_entropy";
  }
  return "unknown";
}

std::shared_ptr<const MessageIndex> MessageIndex::from_graph(const Graph& g) {
  auto idx = std::make_shared<MessageIndex>();
  idx->num_nodes = g.num_nodes();
  idx->num_edges = g.num_edges();
  idx->src.reserve(2 * g.num_edges());
  idx->dst.reserve(2 * g.num_edges());
  idx->edge.reserve(2 * g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges()[e];
    idx->src.push_back(ed.u);
    idx->dst.push_back(ed.v);
    idx->edge.push_back(e);
    idx->src.push_back(ed.v);
    idx->dst.push_back(ed.u);
    idx->edge.push_back(e);
  }
  idx->structural_degree.resize(g.num_nodes());
  for (NodeId i = 0; static_cast<std::size_t>(i) < g.num_nodes(); ++i) {
    idx->structural_degree[i] = static_cast<double>(g.degree(i));
  }
  return idx;
}

// ---------------------------------------------------------------------------
// Var / Tape bookkeeping

const Matrix& Var::value() const {
  if (!valid()) throw InvalidArgument("Var is not attached to a tape");
  return tape_->nodes_[static_cast<std::size_t>(id_)].value;
}

double Var::scalar() const {
  const Matrix& v = value();
  if (v.rows() != 1 || v.cols() != 1) throw InvalidArgument("scalar() on a " + shape_str(v) + " Var");
  return v(0, 0);
}

Var Tape::push(Node node) {
  // x * 0 is NaN exactly when x is NaN or infinite.
  if (!std::isfinite((node.value.array() * 0.0).sum())) {
    throw NumericError(std::string(op_name(node.op)) + " produced a non-finite value");
  }
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

const Tape::Node& Tape::node(Var v) const {
  if (v.tape() != this) throw InvalidArgument("Var belongs to another tape");
  return nodes_[static_cast<std::size_t>(v.id())];
}

Var Tape::constant(Matrix value) { return push(make_node(OpKind::leaf, {}, std::move(value), false)); }

Var Tape::variable(Matrix value) { return push(make_node(OpKind::leaf, {}, std::move(value), true)); }

std::vector<double> Tape::relu_inputs() const {
  std::vector<double> out;
  for (const Node& n : nodes_) {
    if (n.op != OpKind::relu) continue;
    const Matrix& in = nodes_[static_cast<std::size_t>(n.inputs[0])].value;
    out.insert(out.end(), in.data(), in.data() + in.size());
  }
  return out;
}

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  const auto id = static_cast<std::size_t>(v.id());
  if (id < grads_.size() && grads_[id].size() != 0) return grads_[id];
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

Matrix Tape::relevance_of(Var v) const {
  const Node& n = node(v);
  const auto id = static_cast<std::size_t>(v.id());
  if (id < relevance_.size() && relevance_[id].size() != 0) return relevance_[id];
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tape::backward(Var output, BackwardMode mode) {
  const Node& out = node(output);
  if (out.value.rows() != 1 || out.value.cols() != 1) {
    throw InvalidArgument("backward: output must be 1x1, got " + shape_str(out.value));
  }
  grads_.assign(nodes_.size(), Matrix());
  if (!out.requires_grad) return;
  grads_[static_cast<std::size_t>(output.id())] = Matrix::Ones(1, 1);
  for (int id = output.id(); id >= 0; --id) {
    const auto uid = static_cast<std::size_t>(id);
    if (grads_[uid].size() == 0 || !nodes_[uid].requires_grad) continue;
    backprop_node(id, grads_, mode);
  }
}

void Tape::relevance(Var output, double epsilon) {
  if (!(epsilon > 0.0)) throw InvalidArgument("relevance: epsilon must be > 0");
  const Node& out = node(output);
  if (out.value.rows() != 1 || out.value.cols() != 1) {
    throw InvalidArgument("relevance: output must be 1x1, got " + shape_str(out.value));
  }
  relevance_.assign(nodes_.size(), Matrix());
  if (!out.requires_grad) return;
  relevance_[static_cast<std::size_t>(output.id())] = out.value;
  for (int id = output.id(); id >= 0; --id) {
    const auto uid = static_cast<std::size_t>(id);
    if (relevance_[uid].size() == 0 || !nodes_[uid].requires_grad) continue;
    relevance_node(id, relevance_, epsilon);
  }
}

// ---------------------------------------------------------------------------
// Forward primitives

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw InvalidArgument("matmul: shape mismatch " + shape_str(av) + " * " + shape_str(bv));
  }
  const bool rg = t.node(a).requires_grad || t.node(b).requires_grad;
  return t.push(make_node(OpKind::matmul, {a.id(), b.id()}, av * bv, rg));
}

namespace {

Var binary_elementwise(OpKind op, Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const int kind = broadcast_kind(av, bv, op_name(op));
  Matrix out;
  auto apply = [&](const auto& full) {
    switch (op) {
      case OpKind::add: out = av + full; break;
      case OpKind::sub: out = av - full; break;
      default: out = av.cwiseProduct(full); break;
    }
  };
  if (kind == 0) {
    apply(bv);
  } else if (kind == 1) {
    apply(bv.replicate(av.rows(), 1));
  } else {
    apply(Matrix::Constant(av.rows(), av.cols(), bv(0, 0)));
  }
  Node n = make_node(op, {a.id(), b.id()}, std::move(out),
                     t.node(a).requires_grad || t.node(b).requires_grad);
  n.broadcast = kind;
  return t.push(std::move(n));
}

Var unary(OpKind op, Var a, Matrix value) {
  Tape& t = tape_of(a);
  return t.push(make_node(op, {a.id()}, std::move(value), t.node(a).requires_grad));
}

}  // namespace

Var add(Var a, Var b) { return binary_elementwise(OpKind::add, a, b); }
Var sub(Var a, Var b) { return binary_elementwise(OpKind::sub, a, b); }
Var mul(Var a, Var b) { return binary_elementwise(OpKind::mul, a, b); }

Var scale(Var a, double s) {
  Tape& t = tape_of(a);
  Node n = make_node(OpKind::scale, {a.id()}, a.value() * s, t.node(a).requires_grad);
  n.scalar = s;
  return t.push(std::move(n));
}

Var add_scalar(Var a, double c) {
  Tape& t = tape_of(a);
  Node n = make_node(OpKind::add_scalar, {a.id()}, a.value().array() + c, t.node(a).requires_grad);
  n.scalar = c;
  return t.push(std::move(n));
}

Var relu(Var a) { return unary(OpKind::relu, a, a.value().cwiseMax(0.0)); }

Var sigmoid(Var a) {
  Matrix v = a.value().unaryExpr([](double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  return unary(OpKind::sigmoid, a, std::move(v));
}

Var exp(Var a) { return unary(OpKind::exp, a, a.value().array().exp().matrix()); }

Var log(Var a) { return unary(OpKind::log, a, a.value().array().log().matrix()); }

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no operands");
  Tape& t = tape_of(parts.front());
  Eigen::Index rows = 0;
  const Eigen::Index cols = parts.front().cols();
  std::vector<int> inputs;
  bool rg = false;
  for (Var p : parts) {
    same_tape(parts.front(), p);
    if (p.cols() != cols) throw InvalidArgument("concat_rows: column count mismatch");
    rows += p.rows();
    inputs.push_back(p.id());
    rg = rg || t.node(p).requires_grad;
  }
  Matrix out(rows, cols);
  Eigen::Index r = 0;
  for (Var p : parts) {
    out.middleRows(r, p.rows()) = p.value();
    r += p.rows();
  }
  return t.push(make_node(OpKind::concat_rows, std::move(inputs), std::move(out), rg));
}

Var gather_rows(Var a, std::span<const NodeId> rows) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), av.cols());
  Node n;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] < 0 || rows[k] >= av.rows()) throw InvalidArgument("gather_rows: row index out of range");
    out.row(static_cast<Eigen::Index>(k)) = av.row(rows[k]);
    n.index.push_back(static_cast<std::size_t>(rows[k]));
  }
  n.op = OpKind::gather_rows;
  n.inputs = {a.id()};
  n.value = std::move(out);
  n.requires_grad = t.node(a).requires_grad;
  return t.push(std::move(n));
}

Var scatter_rows(Matrix base, Var src, std::span<const std::size_t> rows) {
  Tape& t = tape_of(src);
  const Matrix& sv = src.value();
  if (static_cast<std::size_t>(sv.rows()) != rows.size() || sv.cols() != base.cols()) {
    throw InvalidArgument("scatter_rows: shape mismatch " + shape_str(sv) + " into " + shape_str(base));
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= static_cast<std::size_t>(base.rows())) {
      throw InvalidArgument("scatter_rows: row index out of range");
    }
    base.row(static_cast<Eigen::Index>(rows[k])) = sv.row(static_cast<Eigen::Index>(k));
  }
  Node n = make_node(OpKind::scatter_rows, {src.id()}, std::move(base), t.node(src).requires_grad);
  n.index.assign(rows.begin(), rows.end());
  return t.push(std::move(n));
}

Matrix neighbor_sum_values(const Matrix& hv, const Matrix& wv, const MessageIndex& mi,
                           Normalization norm, Matrix* degrees) {
  Matrix out = Matrix::Zero(hv.rows(), hv.cols());
  Matrix saved;
  if (norm == Normalization::symmetric_self_loops) {
    saved = Matrix::Ones(hv.rows(), 1);
    for (std::size_t m = 0; m < mi.src.size(); ++m) saved(mi.dst[m], 0) += wv(static_cast<Eigen::Index>(mi.edge[m]), 0);
    for (Eigen::Index i = 0; i < hv.rows(); ++i) out.row(i) = hv.row(i) / saved(i, 0);
  }
  for (std::size_t m = 0; m < mi.src.size(); ++m) {
    const NodeId s = mi.src[m];
    const NodeId d = mi.dst[m];
    double coef = wv(static_cast<Eigen::Index>(mi.edge[m]), 0);
    if (norm == Normalization::structural_mean) {
      coef /= mi.structural_degree[d];
    } else if (norm == Normalization::symmetric_self_loops) {
      coef /= std::sqrt(saved(d, 0) * saved(s, 0));
    }
    out.row(d) += coef * hv.row(s);
  }
  if (degrees) *degrees = std::move(saved);
  return out;
}

Var masked_neighbor_sum(Var h, Var w, std::shared_ptr<const MessageIndex> messages,
                        Normalization norm) {
  Tape& t = same_tape(h, w);
  if (!messages) throw InvalidArgument("masked_neighbor_sum: missing message index");
  const MessageIndex& mi = *messages;
  const Matrix& hv = h.value();
  const Matrix& wv = w.value();
  if (static_cast<std::size_t>(hv.rows()) != mi.num_nodes) {
    throw InvalidArgument("masked_neighbor_sum: features have " + std::to_string(hv.rows()) +
                          " rows, graph has " + std::to_string(mi.num_nodes) + " nodes");
  }
  if (static_cast<std::size_t>(wv.rows()) != mi.num_edges || wv.cols() != 1) {
    throw InvalidArgument("masked_neighbor_sum: expected " + std::to_string(mi.num_edges) +
                          "x1 edge weights, got " + shape_str(wv));
  }

  Matrix saved;
  Matrix out = neighbor_sum_values(hv, wv, mi, norm, &saved);
  Node n = make_node(OpKind::masked_neighbor_sum, {h.id(), w.id()}, std::move(out),
                     t.node(h).requires_grad || t.node(w).requires_grad);
  n.messages = std::move(messages);
  n.norm = norm;
  n.saved = std::move(saved);
  return t.push(std::move(n));
}

Var mean_rows(Var a) {
  if (a.rows() == 0) throw InvalidArgument("mean_rows: empty operand");
  return unary(OpKind::mean_rows, a, a.value().colwise().mean());
}

Var sum_all(Var a) { return unary(OpKind::sum_all, a, Matrix::Constant(1, 1, a.value().sum())); }

Var mean_all(Var a) {
  if (a.value().size() == 0) throw InvalidArgument("mean_all: empty operand");
  return unary(OpKind::mean_all, a, Matrix::Constant(1, 1, a.value().mean()));
}

Var rowwise_l2_normalize(Var a) {
  Tape& t = tape_of(a);
  const Matrix& av = a.value();
  Matrix norms = av.rowwise().norm();
  Matrix out = Matrix::Zero(av.rows(), av.cols());
  for (Eigen::Index r = 0; r < av.rows(); ++r) {
    if (norms(r, 0) > 0.0) out.row(r) = av.row(r) / norms(r, 0);
  }
  Node n = make_node(OpKind::rowwise_l2_normalize, {a.id()}, std::move(out), t.node(a).requires_grad);
  n.saved = std::move(norms);
  return t.push(std::move(n));
}

Var dot_rows(Var a, Var b) {
  Tape& t = same_tape(a, b);
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw InvalidArgument("dot_rows: shape mismatch " + shape_str(av) + " vs " + shape_str(bv));
  }
  Matrix out = av.cwiseProduct(bv).rowwise().sum();
  return t.push(make_node(OpKind::dot_rows, {a.id(), b.id()}, std::move(out),
                          t.node(a).requires_grad || t.node(b).requires_grad));
}

Var bce_with_logits(Var logits, const Matrix& targets) {
  Tape& t = tape_of(logits);
  const Matrix& x = logits.value();
  if (x.rows() != targets.rows() || x.cols() != targets.cols() || x.size() == 0) {
    throw InvalidArgument("bce_with_logits: shape mismatch " + shape_str(x) + " vs " + shape_str(targets));
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double v = x.data()[k];
    total += std::max(v, 0.0) - v * targets.data()[k] + std::log1p(std::exp(-std::abs(v)));
  }
  Node n = make_node(OpKind::bce_with_logits, {logits.id()},
                     Matrix::Constant(1, 1, total / static_cast<double>(x.size())),
                     t.node(logits).requires_grad);
  n.saved = targets;
  return t.push(std::move(n));
}

Var binary_cross_entropy(Var probs, const Matrix& targets) {
  Tape& t = tape_of(probs);
  const Matrix& p = probs.value();
  if (p.rows() != targets.rows() || p.cols() != targets.cols() || p.size() == 0) {
    throw InvalidArgument("binary_cross_entropy: shape mismatch " + shape_str(p) + " vs " +
                          shape_str(targets));
  }
  double total = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double q = std::clamp(p.data()[k], kProbClamp, 1.0 - kProbClamp);
    const double y = targets.data()[k];
    total -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
  }
  Node n = make_node(OpKind::binary_cross_entropy, {probs.id()},
                     Matrix::Constant(1, 1, total / static_cast<double>(p.size())),
                     t.node(probs).requires_grad);
  n.saved = targets;
  return t.push(std::move(n));
}

// ---------------------------------------------------------------------------
// Reverse passes

void Tape::backprop_node(int id, std::vector<Matrix>& grads, BackwardMode mode) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  const Matrix& g = grads[static_cast<std::size_t>(id)];
  auto in = [&](std::size_t k) -> const Node& { return nodes_[static_cast<std::size_t>(n.inputs[k])]; };
  auto send = [&](std::size_t k, const Matrix& v) {
    if (in(k).requires_grad) accumulate(grads, n.inputs[k], v);
  };

  switch (n.op) {
    case OpKind::leaf:
      break;
    case OpKind::matmul:
      send(0, g * in(1).value.transpose());
      send(1, in(0).value.transpose() * g);
      break;
    case OpKind::add:
      send(0, g);
      send(1, reduce_to(g, n.broadcast));
      break;
    case OpKind::sub:
      send(0, g);
      send(1, reduce_to(-g, n.broadcast));
      break;
    case OpKind::mul: {
      const Matrix& a = in(0).value;
      send(0, g.cwiseProduct(expand(in(1).value, a.rows(), a.cols(), n.broadcast)));
      send(1, reduce_to(g.cwiseProduct(a), n.broadcast));
      break;
    }
    case OpKind::scale:
      send(0, g * n.scalar);
      break;
    case OpKind::add_scalar:
      send(0, g);
      break;
    case OpKind::relu:
      if (mode == BackwardMode::deconv) {
        send(0, g.cwiseMax(0.0));
      } else {
        send(0, g.binaryExpr(in(0).value, [](double gv, double x) { return x > 0.0 ? gv : 0.0; }));
      }
      break;
    case OpKind::sigmoid:
      send(0, g.cwiseProduct(n.value.unaryExpr([](double y) { return y * (1.0 - y); })));
      break;
    case OpKind::exp:
      send(0, g.cwiseProduct(n.value));
      break;
    case OpKind::log:
      send(0, g.cwiseQuotient(in(0).value));
      break;
    case OpKind::concat_rows: {
      Eigen::Index r = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index rows = in(k).value.rows();
        send(k, g.middleRows(r, rows));
        r += rows;
      }
      break;
    }
    case OpKind::gather_rows: {
      Matrix ga = Matrix::Zero(in(0).value.rows(), in(0).value.cols());
      for (std::size_t k = 0; k < n.index.size(); ++k) {
        ga.row(static_cast<Eigen::Index>(n.index[k])) += g.row(static_cast<Eigen::Index>(k));
      }
      send(0, ga);
      break;
    }
    case OpKind::scatter_rows: {
      Matrix gs(in(0).value.rows(), in(0).value.cols());
      for (std::size_t k = 0; k < n.index.size(); ++k) {
        gs.row(static_cast<Eigen::Index>(k)) = g.row(static_cast<Eigen::Index>(n.index[k]));
      }
      send(0, gs);
      break;
    }
    case OpKind::masked_neighbor_sum: {
      const MessageIndex& mi = *n.messages;
      const Matrix& h = in(0).value;
      const Matrix& w = in(1).value;
      Matrix gh = Matrix::Zero(h.rows(), h.cols());
      Matrix gw = Matrix::Zero(w.rows(), 1);
      const bool gcn = n.norm == Normalization::symmetric_self_loops;
      Matrix gdeg;
      if (gcn) {
        const Matrix& d = n.saved;
        gdeg = Matrix::Zero(h.rows(), 1);
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          gh.row(i) += g.row(i) / d(i, 0);
          gdeg(i, 0) -= h.row(i).dot(g.row(i)) / (d(i, 0) * d(i, 0));
        }
      }
      for (std::size_t m = 0; m < mi.src.size(); ++m) {
        const NodeId s = mi.src[m];
        const NodeId dd = mi.dst[m];
        const auto e = static_cast<Eigen::Index>(mi.edge[m]);
        double base = 1.0;
        if (n.norm == Normalization::structural_mean) {
          base = 1.0 / mi.structural_degree[dd];
        } else if (gcn) {
          base = 1.0 / std::sqrt(n.saved(dd, 0) * n.saved(s, 0));
        }
        const double coef = w(e, 0) * base;
        gh.row(s) += coef * g.row(dd);
        const double p = h.row(s).dot(g.row(dd));
        gw(e, 0) += base * p;
        if (gcn) {
          gdeg(dd, 0) -= 0.5 * coef * p / n.saved(dd, 0);
          gdeg(s, 0) -= 0.5 * coef * p / n.saved(s, 0);
        }
      }
      if (gcn) {
        for (std::size_t m = 0; m < mi.src.size(); ++m) {
          gw(static_cast<Eigen::Index>(mi.edge[m]), 0) += gdeg(mi.dst[m], 0);
        }
      }
      send(0, gh);
      send(1, gw);
      break;
    }
    case OpKind::mean_rows: {
      const Eigen::Index rows = in(0).value.rows();
      send(0, g.replicate(rows, 1) / static_cast<double>(rows));
      break;
    }
    case OpKind::sum_all:
      send(0, Matrix::Constant(in(0).value.rows(), in(0).value.cols(), g(0, 0)));
      break;
    case OpKind::mean_all: {
      const Matrix& a = in(0).value;
      send(0, Matrix::Constant(a.rows(), a.cols(), g(0, 0) / static_cast<double>(a.size())));
      break;
    }
    case OpKind::rowwise_l2_normalize: {
      const Matrix& norms = n.saved;
      Matrix ga = Matrix::Zero(g.rows(), g.cols());
      for (Eigen::Index r = 0; r < g.rows(); ++r) {
        if (norms(r, 0) <= 0.0) continue;
        const double proj = n.value.row(r).dot(g.row(r));
        ga.row(r) = (g.row(r) - proj * n.value.row(r)) / norms(r, 0);
      }
      send(0, ga);
      break;
    }
    case OpKind::dot_rows: {
      const Matrix& a = in(0).value;
      const Matrix& b = in(1).value;
      send(0, b.array().colwise() * g.col(0).array());
      send(1, a.array().colwise() * g.col(0).array());
      break;
    }
    case OpKind::bce_with_logits: {
      const Matrix& x = in(0).value;
      const double k = g(0, 0) / static_cast<double>(x.size());
      Matrix gx = x.binaryExpr(n.saved, [k](double v, double y) {
        const double s = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
        return k * (s - y);
      });
      send(0, gx);
      break;
    }
    case OpKind::binary_cross_entropy: {
      const Matrix& p = in(0).value;
      const double k = g(0, 0) / static_cast<double>(p.size());
      Matrix gp = p.binaryExpr(n.saved, [k](double q, double y) {
        if (q <= kProbClamp || q >= 1.0 - kProbClamp) return 0.0;
        return k * (q - y) / (q * (1.0 - q));
      });
      send(0, gp);
      break;
    }
  }
}

void Tape::relevance_node(int id, std::vector<Matrix>& rel, double eps) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  const Matrix& r = rel[static_cast<std::size_t>(id)];
  auto in = [&](std::size_t k) -> const Node& { return nodes_[static_cast<std::size_t>(n.inputs[k])]; };
  auto send = [&](std::size_t k, const Matrix& v) {
    if (in(k).requires_grad) accumulate(rel, n.inputs[k], v);
  };
  // Share of a product term credited to each operand when both depend on
  // the explained inputs.
  auto pair_factor = [&]() {
    return (in(0).requires_grad && in(1).requires_grad) ? 0.5 : 1.0;
  };

  switch (n.op) {
    case OpKind::leaf:
      break;
    case OpKind::matmul: {
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      const Matrix& a = in(0).value;
      const Matrix& b = in(1).value;
      const double f = pair_factor();
      send(0, f * a.cwiseProduct(q * b.transpose()));
      send(1, f * b.cwiseProduct(a.transpose() * q));
      break;
    }
    case OpKind::add:
    case OpKind::sub: {
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      const Matrix& a = in(0).value;
      Matrix b = expand(in(1).value, a.rows(), a.cols(), n.broadcast);
      if (n.op == OpKind::sub) b = -b;
      send(0, a.cwiseProduct(q));
      send(1, reduce_to(b.cwiseProduct(q), n.broadcast));
      break;
    }
    case OpKind::mul: {
      const double f = pair_factor();
      send(0, f * r);
      send(1, reduce_to(f * r, n.broadcast));
      break;
    }
    case OpKind::scale:
    case OpKind::add_scalar: {
      const Matrix& a = in(0).value;
      const Matrix term = n.op == OpKind::scale ? Matrix(a * n.scalar) : a;
      send(0, term.cwiseProduct(r.cwiseQuotient(stabilize(n.value, eps))));
      break;
    }
    case OpKind::relu:
    case OpKind::sigmoid:
    case OpKind::exp:
    case OpKind::log:
      send(0, r);
      break;
    case OpKind::concat_rows: {
      Eigen::Index row = 0;
      for (std::size_t k = 0; k < n.inputs.size(); ++k) {
        const Eigen::Index rows = in(k).value.rows();
        send(k, r.middleRows(row, rows));
        row += rows;
      }
      break;
    }
    case OpKind::gather_rows: {
      Matrix ra = Matrix::Zero(in(0).value.rows(), in(0).value.cols());
      for (std::size_t k = 0; k < n.index.size(); ++k) {
        ra.row(static_cast<Eigen::Index>(n.index[k])) += r.row(static_cast<Eigen::Index>(k));
      }
      send(0, ra);
      break;
    }
    case OpKind::scatter_rows: {
      Matrix rs(in(0).value.rows(), in(0).value.cols());
      for (std::size_t k = 0; k < n.index.size(); ++k) {
        rs.row(static_cast<Eigen::Index>(k)) = r.row(static_cast<Eigen::Index>(n.index[k]));
      }
      send(0, rs);
      break;
    }
    case OpKind::masked_neighbor_sum: {
      // Each message term coef * h_src is a linear contribution to out_dst.
      // Its relevance continues to h_src and is also tallied on the edge
      // carrying the message.
      const MessageIndex& mi = *n.messages;
      const Matrix& h = in(0).value;
      const Matrix& w = in(1).value;
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      Matrix rh = Matrix::Zero(h.rows(), h.cols());
      Matrix rw = Matrix::Zero(w.rows(), 1);
      const bool gcn = n.norm == Normalization::symmetric_self_loops;
      if (gcn) {
        for (Eigen::Index i = 0; i < h.rows(); ++i) {
          rh.row(i) += (h.row(i) / n.saved(i, 0)).cwiseProduct(q.row(i));
        }
      }
      for (std::size_t m = 0; m < mi.src.size(); ++m) {
        const NodeId s = mi.src[m];
        const NodeId d = mi.dst[m];
        const auto e = static_cast<Eigen::Index>(mi.edge[m]);
        double coef = w(e, 0);
        if (n.norm == Normalization::structural_mean) {
          coef /= mi.structural_degree[d];
        } else if (gcn) {
          coef /= std::sqrt(n.saved(d, 0) * n.saved(s, 0));
        }
        const Eigen::RowVectorXd share = (coef * h.row(s)).cwiseProduct(q.row(d));
        rh.row(s) += share;
        rw(e, 0) += share.sum();
      }
      send(0, rh);
      send(1, rw);
      break;
    }
    case OpKind::mean_rows: {
      const Matrix& a = in(0).value;
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      send(0, (a / static_cast<double>(a.rows())).cwiseProduct(q.replicate(a.rows(), 1)));
      break;
    }
    case OpKind::sum_all:
    case OpKind::mean_all: {
      const Matrix& a = in(0).value;
      const double denom = n.op == OpKind::mean_all ? static_cast<double>(a.size()) : 1.0;
      const double q = r(0, 0) / stabilize(n.value, eps)(0, 0);
      send(0, a * (q / denom));
      break;
    }
    case OpKind::rowwise_l2_normalize: {
      // Linearize out = J a with z_kc = a_k * d out_c / d a_k and apply the
      // epsilon rule per output coordinate.
      const Matrix& a = in(0).value;
      const Matrix& norms = n.saved;
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      Matrix ra = Matrix::Zero(a.rows(), a.cols());
      for (Eigen::Index row = 0; row < a.rows(); ++row) {
        if (norms(row, 0) <= 0.0) continue;
        const double proj = n.value.row(row).dot(q.row(row));
        ra.row(row) = a.row(row).cwiseProduct(q.row(row) - proj * n.value.row(row)) / norms(row, 0);
      }
      send(0, ra);
      break;
    }
    case OpKind::dot_rows: {
      // Bilinear decoder: each operand is treated as the weights of a linear
      // layer applied to the other; the two assignments are averaged.
      const Matrix& a = in(0).value;
      const Matrix& b = in(1).value;
      const Matrix q = r.cwiseQuotient(stabilize(n.value, eps));
      const Matrix share = a.cwiseProduct(b).array().colwise() * q.col(0).array();
      const double f = pair_factor();
      send(0, f * share);
      send(1, f * share);
      break;
    }
    case OpKind::bce_with_logits:
    case OpKind::binary_cross_entropy:
      throw InvalidArgument("relevance is undefined through a loss node");
  }
}

// ---------------------------------------------------------------------------

GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Matrix& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("grad_check: step must be > 0");
  auto sign_pattern = [](const std::vector<double>& v) {
    std::vector<int> s(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) s[k] = (v[k] > 0.0) - (v[k] < 0.0);
    return s;
  };

  Tape tape;
  Var xv = tape.variable(x);
  Var y = f(tape, xv);
  tape.backward(y);
  const Matrix g = tape.grad(xv);
  const auto base = sign_pattern(tape.relu_inputs());

  GradCheckResult res;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    auto probe = [&](double delta, std::vector<int>& pattern) {
      Matrix xp = x;
      xp.data()[k] += delta;
      Tape t;
      const double v = f(t, t.variable(xp)).scalar();
      pattern = sign_pattern(t.relu_inputs());
      return v;
    };
    std::vector<int> plus_pattern;
    std::vector<int> minus_pattern;
    const double fp = probe(h, plus_pattern);
    const double fm = probe(-h, minus_pattern);
    // A relu input that changes sign (or leaves 0) between the probes means
    // the finite difference straddles a kink.
    if (plus_pattern != base || minus_pattern != base) {
      ++res.excluded;
      continue;
    }
    const double fd = (fp - fm) / (2.0 * h);
    const double an = g.data()[k];
    const double denom = std::max({std::abs(an), std::abs(fd), 1e-7});
    res.max_relative_error = std::max(res.max_relative_error, std::abs(an - fd) / denom);
    ++res.compared;
  }
  return res;
}

}  // namespace lpx::ad
