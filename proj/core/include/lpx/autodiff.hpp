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

// Minimal dense reverse-mode automatic differentiation.
//
// A Tape records every primitive applied to its Vars. Three reverse passes
// are available over the same recording:
//   * standard backward: exact gradients;
//   * deconv backward: identical, except that relu passes relu(grad) instead
//     of gating the incoming gradient by the forward sign;
//   * relevance (LRP-epsilon): redistributes the output value to the inputs
//     with R_i = sum_j z_ij / (z_j + eps * sign(z_j)) * R_j through every
//     linear term, passing relevance unchanged through elementwise
//     nonlinearities.
//
// Only dense matrices are supported. relu'(0) = 0.

#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "lpx/graph.hpp"

namespace lpx::ad {

/// How masked_neighbor_sum scales the weighted sum of incoming messages.
enum class Normalization {
  /// out_i = sum_j w_ij h_j
  none,
  /// out_i = (1 / |N(i)|) sum_j w_ij h_j, with |N(i)| the unweighted degree.
  structural_mean,
  /// GCN propagation with self-loops and degrees taken from the weighted
  /// adjacency: d_i = 1 + sum_j w_ij,
  /// out_i = h_i / d_i + sum_j w_ij h_j / sqrt(d_i d_j).
  symmetric_self_loops,
};

/// Directed message list of an undirected graph: every edge e = (u, v)
/// carries the messages u -> v and v -> u, both scaled by w_e.
struct MessageIndex {
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  std::vector<NodeId> src;
  std::vector<NodeId> dst;
  std::vector<std::size_t> edge;
  std::vector<double> structural_degree;

  static std::shared_ptr<const MessageIndex> from_graph(const Graph& g);
};

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  /// Value of a 1x1 Var.
  double scalar() const;
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

enum class BackwardMode { standard, deconv };

enum class OpKind {
  leaf,
  matmul,
  add,
  sub,
  mul,
  scale,
  add_scalar,
  relu,
  sigmoid,
  exp,
  log,
  concat_rows,
  gather_rows,
  scatter_rows,
  masked_neighbor_sum,
  mean_rows,
  sum_all,
  mean_all,
  rowwise_l2_normalize,
  dot_rows,
  bce_with_logits,
  binary_cross_entropy,
};

std::string_view op_name(OpKind kind);

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives a gradient (parameters at explanation time,
  /// fixed inputs).
  Var constant(Matrix value);
  /// Leaf whose gradient / relevance is collected.
  Var variable(Matrix value);

  /// Reverse pass from a 1x1 output. Throws InvalidArgument otherwise.
  void backward(Var output, BackwardMode mode = BackwardMode::standard);
  /// Gradient of the last backward() output w.r.t. `v` (zeros if unreached).
  Matrix grad(Var v) const;

  /// LRP-epsilon pass from a 1x1 output whose initial relevance is its value.
  /// Throws InvalidArgument when epsilon <= 0.
  void relevance(Var output, double epsilon);
  Matrix relevance_of(Var v) const;

  std::size_t size() const { return nodes_.size(); }
  /// Forward inputs of every relu, concatenated in recording order.
  std::vector<double> relu_inputs() const;

  /// One recorded primitive application. Used by the primitive
  /// implementations; not needed by callers.
  struct Node {
    OpKind op = OpKind::leaf;
    std::vector<int> inputs;
    Matrix value;
    bool requires_grad = false;
    double scalar = 0.0;
    /// Operand-b broadcast for add/sub/mul: 0 same shape, 1 row, 2 scalar.
    int broadcast = 0;
    std::vector<std::size_t> index;
    std::shared_ptr<const MessageIndex> messages;
    Normalization norm = Normalization::none;
    Matrix saved;
  };

  /// Appends a node, checking that its value is finite.
  Var push(Node node);
  const Node& node(Var v) const;

 private:
  friend class Var;

  void backprop_node(int id, std::vector<Matrix>& grads, BackwardMode mode) const;
  void relevance_node(int id, std::vector<Matrix>& rel, double eps) const;

  std::deque<Node> nodes_;
  std::vector<Matrix> grads_;
  std::vector<Matrix> relevance_;
};

// Forward primitives. Both operands must live on the same tape. Every op
// throws InvalidArgument on shape mismatch and NumericError on a non-finite
// result.

Var matmul(Var a, Var b);
/// Elementwise sum; `b` may also be 1 x cols (row broadcast) or 1 x 1.
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise product; `b` may also be 1 x cols (row broadcast) or 1 x 1.
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var add_scalar(Var a, double c);
Var relu(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);
Var concat_rows(std::span<const Var> parts);
Var gather_rows(Var a, std::span<const NodeId> rows);
/// Copy of `base` whose rows `rows[k]` are replaced by row k of `src`.
Var scatter_rows(Matrix base, Var src, std::span<const std::size_t> rows);
/// Value-only neighbor aggregation shared by masked_neighbor_sum and
/// tape-free inference. `degrees` receives the weighted degrees under
/// symmetric_self_loops.
Matrix neighbor_sum_values(const Matrix& h, const Matrix& w, const MessageIndex& messages,
                           Normalization norm, Matrix* degrees = nullptr);
/// Message passing: node features `h` (num_nodes x C), per-edge weights `w`
/// (num_edges x 1).
Var masked_neighbor_sum(Var h, Var w, std::shared_ptr<const MessageIndex> messages,
                        Normalization norm);
/// 1 x cols column means.
Var mean_rows(Var a);
Var sum_all(Var a);
Var mean_all(Var a);
/// Divides each row by its L2 norm; a zero row maps to a zero row.
Var rowwise_l2_normalize(Var a);
/// rows x 1 vector of row-wise inner products.
Var dot_rows(Var a, Var b);
/// Mean binary cross-entropy on logits (numerically stable form).
Var bce_with_logits(Var logits, const Matrix& targets);
/// Mean binary cross-entropy on probabilities clamped to [1e-7, 1 - 1e-7].
Var binary_cross_entropy(Var probs, const Matrix& targets);

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t compared = 0;
  /// Components skipped because a relu input changed sign (or sat exactly on
  /// the kink) between the probe points.
  std::size_t excluded = 0;
};

/// Compares the reverse-mode gradient of a scalar function against central
/// differences (f(x + h e_k) - f(x - h e_k)) / 2h, componentwise.
/// Relative error is |g - fd| / max(|g|, |fd|, 1e-7).
GradCheckResult grad_check(const std::function<Var(Tape&, Var)>& f, const Matrix& x, double h);

}  // namespace lpx::ad
