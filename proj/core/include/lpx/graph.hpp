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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lpx/rng.hpp"

namespace lpx {

using NodeId = std::int32_t;

/// Dense row-major matrix used for features, parameters and activations.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Shape-aware exact equality (Eigen's operator== requires equal shapes).
inline bool matrices_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

/// Unordered node pair. Canonical form keeps u < v.
struct Edge {
  NodeId u = 0;
  NodeId v = 0;

  static Edge canonical(NodeId a, NodeId b) { return a < b ? Edge{a, b} : Edge{b, a}; }

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph with a dense node-feature matrix.
///
/// Edges are stored in canonical form, sorted lexicographically; edge indices
/// used throughout the library refer to positions in `edges()`. Neighbor
/// lists are sorted. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  /// Validates, deduplicates and symmetrizes `edges`.
  /// Throws InvalidArgument on out-of-range ids, self-loops, or a feature
  /// matrix whose row count differs from `num_nodes`.
  static Graph build(std::size_t num_nodes, std::span<const Edge> edges, Matrix features);

  std::size_t num_nodes() const { return neighbors_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t num_features() const { return static_cast<std::size_t>(features_.cols()); }

  const std::vector<Edge>& edges() const { return edges_; }
  std::span<const NodeId> neighbors(NodeId i) const;
  std::size_t degree(NodeId i) const { return neighbors(i).size(); }
  const Matrix& features() const { return features_; }

  bool has_edge(NodeId a, NodeId b) const;
  /// Position of the edge in `edges()`, if present.
  std::optional<std::size_t> edge_index(NodeId a, NodeId b) const;
  bool contains_node(NodeId i) const { return i >= 0 && static_cast<std::size_t>(i) < num_nodes(); }

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.edges_ == b.edges_ && a.neighbors_.size() == b.neighbors_.size() &&
           matrices_equal(a.features_, b.features_);
  }

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> neighbors_;
  Matrix features_;
};

/// Train/test partition of a graph's edges with sampled negatives.
struct EdgeSplit {
  Graph train_graph;
  std::vector<Edge> test_pos;
  std::vector<Edge> test_neg;
  std::uint64_t seed = 0;
};

/// Moves round(test_fraction * |E|) uniformly chosen edges to `test_pos` and
/// samples the same number of distinct non-edges into `test_neg`.
/// Deterministic for a fixed seed.
EdgeSplit split_edges(const Graph& g, double test_fraction, std::uint64_t seed);

/// Uniformly samples `count` distinct non-edges of `g` that are not in
/// `exclude`. Throws InvalidArgument when too few non-edges exist.
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng,
                                   std::span<const Edge> exclude = {});

/// Induced subgraph on the nodes reachable within `hops` steps of a seed set.
struct Subgraph {
  Graph graph;
  /// Local node id -> original node id (sorted ascending).
  std::vector<NodeId> to_original;
  /// Hop distance of each local node from the seed set.
  std::vector<int> distance;

  std::optional<NodeId> to_local(NodeId original) const;
};

Subgraph k_hop_subgraph(const Graph& g, std::span<const NodeId> seeds, int hops);

}  // namespace lpx
