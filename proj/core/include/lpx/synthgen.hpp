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

#include <cstdint>
#include <optional>
#include <vector>

#include "lpx/graph.hpp"

namespace lpx {

struct SbmConfig {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.3;
  double p_out = 0.02;
  std::uint64_t seed = 0;
};

struct WsConfig {
  std::size_t n = 100;
  std::size_t k = 4;
  double beta = 0.1;
  std::uint64_t seed = 0;
};

enum class GeneratorKind { sbm, watts_strogatz };

/// A synthetic graph together with the generator facts needed to build
/// ground-truth explanations.
struct LabeledGraph {
  GeneratorKind kind = GeneratorKind::sbm;
  Graph graph;
  /// Block id per node (SBM only).
  std::optional<std::vector<int>> node_labels;
  /// Edges produced by the generator's noise process: cross-block edges for
  /// SBM, rewired edges for WS. Sorted, canonical, a subset of graph edges.
  std::vector<Edge> random_edges;

  bool is_random_edge(const Edge& e) const;
};

/// Binary importance masks for one target edge, aligned with the explanation
/// scope (edges of the `hops`-hop induced subgraph around the target).
struct GroundTruth {
  Edge target;
  int hops = 0;
  std::vector<Edge> scope_edges;
  std::vector<std::uint8_t> edge_mask;
  /// One entry per feature column.
  std::vector<std::uint8_t> feature_mask;

  /// False when every scope edge is marked important, i.e. specificity is
  /// undefined for this target.
  bool has_negative_edges() const;
  bool has_positive_edges() const;
};

LabeledGraph generate_sbm(const SbmConfig& cfg);
LabeledGraph generate_ws(const WsConfig& cfg);

/// SBM ground truth: scope edges whose endpoints both lie in the target's
/// block are important. `g` is the graph the model sees (usually the train
/// graph of a split); labels come from `lg`.
GroundTruth ground_truth_sbm(const LabeledGraph& lg, const Graph& g, Edge target, int hops);
GroundTruth ground_truth_sbm(const LabeledGraph& lg, Edge target, int hops);

/// WS ground truth: the edges (i,w) and (j,w) for every common neighbor w of
/// the target (i,j) in `g` are important (triangle closure).
GroundTruth ground_truth_ws(const Graph& g, Edge target, int hops);

}  // namespace lpx
