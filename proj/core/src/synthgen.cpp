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

#include "lpx/synthgen.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "lpx/error.hpp"

namespace lpx {

namespace {

Matrix identity_features(std::size_t n) {
  return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

std::vector<Edge> scope_edges_of(const Subgraph& sub) {
  std::vector<Edge> out;
  out.reserve(sub.graph.num_edges());
  for (const Edge& e : sub.graph.edges()) {
    out.push_back(Edge::canonical(sub.to_original[e.u], sub.to_original[e.v]));
  }
  return out;
}

}  // namespace

bool LabeledGraph::is_random_edge(const Edge& e) const {
  return std::binary_search(random_edges.begin(), random_edges.end(), Edge::canonical(e.u, e.v));
}

bool GroundTruth::has_negative_edges() const {
  return std::any_of(edge_mask.begin(), edge_mask.end(), [](auto m) { return m == 0; });
}

bool GroundTruth::has_positive_edges() const {
  return std::any_of(edge_mask.begin(), edge_mask.end(), [](auto m) { return m != 0; });
}

LabeledGraph generate_sbm(const SbmConfig& cfg) {
  if (cfg.block_sizes.empty()) throw InvalidArgument("sbm: block_sizes must be non-empty");
  for (std::size_t s : cfg.block_sizes) {
    if (s < 1) throw InvalidArgument("sbm: every block size must be >= 1");
  }
  if (!(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0)) {
    throw InvalidArgument("sbm: need 0 <= p_out < p_in <= 1");
  }

  const std::size_t n = std::accumulate(cfg.block_sizes.begin(), cfg.block_sizes.end(), std::size_t{0});
  std::vector<int> labels;
  labels.reserve(n);
  for (std::size_t b = 0; b < cfg.block_sizes.size(); ++b) {
    labels.insert(labels.end(), cfg.block_sizes[b], static_cast<int>(b));
  }

  Rng rng(derive_seed(cfg.seed, {2}));
  LabeledGraph lg;
  lg.kind = GeneratorKind::sbm;
  std::vector<Edge> edges;
  for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
    for (NodeId v = u + 1; static_cast<std::size_t>(v) < n; ++v) {
      const bool same = labels[u] == labels[v];
      const double p = same ? cfg.p_in : cfg.p_out;
      if (uniform01(rng) < p) {
        edges.push_back({u, v});
        if (!same) lg.random_edges.push_back({u, v});
      }
    }
  }
  lg.graph = Graph::build(n, edges, identity_features(n));
  lg.node_labels = std::move(labels);
  return lg;
}

LabeledGraph generate_ws(const WsConfig& cfg) {
  if (cfg.k % 2 != 0 || cfg.k >= cfg.n) throw InvalidArgument("ws: k must be even and < n");
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw InvalidArgument("ws: beta must lie in [0, 1]");

  const std::size_t n = cfg.n;
  std::set<Edge> current;
  for (std::size_t d = 1; d <= cfg.k / 2; ++d) {
    for (std::size_t u = 0; u < n; ++u) {
      current.insert(Edge::canonical(static_cast<NodeId>(u), static_cast<NodeId>((u + d) % n)));
    }
  }
  std::vector<std::set<NodeId>> adj(n);
  for (const Edge& e : current) {
    adj[e.u].insert(e.v);
    adj[e.v].insert(e.u);
  }

  Rng rng(derive_seed(cfg.seed, {3}));
  std::set<Edge> rewired;
  // Lattice edges are visited ring-distance first, as in the original model.
  for (std::size_t d = 1; d <= cfg.k / 2; ++d) {
    for (std::size_t uu = 0; uu < n; ++uu) {
      const auto u = static_cast<NodeId>(uu);
      const auto v = static_cast<NodeId>((uu + d) % n);
      const Edge e = Edge::canonical(u, v);
      if (!current.contains(e)) continue;
      if (uniform01(rng) >= cfg.beta) continue;
      if (adj[u].size() + 1 >= n) continue;  // u already adjacent to everyone
      NodeId w;
      do {
        w = static_cast<NodeId>(uniform_index(rng, n));
      } while (w == u || adj[u].contains(w));
      current.erase(e);
      rewired.erase(e);
      adj[u].erase(v);
      adj[v].erase(u);
      const Edge fresh = Edge::canonical(u, w);
      current.insert(fresh);
      rewired.insert(fresh);
      adj[u].insert(w);
      adj[w].insert(u);
    }
  }

  LabeledGraph lg;
  lg.kind = GeneratorKind::watts_strogatz;
  const std::vector<Edge> edges(current.begin(), current.end());
  lg.graph = Graph::build(n, edges, identity_features(n));
  lg.random_edges.assign(rewired.begin(), rewired.end());
  return lg;
}

GroundTruth ground_truth_sbm(const LabeledGraph& lg, const Graph& g, Edge target, int hops) {
  if (!lg.node_labels) throw InvalidArgument("ground_truth_sbm: graph has no block labels");
  const auto& labels = *lg.node_labels;
  if (!g.contains_node(target.u) || !g.contains_node(target.v) ||
      labels.size() != g.num_nodes()) {
    throw InvalidArgument("ground_truth_sbm: target or labels do not match the graph");
  }
  const int block = labels[target.u];
  if (labels[target.v] != block) {
    throw InvalidArgument("ground_truth_sbm: target (" + std::to_string(target.u) + ", " +
                          std::to_string(target.v) + ") spans two blocks");
  }

  GroundTruth gt;
  gt.target = Edge::canonical(target.u, target.v);
  gt.hops = hops;
  const NodeId seeds[] = {gt.target.u, gt.target.v};
  const Subgraph sub = k_hop_subgraph(g, seeds, hops);
  gt.scope_edges = scope_edges_of(sub);
  gt.edge_mask.reserve(gt.scope_edges.size());
  for (const Edge& e : gt.scope_edges) {
    gt.edge_mask.push_back(labels[e.u] == block && labels[e.v] == block ? 1 : 0);
  }
  // One-hot features: column f is node f's identity.
  gt.feature_mask.assign(g.num_features(), 0);
  for (NodeId orig : sub.to_original) {
    if (labels[orig] == block && static_cast<std::size_t>(orig) < gt.feature_mask.size()) {
      gt.feature_mask[orig] = 1;
    }
  }
  return gt;
}

GroundTruth ground_truth_sbm(const LabeledGraph& lg, Edge target, int hops) {
  return ground_truth_sbm(lg, lg.graph, target, hops);
}

GroundTruth ground_truth_ws(const Graph& g, Edge target, int hops) {
  if (!g.contains_node(target.u) || !g.contains_node(target.v)) {
    throw InvalidArgument("ground_truth_ws: unknown target node");
  }
  const auto nu = g.neighbors(target.u);
  const auto nv = g.neighbors(target.v);
  std::vector<NodeId> common;
  std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(common));
  if (common.empty()) {
    throw InvalidArgument("ground_truth_ws: target (" + std::to_string(target.u) + ", " +
                          std::to_string(target.v) + ") has no common neighbor");
  }

  GroundTruth gt;
  gt.target = Edge::canonical(target.u, target.v);
  gt.hops = hops;
  const NodeId seeds[] = {gt.target.u, gt.target.v};
  gt.scope_edges = scope_edges_of(k_hop_subgraph(g, seeds, hops));
  std::set<Edge> important;
  for (NodeId w : common) {
    important.insert(Edge::canonical(target.u, w));
    important.insert(Edge::canonical(target.v, w));
  }
  gt.edge_mask.reserve(gt.scope_edges.size());
  for (const Edge& e : gt.scope_edges) gt.edge_mask.push_back(important.contains(e) ? 1 : 0);

  gt.feature_mask.assign(g.num_features(), 0);
  auto mark_feature = [&](NodeId node) {
    if (static_cast<std::size_t>(node) < gt.feature_mask.size()) gt.feature_mask[node] = 1;
  };
  mark_feature(gt.target.u);
  mark_feature(gt.target.v);
  for (NodeId w : common) mark_feature(w);
  return gt;
}

}  // namespace lpx
