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

#include "lpx/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

#include "lpx/error.hpp"

namespace lpx {

Graph Graph::build(std::size_t num_nodes, std::span<const Edge> edges, Matrix features) {
  if (static_cast<std::size_t>(features.rows()) != num_nodes) {
    throw InvalidArgument("feature matrix has " + std::to_string(features.rows()) +
                          " rows, expected " + std::to_string(num_nodes));
  }
  Graph g;
  g.edges_.reserve(edges.size());
  for (const Edge& e : edges) {
    if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= num_nodes ||
        static_cast<std::size_t>(e.v) >= num_nodes) {
      throw InvalidArgument("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                            ") references a node outside [0, " + std::to_string(num_nodes) + ")");
    }
    if (e.u == e.v) throw InvalidArgument("self-loop on node " + std::to_string(e.u));
    g.edges_.push_back(Edge::canonical(e.u, e.v));
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  g.neighbors_.assign(num_nodes, {});
  for (const Edge& e : g.edges_) {
    g.neighbors_[e.u].push_back(e.v);
    g.neighbors_[e.v].push_back(e.u);
  }
  for (auto& nb : g.neighbors_) std::sort(nb.begin(), nb.end());
  g.features_ = std::move(features);
  return g;
}

std::span<const NodeId> Graph::neighbors(NodeId i) const {
  if (!contains_node(i)) throw InvalidArgument("unknown node id " + std::to_string(i));
  return neighbors_[static_cast<std::size_t>(i)];
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (!contains_node(a) || !contains_node(b)) return false;
  const auto& nb = neighbors_[static_cast<std::size_t>(a)];
  return std::binary_search(nb.begin(), nb.end(), b);
}

std::optional<std::size_t> Graph::edge_index(NodeId a, NodeId b) const {
  const Edge key = Edge::canonical(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, Rng& rng,
                                   std::span<const Edge> exclude) {
  const std::size_t n = g.num_nodes();
  const std::size_t pairs = n * (n - (n > 0 ? 1 : 0)) / 2;
  std::set<Edge> excluded(exclude.begin(), exclude.end());
  std::size_t excluded_non_edges = 0;
  for (const Edge& e : excluded) {
    if (!g.has_edge(e.u, e.v)) ++excluded_non_edges;
  }
  const std::size_t available = pairs - g.num_edges() - excluded_non_edges;
  if (available < count) {
    throw InvalidArgument("cannot sample " + std::to_string(count) + " negatives: only " +
                          std::to_string(available) + " non-edges available");
  }

  std::vector<Edge> out;
  out.reserve(count);
  std::set<Edge> taken;
  // Dense regime: rejection sampling would stall, enumerate instead.
  if (available < 4 * count) {
    std::vector<Edge> pool;
    pool.reserve(available);
    for (NodeId u = 0; static_cast<std::size_t>(u) < n; ++u) {
      for (NodeId v = u + 1; static_cast<std::size_t>(v) < n; ++v) {
        const Edge e{u, v};
        if (!g.has_edge(u, v) && !excluded.contains(e)) pool.push_back(e);
      }
    }
    shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    return pool;
  }
  while (out.size() < count) {
    const auto u = static_cast<NodeId>(uniform_index(rng, n));
    const auto v = static_cast<NodeId>(uniform_index(rng, n));
    if (u == v || g.has_edge(u, v)) continue;
    const Edge e = Edge::canonical(u, v);
    if (excluded.contains(e) || !taken.insert(e).second) continue;
    out.push_back(e);
  }
  return out;
}

EdgeSplit split_edges(const Graph& g, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw InvalidArgument("test_fraction must lie in (0, 1)");
  }
  if (g.num_edges() < 2) throw InvalidArgument("graph needs at least 2 edges to split");

  const std::size_t m = g.num_edges();
  auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(m)));
  n_test = std::clamp<std::size_t>(n_test, 1, m - 1);

  Rng rng(derive_seed(seed, {1}));
  std::vector<std::size_t> order(m);
  for (std::size_t k = 0; k < m; ++k) order[k] = k;
  shuffle(order.begin(), order.end(), rng);

  std::vector<bool> is_test(m, false);
  for (std::size_t k = 0; k < n_test; ++k) is_test[order[k]] = true;

  EdgeSplit split;
  split.seed = seed;
  std::vector<Edge> train;
  train.reserve(m - n_test);
  for (std::size_t k = 0; k < m; ++k) {
    if (is_test[k]) {
      split.test_pos.push_back(g.edges()[k]);
    } else {
      train.push_back(g.edges()[k]);
    }
  }
  split.test_neg = sample_non_edges(g, n_test, rng);
  std::sort(split.test_neg.begin(), split.test_neg.end());
  split.train_graph = Graph::build(g.num_nodes(), train, g.features());
  return split;
}

std::optional<NodeId> Subgraph::to_local(NodeId original) const {
  auto it = std::lower_bound(to_original.begin(), to_original.end(), original);
  if (it == to_original.end() || *it != original) return std::nullopt;
  return static_cast<NodeId>(it - to_original.begin());
}

Subgraph k_hop_subgraph(const Graph& g, std::span<const NodeId> seeds, int hops) {
  if (hops < 1) throw InvalidArgument("hop count must be >= 1");
  std::vector<int> dist(g.num_nodes(), -1);
  std::deque<NodeId> frontier;
  for (NodeId s : seeds) {
    if (!g.contains_node(s)) throw InvalidArgument("unknown seed node " + std::to_string(s));
    if (dist[s] < 0) {
      dist[s] = 0;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const NodeId cur = frontier.front();
    frontier.pop_front();
    if (dist[cur] == hops) continue;
    for (NodeId nb : g.neighbors(cur)) {
      if (dist[nb] < 0) {
        dist[nb] = dist[cur] + 1;
        frontier.push_back(nb);
      }
    }
  }

  Subgraph sub;
  for (NodeId i = 0; static_cast<std::size_t>(i) < g.num_nodes(); ++i) {
    if (dist[i] >= 0) {
      sub.to_original.push_back(i);
      sub.distance.push_back(dist[i]);
    }
  }
  std::vector<Edge> local_edges;
  for (const Edge& e : g.edges()) {
    if (dist[e.u] < 0 || dist[e.v] < 0) continue;
    local_edges.push_back({*sub.to_local(e.u), *sub.to_local(e.v)});
  }
  Matrix feats(static_cast<Eigen::Index>(sub.to_original.size()), g.features().cols());
  for (std::size_t k = 0; k < sub.to_original.size(); ++k) {
    feats.row(static_cast<Eigen::Index>(k)) = g.features().row(sub.to_original[k]);
  }
  sub.graph = Graph::build(sub.to_original.size(), local_edges, std::move(feats));
  return sub;
}

}  // namespace lpx
