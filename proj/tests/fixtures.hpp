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


// Shared fixtures for the unit tests.

#pragma once

#include <vector>

#include "lpx/evaluation.hpp"
#include "lpx/explainers.hpp"
#include "lpx/graph.hpp"
#include "lpx/models.hpp"
#include "lpx/synthgen.hpp"

namespace lpx::testing {

// Node names of the five-node white-box example.
inline constexpr NodeId kA = 0;
inline constexpr NodeId kB = 1;
inline constexpr NodeId kX = 2;
inline constexpr NodeId kY = 3;
inline constexpr NodeId kZ = 4;

inline Matrix toy_features() {
  Matrix x(5, 2);
  x << 0.5, 0.5,  // a
      1.0, 0.0,   // b
      1.0, 0.0,   // x
      0.0, 1.0,   // y
      0.5, 0.5;   // z
  return x;
}

inline Graph toy_graph() {
  const Edge edges[] = {{kA, kX}, {kA, kY}, {kA, kZ}};
  return Graph::build(5, edges, toy_features());
}

inline Graph path_graph(int n, Matrix features) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph::build(static_cast<std::size_t>(n), edges, std::move(features));
}

inline Graph identity_graph(std::size_t n, const std::vector<Edge>& edges) {
  return Graph::build(n, edges, Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

inline Graph random_graph(std::size_t n, double p, std::uint64_t seed, int features = 3) {
  Rng rng(seed);
  std::vector<Edge> edges;
  for (NodeId i = 0; static_cast<std::size_t>(i) < n; ++i) {
    for (NodeId j = i + 1; static_cast<std::size_t>(j) < n; ++j) {
      if (uniform01(rng) < p) edges.push_back({i, j});
    }
  }
  Matrix x(static_cast<Eigen::Index>(n), features);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform01(rng);
  return Graph::build(n, edges, std::move(x));
}

inline SbmConfig desk_sbm(std::uint64_t seed) {
  return SbmConfig{.block_sizes = {50, 50}, .p_in = 0.3, .p_out = 0.02, .seed = seed};
}

inline ModelConfig small_config(EncoderKind encoder, DecoderKind decoder) {
  ModelConfig c;
  c.encoder = encoder;
  c.decoder = decoder;
  c.layers = 2;
  c.hidden_dim = 8;
  c.embed_dim = 4;
  return c;
}

}  // namespace lpx::testing
