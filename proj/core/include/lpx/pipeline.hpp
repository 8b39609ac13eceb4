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

// The generate -> train -> explain -> evaluate -> report pipeline.
//
// Every stage reads its inputs from and writes its outputs to one directory:
//
//   generate  graph.txt features.txt dataset.json split.json ground_truth.json
//   train     checkpoint.json metrics.json
//   explain   attributions.json
//   evaluate  results.json (+ curves.json for insdel)
//   report    summary.txt plots/*.svg

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lpx/evaluation.hpp"
#include "lpx/io.hpp"
#include "lpx/models.hpp"
#include "lpx/synthgen.hpp"

namespace lpx {

struct DatasetConfig {
  /// "sbm", "ws" or "files".
  std::string generator = "sbm";
  SbmConfig sbm{.block_sizes = {50, 50}};
  WsConfig ws;
  std::string graph_file;
  std::string feature_file;
  double test_fraction = 0.1;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelConfig model;
  TrainOptions training;
  /// Explainers, their options, the protocol and its settings.
  EvaluationConfig evaluation;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
};

/// Fills a RunConfig from JSON; absent fields keep their defaults. Throws
/// InvalidArgument naming the dotted path of the first malformed or unknown
/// field. The global seed is propagated to every stage.
RunConfig parse_run_config(const Json& j);
/// Every resolved field except the output location.
Json to_json(const RunConfig& cfg);

/// Wraps a payload with the tool version and the resolved config.
Json with_provenance(const RunConfig& cfg, Json payload);

void run_generate(const RunConfig& cfg);
void run_train(const RunConfig& cfg);
void run_explain(const RunConfig& cfg);
void run_evaluate(const RunConfig& cfg);
void run_report(const RunConfig& cfg);

/// Dataset artifacts as written by run_generate.
struct Dataset {
  Graph graph;
  std::optional<LabeledGraph> labels;
  EdgeSplit split;
};
Dataset load_dataset(const fs::path& dir);

struct Series {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
};
/// Standalone SVG line plot on [0,1] x [0,1].
std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<Series>& series,
                          const std::string& comment);
/// Standalone SVG strip plot (one column of points per group, median bar).
std::string svg_strip_plot(const std::string& title, const std::string& ylabel, double ymin,
                           double ymax, const std::vector<Series>& groups,
                           const std::string& comment);

/// Table-shaped plain-text summary of the aggregates.
std::string summary_text(const ResultTable& table);

}  // namespace lpx
