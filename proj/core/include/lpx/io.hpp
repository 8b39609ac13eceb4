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

// File formats.
//
//   graph file     text; "nodes <N>" header, then one "u v" pair per line,
//                  '#' starts a comment
//   feature file   text; one node per row, values separated by one space,
//                  '#' lines are comments
//   everything     JSON, floats written with 17 significant digits so that
//   else           every value re-loads bit-exactly
//
// All readers throw IoError with the offending path (and line, where there
// is one).

#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lpx/evaluation.hpp"
#include "lpx/explainers.hpp"
#include "lpx/graph.hpp"
#include "lpx/models.hpp"
#include "lpx/synthgen.hpp"

namespace lpx {

using Json = nlohmann::json;
namespace fs = std::filesystem;

struct EdgeList {
  std::size_t num_nodes = 0;
  std::vector<Edge> edges;
};

void write_graph_file(const fs::path& path, std::size_t num_nodes, std::span<const Edge> edges);
EdgeList read_graph_file(const fs::path& path);
void write_feature_file(const fs::path& path, const Matrix& features);
/// Throws IoError when the row count differs from `expected_rows`.
Matrix read_feature_file(const fs::path& path, std::size_t expected_rows);
Graph load_graph(const fs::path& graph_path, const fs::path& feature_path);

/// Deterministic pretty-printed JSON with %.17g floats.
std::string dump_json(const Json& j);
void write_json_file(const fs::path& path, const Json& j);
Json read_json_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& text);

Json edges_to_json(std::span<const Edge> edges);
std::vector<Edge> edges_from_json(const Json& j);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

std::string_view to_string(EncoderKind k);
std::string_view to_string(DecoderKind k);
std::string_view to_string(Optimizer o);
std::string_view to_string(GeneratorKind k);

Json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const Json& j);
Json to_json(const TrainOptions& o);
TrainOptions train_options_from_json(const Json& j);

/// Split edges; the train graph is rebuilt from `features` on load.
Json to_json(const EdgeSplit& s);
EdgeSplit split_from_json(const Json& j, const Matrix& features);

/// Generator facts (kind, block labels, noise edges). The graph itself lives
/// in the graph and feature files.
Json labels_to_json(const LabeledGraph& lg);
LabeledGraph labeled_graph_from_json(const Json& j, Graph graph);

Json to_json(const GroundTruth& gt);
GroundTruth ground_truth_from_json(const Json& j);

Json to_json(const Attribution& a);
Attribution attribution_from_json(const Json& j);

Json to_json(const Curve& c);
Curve curve_from_json(const Json& j);
Json curves_to_json(std::span<const CurveSet> curves);
std::vector<CurveSet> curves_from_json(const Json& j);
/// Rows, aggregates and skipped targets; curves only when `with_curves`.
Json to_json(const ResultTable& t, bool with_curves = true);
ResultTable result_table_from_json(const Json& j);

/// Model config, training metadata and named parameter arrays.
Json checkpoint_to_json(const LinkPredictor& model);
LinkPredictor checkpoint_from_json(const Json& j);

}  // namespace lpx
