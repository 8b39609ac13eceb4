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

// Validation of attributions: confusion metrics against ground-truth masks,
// and insertion/deletion curves scored against a random-order baseline.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpx/explainers.hpp"
#include "lpx/synthgen.hpp"

namespace lpx {

enum class CurveKind { insertion, deletion };
enum class Subject { edges, features };
enum class Binarization { fixed, roc_optimal };
enum class Protocol { ground_truth, insdel };

std::string_view to_string(CurveKind k);
std::string_view to_string(Subject s);
std::string_view to_string(Binarization b);
std::string_view to_string(Protocol p);
std::optional<CurveKind> parse_curve_kind(std::string_view s);
std::optional<Subject> parse_subject(std::string_view s);
std::optional<Binarization> parse_binarization(std::string_view s);
std::optional<Protocol> parse_protocol(std::string_view s);

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Rates with a zero denominator are left empty rather than reported as 0.
struct GtMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> recall;

  friend bool operator==(const GtMetrics&, const GtMetrics&) = default;
};

/// Binary predictions from scores. `fixed` thresholds signed scores at
/// score > 0 and mask scores at score > 0.5. `roc_optimal` picks, among the
/// observed scores, the threshold t (predict score >= t) maximizing
/// TPR - FPR against `truth`; it throws InvalidArgument when `truth` has a
/// single class.
std::vector<std::uint8_t> binarize(std::span<const double> scores, bool is_signed,
                                   std::span<const std::uint8_t> truth, Binarization method);

struct BinaryMasks {
  std::vector<std::uint8_t> edges;
  std::vector<std::uint8_t> features;
};
/// Throws InvalidArgument when attribution and truth scopes differ.
BinaryMasks binarize(const Attribution& attr, const GroundTruth& truth, Binarization method);

ConfusionMatrix confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth);
GtMetrics gt_metrics(const ConfusionMatrix& cm);

struct Curve {
  std::vector<double> xs;
  std::vector<double> ys;
  CurveKind kind = CurveKind::insertion;
  Subject subject = Subject::edges;

  friend bool operator==(const Curve&, const Curve&) = default;
};

/// Element indices by decreasing score; ties keep ascending index.
std::vector<std::size_t> rank_by_score(std::span<const double> scores);
/// 1 for up to 200 elements, otherwise batches of ceil(5%).
std::size_t default_step_size(std::size_t num_elements);
/// Number of perturbable elements of `subject` in the context.
std::size_t subject_size(const ExplanationContext& ctx, Subject subject);

/// Model output for the target while elements are removed (deletion) from
/// the full input or added (insertion) to an input whose subject is zeroed,
/// `step_size` elements at a time in `order`. Edges are removed by setting
/// their weight to 0; feature columns by zeroing them on scope nodes.
Curve perturbation_curve(const ExplanationContext& ctx, std::span<const std::size_t> order,
                         CurveKind kind, Subject subject, std::size_t step_size);

/// Pointwise mean of `realizations` curves over uniformly shuffled orders.
Curve random_baseline(const ExplanationContext& ctx, CurveKind kind, Subject subject,
                      int realizations, std::uint64_t seed, std::size_t step_size);

struct AreaScore {
  double a_plus = 0.0;
  double a_minus = 0.0;
  double u = 0.0;
  double l = 0.0;
  double score = 0.0;
  CurveKind mode = CurveKind::insertion;

  friend bool operator==(const AreaScore&, const AreaScore&) = default;
};

/// Trapezoidal areas between an explainer curve and the baseline curve.
/// Insertion score = A+/U - A-/L, deletion score = A-/L - A+/U; 0/0 is 0.
AreaScore area_score(const Curve& explainer, const Curve& baseline, CurveKind mode);

double median(std::vector<double> values);
/// Population standard deviation.
double stddev(std::span<const double> values);

struct EvaluationConfig {
  Protocol protocol = Protocol::insdel;
  std::vector<ExplainerKind> explainers = {ExplainerKind::gnnexplainer,
                                           ExplainerKind::integrated_gradients,
                                           ExplainerKind::deconvolution, ExplainerKind::lrp};
  ExplainerOptions explainer_options;
  Binarization binarization = Binarization::fixed;
  std::vector<Subject> subjects = {Subject::edges, Subject::features};
  std::vector<CurveKind> kinds = {CurveKind::insertion, CurveKind::deletion};
  int realizations = 50;
  /// Elements per curve step; 0 selects default_step_size.
  std::size_t step_size = 0;
  /// Cap on the number of explained targets; 0 means all.
  std::size_t max_targets = 0;
  std::uint64_t seed = 0;
};

struct AreaEntry {
  Subject subject = Subject::edges;
  CurveKind kind = CurveKind::insertion;
  AreaScore area;

  friend bool operator==(const AreaEntry&, const AreaEntry&) = default;
};

/// One row per (explainer, target).
struct ResultRow {
  Edge target;
  ExplainerKind explainer = ExplainerKind::random;
  // ground_truth protocol
  std::optional<ConfusionMatrix> edge_confusion;
  std::optional<ConfusionMatrix> feature_confusion;
  GtMetrics edge_metrics;
  GtMetrics feature_metrics;
  // insdel protocol
  std::vector<AreaEntry> areas;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

/// Curves of every explainer plus the random baseline for one target.
struct CurveSet {
  Edge target;
  Subject subject = Subject::edges;
  CurveKind kind = CurveKind::insertion;
  Curve baseline;
  std::vector<std::pair<ExplainerKind, Curve>> explainers;

  friend bool operator==(const CurveSet&, const CurveSet&) = default;
};

struct AggregateRow {
  ExplainerKind explainer = ExplainerKind::random;
  /// e.g. "edge_sensitivity", "feature_insertion".
  std::string metric;
  double median = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;

  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct ResultTable {
  Protocol protocol = Protocol::insdel;
  std::vector<ResultRow> rows;
  std::vector<CurveSet> curves;
  std::vector<AggregateRow> aggregates;
  /// Targets for which no ground truth could be built.
  std::vector<Edge> skipped_targets;

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

/// Test positives worth explaining: generator noise edges (cross-block or
/// rewired) are dropped when `lg` is given. Capped at `max_targets` if > 0.
std::vector<Edge> explain_targets(const EdgeSplit& split, const LabeledGraph* lg,
                                  std::size_t max_targets = 0);

/// Seed of the stochastic explainers for one target.
std::uint64_t target_seed(std::uint64_t seed, Edge target, ExplainerKind kind);

/// Runs every configured explainer on every target of `g`.
std::vector<Attribution> explain_all(const LinkPredictor& model, const Graph& g,
                                     std::span<const Edge> targets, const EvaluationConfig& cfg);

/// Ground truth of a target for the generator behind `lg`, on graph `g`.
GroundTruth ground_truth_for(const LabeledGraph& lg, const Graph& g, Edge target, int hops);

/// Scores precomputed attributions. Ground truth requires `lg`.
ResultTable evaluate_attributions(const LinkPredictor& model, const Graph& g,
                                  std::span<const Attribution> attributions, const LabeledGraph* lg,
                                  const EvaluationConfig& cfg);

/// explain_targets + explain_all + evaluate_attributions on the train graph.
ResultTable evaluate_dataset(const LinkPredictor& model, const EdgeSplit& split,
                             const LabeledGraph* lg, const EvaluationConfig& cfg);

/// Median and standard deviation per (explainer, metric), skipping
/// undefined values. Explainers keep their order of first appearance.
std::vector<AggregateRow> aggregate(std::span<const ResultRow> rows);

/// Looks up an aggregate; nullopt if absent.
std::optional<AggregateRow> find_aggregate(const ResultTable& table, ExplainerKind explainer,
                                           std::string_view metric);

}  // namespace lpx
