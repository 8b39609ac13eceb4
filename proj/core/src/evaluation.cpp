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

#include "lpx/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "lpx/error.hpp"
#include "lpx/rng.hpp"

namespace lpx {

namespace {

std::string edge_str(Edge e) { return "(" + std::to_string(e.u) + ", " + std::to_string(e.v) + ")"; }

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

std::optional<double> rate(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Working copy of the perturbable inputs of one context.
class Perturbation {
 public:
  Perturbation(const ExplanationContext& ctx, Subject subject)
      : ctx_(ctx), subject_(subject), x_(ctx.features()), w_(ctx.num_scope_edges(), 1.0) {}

  void set(std::size_t element, bool present) {
    if (subject_ == Subject::edges) {
      w_[element] = present ? 1.0 : 0.0;
      return;
    }
    const auto f = static_cast<Eigen::Index>(element);
    for (NodeId i : ctx_.scope_nodes()) x_(i, f) = present ? ctx_.features()(i, f) : 0.0;
  }

  void set_all(bool present) {
    const std::size_t n = subject_size(ctx_, subject_);
    for (std::size_t k = 0; k < n; ++k) set(k, present);
  }

  double evaluate() const { return ctx_.evaluate(x_, w_); }

 private:
  const ExplanationContext& ctx_;
  Subject subject_;
  Matrix x_;
  std::vector<double> w_;
};

}  // namespace

std::string_view to_string(CurveKind k) { return k == CurveKind::insertion ? "insertion" : "deletion"; }
std::string_view to_string(Subject s) { return s == Subject::edges ? "edge" : "feature"; }
std::string_view to_string(Binarization b) { return b == Binarization::fixed ? "fixed" : "roc_optimal"; }
std::string_view to_string(Protocol p) { return p == Protocol::insdel ? "insdel" : "ground_truth"; }

std::optional<CurveKind> parse_curve_kind(std::string_view s) {
  if (s == "insertion") return CurveKind::insertion;
  if (s == "deletion") return CurveKind::deletion;
  return std::nullopt;
}
std::optional<Subject> parse_subject(std::string_view s) {
  if (s == "edge" || s == "edges") return Subject::edges;
  if (s == "feature" || s == "features") return Subject::features;
  return std::nullopt;
}
std::optional<Binarization> parse_binarization(std::string_view s) {
  if (s == "fixed") return Binarization::fixed;
  if (s == "roc_optimal") return Binarization::roc_optimal;
  return std::nullopt;
}
std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "insdel") return Protocol::insdel;
  if (s == "ground_truth") return Protocol::ground_truth;
  return std::nullopt;
}

std::vector<std::uint8_t> binarize(std::span<const double> scores, bool is_signed,
                                   std::span<const std::uint8_t> truth, Binarization method) {
  std::vector<std::uint8_t> out(scores.size(), 0);
  if (method == Binarization::fixed) {
    const double t = is_signed ? 0.0 : 0.5;
    for (std::size_t k = 0; k < scores.size(); ++k) out[k] = scores[k] > t ? 1 : 0;
    return out;
  }
  if (truth.size() != scores.size()) {
    throw InvalidArgument("binarize: " + std::to_string(scores.size()) + " scores vs " +
                          std::to_string(truth.size()) + " truth labels");
  }
  const auto positives = static_cast<std::size_t>(std::count_if(truth.begin(), truth.end(), [](auto t) { return t != 0; }));
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw InvalidArgument("binarize: ROC threshold undefined, ground truth has a single class");
  }
  std::vector<double> candidates(scores.begin(), scores.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best_j = -2.0;
  double best_t = candidates.front();
  for (double t : candidates) {
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
      if (scores[k] >= t) (truth[k] ? tp : fp) += 1;
    }
    const double j = static_cast<double>(tp) / static_cast<double>(positives) -
                     static_cast<double>(fp) / static_cast<double>(negatives);
    if (j > best_j) {
      best_j = j;
      best_t = t;
    }
  }
  for (std::size_t k = 0; k < scores.size(); ++k) out[k] = scores[k] >= best_t ? 1 : 0;
  return out;
}

BinaryMasks binarize(const Attribution& attr, const GroundTruth& truth, Binarization method) {
  if (attr.scope_edges != truth.scope_edges) {
    throw InvalidArgument("binarize: attribution and ground truth scopes differ for target " +
                          edge_str(attr.target));
  }
  if (attr.feature_scores.size() != truth.feature_mask.size()) {
    throw InvalidArgument("binarize: feature count mismatch for target " + edge_str(attr.target));
  }
  return {binarize(attr.edge_scores, attr.is_signed, truth.edge_mask, method),
          binarize(attr.feature_scores, attr.is_signed, truth.feature_mask, method)};
}

ConfusionMatrix confusion(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> truth) {
  if (pred.size() != truth.size()) {
    throw InvalidArgument("confusion: length mismatch " + std::to_string(pred.size()) + " vs " +
                          std::to_string(truth.size()));
  }
  ConfusionMatrix cm;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const bool p = pred[k] != 0;
    const bool t = truth[k] != 0;
    if (p && t) ++cm.tp;
    else if (p) ++cm.fp;
    else if (t) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

GtMetrics gt_metrics(const ConfusionMatrix& cm) {
  GtMetrics m;
  m.sensitivity = rate(cm.tp, cm.tp + cm.fn);
  m.specificity = rate(cm.tn, cm.tn + cm.fp);
  m.precision = rate(cm.tp, cm.tp + cm.fp);
  m.recall = m.sensitivity;
  return m;
}

std::vector<std::size_t> rank_by_score(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::size_t default_step_size(std::size_t num_elements) {
  if (num_elements <= 200) return 1;
  return (num_elements * 5 + 99) / 100;
}

std::size_t subject_size(const ExplanationContext& ctx, Subject subject) {
  return subject == Subject::edges ? ctx.num_scope_edges() : ctx.num_features();
}

Curve perturbation_curve(const ExplanationContext& ctx, std::span<const std::size_t> order,
                         CurveKind kind, Subject subject, std::size_t step_size) {
  const std::size_t n = subject_size(ctx, subject);
  if (order.size() != n) {
    throw InvalidArgument("perturbation_curve: order has " + std::to_string(order.size()) +
                          " elements, subject has " + std::to_string(n));
  }
  std::vector<std::uint8_t> seen(n, 0);
  for (std::size_t k : order) {
    if (k >= n || seen[k]) throw InvalidArgument("perturbation_curve: order is not a permutation");
    seen[k] = 1;
  }
  if (step_size < 1) throw InvalidArgument("perturbation_curve: step_size must be >= 1");

  Curve c;
  c.kind = kind;
  c.subject = subject;
  Perturbation p(ctx, subject);
  const bool inserting = kind == CurveKind::insertion;
  if (inserting) p.set_all(false);
  c.xs.push_back(0.0);
  c.ys.push_back(p.evaluate());
  if (n == 0) {
    c.xs.push_back(1.0);
    c.ys.push_back(c.ys.front());
    return c;
  }
  for (std::size_t done = 0; done < n;) {
    const std::size_t end = std::min(n, done + step_size);
    for (; done < end; ++done) p.set(order[done], inserting);
    c.xs.push_back(static_cast<double>(done) / static_cast<double>(n));
    c.ys.push_back(p.evaluate());
  }
  return c;
}

Curve random_baseline(const ExplanationContext& ctx, CurveKind kind, Subject subject,
                      int realizations, std::uint64_t seed, std::size_t step_size) {
  if (realizations < 1) throw InvalidArgument("random_baseline: realizations must be >= 1");
  Rng rng(seed);
  const std::size_t n = subject_size(ctx, subject);
  std::vector<std::size_t> order(n);
  Curve mean;
  for (int r = 0; r < realizations; ++r) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(order.begin(), order.end(), rng);
    Curve c = perturbation_curve(ctx, order, kind, subject, step_size);
    if (r == 0) {
      mean = std::move(c);
      continue;
    }
    for (std::size_t k = 0; k < mean.ys.size(); ++k) mean.ys[k] += c.ys[k];
  }
  for (double& y : mean.ys) y /= realizations;
  return mean;
}

AreaScore area_score(const Curve& explainer, const Curve& baseline, CurveKind mode) {
  if (explainer.xs != baseline.xs) throw InvalidArgument("area_score: curves do not share xs");
  if (explainer.ys.size() != explainer.xs.size() || baseline.ys.size() != baseline.xs.size()) {
    throw InvalidArgument("area_score: xs and ys lengths differ");
  }
  AreaScore s;
  s.mode = mode;
  const auto& x = explainer.xs;
  for (std::size_t k = 1; k < x.size(); ++k) {
    const double dx = x[k] - x[k - 1];
    auto trap = [&](auto f) { return 0.5 * dx * (f(k - 1) + f(k)); };
    const auto& e = explainer.ys;
    const auto& r = baseline.ys;
    s.a_plus += trap([&](std::size_t i) { return std::max(e[i] - r[i], 0.0); });
    s.a_minus += trap([&](std::size_t i) { return std::max(r[i] - e[i], 0.0); });
    s.u += trap([&](std::size_t i) { return 1.0 - r[i]; });
    s.l += trap([&](std::size_t i) { return r[i]; });
  }
  const double ins = ratio(s.a_plus, s.u) - ratio(s.a_minus, s.l);
  s.score = mode == CurveKind::insertion ? ins : -ins;
  return s;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double stddev(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("stddev of an empty set");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::vector<Edge> explain_targets(const EdgeSplit& split, const LabeledGraph* lg, std::size_t max_targets) {
  std::vector<Edge> out;
  for (const Edge& e : split.test_pos) {
    if (lg && lg->is_random_edge(e)) continue;
    out.push_back(e);
    if (max_targets > 0 && out.size() == max_targets) break;
  }
  return out;
}

std::uint64_t target_seed(std::uint64_t seed, Edge target, ExplainerKind kind) {
  return derive_seed(seed, {static_cast<std::uint64_t>(target.u), static_cast<std::uint64_t>(target.v),
                            static_cast<std::uint64_t>(kind)});
}

std::vector<Attribution> explain_all(const LinkPredictor& model, const Graph& g,
                                     std::span<const Edge> targets, const EvaluationConfig& cfg) {
  std::vector<Attribution> out;
  out.reserve(targets.size() * cfg.explainers.size());
  for (const Edge& t : targets) {
    const ExplanationContext ctx(model, g, t);
    for (ExplainerKind kind : cfg.explainers) {
      out.push_back(explain(kind, ctx, cfg.explainer_options, target_seed(cfg.seed, ctx.target(), kind)));
    }
  }
  return out;
}

GroundTruth ground_truth_for(const LabeledGraph& lg, const Graph& g, Edge target, int hops) {
  return lg.kind == GeneratorKind::sbm ? ground_truth_sbm(lg, g, target, hops)
                                       : ground_truth_ws(g, target, hops);
}

ResultTable evaluate_attributions(const LinkPredictor& model, const Graph& g,
                                  std::span<const Attribution> attributions, const LabeledGraph* lg,
                                  const EvaluationConfig& cfg) {
  if (attributions.empty()) throw InvalidArgument("evaluate: no attributions to evaluate");
  if (cfg.protocol == Protocol::ground_truth && lg == nullptr) {
    throw InvalidArgument("evaluate: ground_truth protocol needs a synthetic dataset with ground truth");
  }
  ResultTable table;
  table.protocol = cfg.protocol;

  // Group attributions by target, keeping first-appearance order.
  std::vector<Edge> targets;
  std::map<Edge, std::vector<const Attribution*>> by_target;
  for (const Attribution& a : attributions) {
    auto [it, inserted] = by_target.try_emplace(a.target);
    if (inserted) targets.push_back(a.target);
    it->second.push_back(&a);
  }

  for (const Edge& t : targets) {
    const auto& group = by_target[t];
    if (cfg.protocol == Protocol::ground_truth) {
      GroundTruth truth;
      try {
        truth = ground_truth_for(*lg, g, t, model.hops());
      } catch (const InvalidArgument&) {
        table.skipped_targets.push_back(t);
        continue;
      }
      for (const Attribution* a : group) {
        ResultRow row;
        row.target = t;
        row.explainer = a->method;
        if (a->scope_edges != truth.scope_edges) {
          throw InvalidArgument("evaluate: attribution scope for " + edge_str(t) +
                                " does not match the graph; wrong checkpoint or dataset?");
        }
        auto score = [&](std::span<const double> s, std::span<const std::uint8_t> m,
                         std::optional<ConfusionMatrix>& cm, GtMetrics& metrics) {
          std::vector<std::uint8_t> pred;
          try {
            pred = binarize(s, a->is_signed, m, cfg.binarization);
          } catch (const InvalidArgument&) {
            return;  // single-class truth: ROC threshold undefined
          }
          cm = confusion(pred, m);
          metrics = gt_metrics(*cm);
        };
        score(a->edge_scores, truth.edge_mask, row.edge_confusion, row.edge_metrics);
        score(a->feature_scores, truth.feature_mask, row.feature_confusion, row.feature_metrics);
        table.rows.push_back(std::move(row));
      }
      continue;
    }

    const ExplanationContext ctx(model, g, t);
    std::vector<ResultRow> rows;
    for (const Attribution* a : group) {
      if (a->scope_edges != ctx.scope_edges() || a->feature_scores.size() != ctx.num_features()) {
        throw InvalidArgument("evaluate: attribution scope for " + edge_str(t) +
                              " does not match the graph; wrong checkpoint or dataset?");
      }
      ResultRow row;
      row.target = t;
      row.explainer = a->method;
      rows.push_back(std::move(row));
    }
    for (Subject subject : cfg.subjects) {
      const std::size_t n = subject_size(ctx, subject);
      const std::size_t step = cfg.step_size > 0 ? cfg.step_size : default_step_size(n);
      for (CurveKind kind : cfg.kinds) {
        CurveSet set;
        set.target = t;
        set.subject = subject;
        set.kind = kind;
        const std::uint64_t seed =
            derive_seed(cfg.seed, {static_cast<std::uint64_t>(t.u), static_cast<std::uint64_t>(t.v), 100,
                                   static_cast<std::uint64_t>(subject), static_cast<std::uint64_t>(kind)});
        set.baseline = random_baseline(ctx, kind, subject, cfg.realizations, seed, step);
        for (std::size_t k = 0; k < group.size(); ++k) {
          const Attribution& a = *group[k];
          const auto& scores = subject == Subject::edges ? a.edge_scores : a.feature_scores;
          Curve c = perturbation_curve(ctx, rank_by_score(scores), kind, subject, step);
          rows[k].areas.push_back({subject, kind, area_score(c, set.baseline, kind)});
          set.explainers.emplace_back(a.method, std::move(c));
        }
        table.curves.push_back(std::move(set));
      }
    }
    for (auto& r : rows) table.rows.push_back(std::move(r));
  }
  table.aggregates = aggregate(table.rows);
  return table;
}

ResultTable evaluate_dataset(const LinkPredictor& model, const EdgeSplit& split,
                             const LabeledGraph* lg, const EvaluationConfig& cfg) {
  const std::vector<Edge> targets = explain_targets(split, lg, cfg.max_targets);
  if (targets.empty()) throw InvalidArgument("evaluate: the test set has no explainable edges");
  const std::vector<Attribution> attrs = explain_all(model, split.train_graph, targets, cfg);
  return evaluate_attributions(model, split.train_graph, attrs, lg, cfg);
}

std::vector<AggregateRow> aggregate(std::span<const ResultRow> rows) {
  std::vector<ExplainerKind> order;
  std::map<std::pair<ExplainerKind, std::string>, std::vector<double>> values;
  std::vector<std::pair<ExplainerKind, std::string>> keys;
  auto add = [&](ExplainerKind e, const std::string& metric, std::optional<double> v) {
    const auto key = std::make_pair(e, metric);
    auto [it, inserted] = values.try_emplace(key);
    if (inserted) keys.push_back(key);
    if (v) it->second.push_back(*v);
  };
  for (const ResultRow& r : rows) {
    if (r.edge_confusion) {
      add(r.explainer, "edge_sensitivity", r.edge_metrics.sensitivity);
      add(r.explainer, "edge_specificity", r.edge_metrics.specificity);
    }
    if (r.feature_confusion) {
      add(r.explainer, "feature_sensitivity", r.feature_metrics.sensitivity);
      add(r.explainer, "feature_specificity", r.feature_metrics.specificity);
    }
    for (const AreaEntry& a : r.areas) {
      add(r.explainer, std::string(to_string(a.subject)) + "_" + std::string(to_string(a.kind)),
          a.area.score);
    }
  }
  std::vector<AggregateRow> out;
  for (const auto& key : keys) {
    const auto& v = values[key];
    AggregateRow row;
    row.explainer = key.first;
    row.metric = key.second;
    row.count = v.size();
    if (!v.empty()) {
      row.median = median(v);
      row.stddev = stddev(v);
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::optional<AggregateRow> find_aggregate(const ResultTable& table, ExplainerKind explainer,
                                           std::string_view metric) {
  for (const auto& row : table.aggregates) {
    if (row.explainer == explainer && row.metric == metric) return row;
  }
  return std::nullopt;
}

}  // namespace lpx
