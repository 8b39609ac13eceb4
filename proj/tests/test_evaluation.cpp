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


#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lpx/error.hpp"

namespace lpx {
namespace {

using namespace lpx::testing;
using Mask = std::vector<std::uint8_t>;

TEST(Binarize, FixedSigned) {
  const double s[] = {0.3, -0.2, 0.0};
  EXPECT_EQ(binarize(s, true, {}, Binarization::fixed), (Mask{1, 0, 0}));
}

TEST(Binarize, FixedMask) {
  const double s[] = {0.9, 0.4};
  EXPECT_EQ(binarize(s, false, {}, Binarization::fixed), (Mask{1, 0}));
}

TEST(Binarize, RocOptimalSeparates) {
  const double s[] = {0.9, 0.8, 0.1};
  const Mask truth{1, 1, 0};
  EXPECT_EQ(binarize(s, true, truth, Binarization::roc_optimal), truth);
}

TEST(Binarize, RocOptimalNeedsBothClasses) {
  const double s[] = {0.9, 0.8};
  const Mask truth{1, 1};
  EXPECT_THROW(binarize(s, true, truth, Binarization::roc_optimal), InvalidArgument);
}

// Property: roc_optimal depends only on the ranking of the scores.
TEST(Binarize, RocOptimalIsRankBased) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(12);
    Mask truth(12);
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] = 2.0 * uniform01(rng) - 1.0;
      truth[k] = uniform01(rng) < 0.5;
    }
    truth[0] = 1;
    truth[1] = 0;
    std::vector<double> t(s.size());
    std::transform(s.begin(), s.end(), t.begin(), [](double v) { return std::exp(3.0 * v) + 7.0; });
    const Mask a = binarize(s, true, truth, Binarization::roc_optimal);
    const Mask b = binarize(t, true, truth, Binarization::roc_optimal);
    EXPECT_EQ(gt_metrics(confusion(a, truth)), gt_metrics(confusion(b, truth)));
  }
}

TEST(Confusion, Examples) {
  EXPECT_EQ(confusion(Mask{1, 0, 1}, Mask{1, 0, 1}), (ConfusionMatrix{.tp = 2, .fp = 0, .tn = 1, .fn = 0}));
  EXPECT_EQ(confusion(Mask{1, 1}, Mask{1, 0}), (ConfusionMatrix{.tp = 1, .fp = 1, .tn = 0, .fn = 0}));
  EXPECT_EQ(confusion(Mask{1, 0, 0, 1}, Mask{1, 1, 0, 0}), (ConfusionMatrix{.tp = 1, .fp = 1, .tn = 1, .fn = 1}));
  EXPECT_THROW(confusion(Mask{1}, Mask{1, 0}), InvalidArgument);
}

TEST(GtMetrics, Examples) {
  const GtMetrics perfect = gt_metrics(confusion(Mask{1, 0, 1}, Mask{1, 0, 1}));
  EXPECT_EQ(perfect.sensitivity, 1.0);
  EXPECT_EQ(perfect.specificity, 1.0);
  const GtMetrics all_pos = gt_metrics(confusion(Mask{1, 1, 1}, Mask{1, 0, 1}));
  EXPECT_EQ(all_pos.sensitivity, 1.0);
  EXPECT_EQ(all_pos.specificity, 0.0);
  const GtMetrics half = gt_metrics({.tp = 1, .fp = 1, .tn = 1, .fn = 1});
  EXPECT_EQ(half.sensitivity, 0.5);
  EXPECT_EQ(half.specificity, 0.5);
  EXPECT_EQ(half.precision, 0.5);
  EXPECT_EQ(half.recall, 0.5);
}

TEST(GtMetrics, UndefinedRatesStayEmpty) {
  const GtMetrics m = gt_metrics({.tp = 2, .fp = 0, .tn = 0, .fn = 0});
  EXPECT_EQ(m.sensitivity, 1.0);
  EXPECT_FALSE(m.specificity.has_value());
  EXPECT_FALSE(gt_metrics({}).precision.has_value());
}

TEST(Ranking, TiesByIndex) {
  const double s[] = {0.1, 0.5, 0.5, -1.0, 0.7};
  EXPECT_EQ(rank_by_score(s), (std::vector<std::size_t>{4, 1, 2, 0, 3}));
  EXPECT_EQ(default_step_size(200), 1u);
  EXPECT_EQ(default_step_size(201), 11u);
  EXPECT_EQ(default_step_size(1000), 50u);
}

struct Toy {
  Graph g = toy_graph();
  LinkPredictor model = LinkPredictor::toy();
  ExplanationContext ctx{model, g, {kA, kB}};
};

// Index of a scope edge in the toy context.
std::size_t toy_index(const ExplanationContext& ctx, Edge e) {
  const auto& s = ctx.scope_edges();
  return static_cast<std::size_t>(std::find(s.begin(), s.end(), e) - s.begin());
}

TEST(Curve, ToyDeletionMatchesLeaveOutOracle) {
  Toy t;
  const std::vector<Edge> ranked = {{kA, kX}, {kA, kZ}, {kA, kY}};
  std::vector<std::size_t> order;
  for (const Edge& e : ranked) order.push_back(toy_index(t.ctx, e));
  const Curve c = perturbation_curve(t.ctx, order, CurveKind::deletion, Subject::edges, 1);
  ASSERT_EQ(c.ys.size(), 4u);
  EXPECT_EQ(c.xs.front(), 0.0);
  EXPECT_EQ(c.xs.back(), 1.0);
  // Oracle: a weight-0 edge drops its message but still counts in a's degree,
  // so e_a = x_a + (sum of kept neighbor rows) / 3 and e_b = x_b.
  const Matrix x = toy_features();
  for (std::size_t step = 0; step <= ranked.size(); ++step) {
    Eigen::RowVectorXd ea = x.row(kA);
    for (std::size_t k = step; k < ranked.size(); ++k) ea += x.row(ranked[k].v) / 3.0;
    const Eigen::RowVectorXd eb = x.row(kB);
    const double p = (ea.dot(eb) / (ea.norm() * eb.norm()) + 1.0) / 2.0;
    EXPECT_NEAR(c.ys[step], p, 1e-12) << step;
  }
  // Removing the supporting edge hurts, removing the counter-evidence helps.
  EXPECT_LT(c.ys[1], c.ys[0]);
  EXPECT_GT(c.ys[3], c.ys[2]);
}

TEST(Curve, Endpoints) {
  const Graph g = random_graph(16, 0.3, 9, 4);
  const LinkPredictor m = LinkPredictor::initialize(small_config(EncoderKind::gin, DecoderKind::inner_product), 4, 2);
  const ExplanationContext ctx(m, g, {0, 1});
  const double full = ctx.evaluate();
  for (Subject subject : {Subject::edges, Subject::features}) {
    const std::size_t n = subject_size(ctx, subject);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    const Curve ins = perturbation_curve(ctx, order, CurveKind::insertion, subject, 1);
    const Curve del = perturbation_curve(ctx, order, CurveKind::deletion, subject, 1);
    EXPECT_NEAR(ins.ys.back(), full, 1e-9);
    EXPECT_NEAR(del.ys.front(), full, 1e-9);
    EXPECT_NEAR(ins.ys.front(), del.ys.back(), 1e-9);
    for (std::size_t k = 1; k < ins.xs.size(); ++k) EXPECT_GT(ins.xs[k], ins.xs[k - 1]);
    for (double y : ins.ys) EXPECT_TRUE(y >= 0.0 && y <= 1.0);
  }
  std::vector<double> zero_w(ctx.num_scope_edges(), 0.0);
  std::vector<std::size_t> order(ctx.num_scope_edges());
  std::iota(order.begin(), order.end(), 0);
  const Curve ins = perturbation_curve(ctx, order, CurveKind::insertion, Subject::edges, 3);
  EXPECT_NEAR(ins.ys.front(), ctx.evaluate(ctx.features(), zero_w), 1e-9);
}

TEST(Curve, RejectsBadOrders) {
  Toy t;
  const std::vector<std::size_t> dup = {0, 0, 1};
  const std::vector<std::size_t> short_order = {0, 1};
  EXPECT_THROW(perturbation_curve(t.ctx, dup, CurveKind::deletion, Subject::edges, 1), InvalidArgument);
  EXPECT_THROW(perturbation_curve(t.ctx, short_order, CurveKind::deletion, Subject::edges, 1),
               InvalidArgument);
}

TEST(RandomBaseline, SingleRealizationAndEndpoints) {
  const Graph g = random_graph(16, 0.3, 9, 4);
  const LinkPredictor m = LinkPredictor::initialize(small_config(EncoderKind::gin, DecoderKind::cosine), 4, 2);
  const ExplanationContext ctx(m, g, {0, 1});
  const Curve one = random_baseline(ctx, CurveKind::deletion, Subject::edges, 1, 4, 1);
  EXPECT_EQ(one, random_baseline(ctx, CurveKind::deletion, Subject::edges, 1, 4, 1));
  const Curve many = random_baseline(ctx, CurveKind::deletion, Subject::edges, 30, 4, 1);
  EXPECT_NEAR(many.ys.front(), one.ys.front(), 1e-12);
  EXPECT_NEAR(many.ys.back(), one.ys.back(), 1e-12);
  EXPECT_THROW(random_baseline(ctx, CurveKind::deletion, Subject::edges, 0, 4, 1), InvalidArgument);
}

TEST(RandomBaseline, SpreadShrinksWithRealizations) {
  const Graph g = random_graph(16, 0.3, 9, 4);
  const LinkPredictor m = LinkPredictor::initialize(small_config(EncoderKind::gin, DecoderKind::cosine), 4, 2);
  const ExplanationContext ctx(m, g, {0, 1});
  auto spread = [&](int realizations) {
    std::vector<double> mids;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Curve c = random_baseline(ctx, CurveKind::insertion, Subject::edges, realizations, s, 1);
      mids.push_back(c.ys[c.ys.size() / 2]);
    }
    return stddev(mids);
  };
  EXPECT_LT(spread(100), spread(10));
}

Curve flat(double y, CurveKind kind = CurveKind::insertion) {
  Curve c;
  c.kind = kind;
  for (int k = 0; k <= 4; ++k) {
    c.xs.push_back(k / 4.0);
    c.ys.push_back(y);
  }
  return c;
}

TEST(AreaScore, Rectangles) {
  const AreaScore same = area_score(flat(0.3), flat(0.3), CurveKind::insertion);
  EXPECT_EQ(same.score, 0.0);
  EXPECT_EQ(area_score(flat(0.3), flat(0.3), CurveKind::deletion).score, 0.0);

  const AreaScore up = area_score(flat(1.0), flat(0.5), CurveKind::insertion);
  EXPECT_NEAR(up.a_plus, 0.5, 1e-12);
  EXPECT_NEAR(up.u, 0.5, 1e-12);
  EXPECT_NEAR(up.a_minus, 0.0, 1e-12);
  EXPECT_NEAR(up.score, 1.0, 1e-12);

  EXPECT_NEAR(area_score(flat(0.0), flat(0.5), CurveKind::insertion).score, -1.0, 1e-12);
  EXPECT_NEAR(area_score(flat(0.0), flat(0.5), CurveKind::deletion).score, 1.0, 1e-12);
}

TEST(AreaScore, ZeroOverZeroIsZero) {
  // Baseline at the ceiling: U = 0 and A+ = 0.
  const AreaScore a = area_score(flat(1.0), flat(1.0), CurveKind::insertion);
  EXPECT_EQ(a.score, 0.0);
}

TEST(AreaScore, MismatchedGrids) {
  Curve c = flat(0.5);
  c.xs[2] = 0.4;
  EXPECT_THROW(area_score(c, flat(0.5), CurveKind::insertion), InvalidArgument);
}

TEST(AreaScore, Properties) {
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    Curve e = flat(0.0);
    Curve r = flat(0.0);
    for (std::size_t k = 0; k < e.ys.size(); ++k) {
      e.ys[k] = uniform01(rng);
      r.ys[k] = uniform01(rng);
    }
    const AreaScore ins = area_score(e, r, CurveKind::insertion);
    const AreaScore del = area_score(e, r, CurveKind::deletion);
    EXPECT_GE(ins.score, -1.0);
    EXPECT_LE(ins.score, 1.0);
    EXPECT_LE(ins.a_plus, ins.u + 1e-15);
    EXPECT_LE(ins.a_minus, ins.l + 1e-15);
    EXPECT_NEAR(ins.score, -del.score, 1e-15);
    // Swapping explainer and baseline negates A+/A- roles.
    const AreaScore swapped = area_score(r, e, CurveKind::insertion);
    EXPECT_NEAR(swapped.a_plus, ins.a_minus, 1e-15);
    EXPECT_NEAR(swapped.a_minus, ins.a_plus, 1e-15);
  }
}

TEST(Statistics, MedianAndStd) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  const double v[] = {1.0, 3.0};
  EXPECT_EQ(stddev(v), 1.0);
}

struct SbmFixture {
  LabeledGraph lg = generate_sbm(desk_sbm(1));
  EdgeSplit split = split_edges(lg.graph, 0.1, 1);
  LinkPredictor model = [this] {
    TrainOptions o;
    o.epochs = 60;
    o.seed = 1;
    return train(small_config(EncoderKind::gin, DecoderKind::inner_product), split, o);
  }();
};

TEST(EvaluateDataset, OracleExplainerIsPerfect) {
  SbmFixture f;
  const auto targets = explain_targets(f.split, &f.lg, 15);
  std::vector<Attribution> attrs;
  for (const Edge& t : targets) {
    const ExplanationContext ctx(f.model, f.split.train_graph, t);
    Attribution a = explain_random(ctx, 0);
    const GroundTruth gt = ground_truth_for(f.lg, f.split.train_graph, t, f.model.hops());
    ASSERT_EQ(gt.scope_edges, a.scope_edges);
    a.edge_scores.assign(gt.edge_mask.begin(), gt.edge_mask.end());
    a.feature_scores.assign(gt.feature_mask.begin(), gt.feature_mask.end());
    attrs.push_back(a);
  }
  EvaluationConfig cfg;
  cfg.protocol = Protocol::ground_truth;
  const ResultTable t = evaluate_attributions(f.model, f.split.train_graph, attrs, &f.lg, cfg);
  EXPECT_EQ(t.rows.size(), targets.size());
  for (const ResultRow& r : t.rows) {
    if (r.edge_metrics.sensitivity) {
      EXPECT_EQ(*r.edge_metrics.sensitivity, 1.0);
    }
    if (r.edge_metrics.specificity) {
      EXPECT_EQ(*r.edge_metrics.specificity, 1.0);
    }
    EXPECT_EQ(r.feature_metrics.sensitivity, 1.0);
  }
}

TEST(EvaluateDataset, GroundTruthNeedsLabels) {
  SbmFixture f;
  EvaluationConfig cfg;
  cfg.protocol = Protocol::ground_truth;
  cfg.max_targets = 2;
  EXPECT_THROW(evaluate_dataset(f.model, f.split, nullptr, cfg), InvalidArgument);
}

TEST(EvaluateDataset, RandomExplainerScoresNearZero) {
  SbmFixture f;
  EvaluationConfig cfg;
  cfg.explainers = {ExplainerKind::random};
  cfg.realizations = 20;
  cfg.max_targets = 20;
  cfg.seed = 3;
  const ResultTable t = evaluate_dataset(f.model, f.split, &f.lg, cfg);
  EXPECT_EQ(t.rows.size(), 20u);
  for (const char* metric : {"edge_insertion", "edge_deletion"}) {
    const auto agg = find_aggregate(t, ExplainerKind::random, metric);
    ASSERT_TRUE(agg.has_value()) << metric;
    EXPECT_LT(std::abs(agg->median), 0.1) << metric;
  }
}

TEST(EvaluateDataset, RowCountAndDeterminism) {
  SbmFixture f;
  EvaluationConfig cfg;
  cfg.explainers = {ExplainerKind::integrated_gradients, ExplainerKind::random};
  cfg.explainer_options.ig.steps = 10;
  cfg.realizations = 3;
  cfg.subjects = {Subject::edges};
  cfg.max_targets = 4;
  const ResultTable t = evaluate_dataset(f.model, f.split, &f.lg, cfg);
  EXPECT_EQ(t.rows.size(), 2u * 4u);
  for (const ResultRow& r : t.rows) EXPECT_EQ(r.areas.size(), 2u);
  EXPECT_EQ(t, evaluate_dataset(f.model, f.split, &f.lg, cfg));
}

TEST(EvaluateDataset, EmptyTestSet) {
  SbmFixture f;
  EdgeSplit empty = f.split;
  empty.test_pos.clear();
  empty.test_neg.clear();
  EXPECT_THROW(evaluate_dataset(f.model, empty, &f.lg, EvaluationConfig{}), InvalidArgument);
}

}  // namespace
}  // namespace lpx
