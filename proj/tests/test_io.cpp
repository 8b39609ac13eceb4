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


#include <cmath>
#include <fstream>
#include <limits>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lpx/error.hpp"
#include "lpx/io.hpp"

namespace lpx {
namespace {

using namespace lpx::testing;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("lpx_io_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path file(const std::string& name) const { return dir_ / name; }
  void write(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
  }
  fs::path dir_;
};

// Expects `fn` to throw IoError whose message contains `needle`.
template <class Fn>
void expect_io_error(Fn fn, const std::string& needle) {
  try {
    fn();
    ADD_FAILURE() << "no IoError, expected '" << needle << "'";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

using GraphFiles = TempDir;

TEST_F(GraphFiles, RoundTrip) {
  const Graph g = random_graph(25, 0.2, 3, 4);
  write_graph_file(file("g.txt"), g.num_nodes(), g.edges());
  write_feature_file(file("f.txt"), g.features());
  const Graph back = load_graph(file("g.txt"), file("f.txt"));
  EXPECT_EQ(back, g);
  EXPECT_TRUE(matrices_equal(back.features(), g.features()));
}

TEST_F(GraphFiles, CommentsAndBlankLines) {
  write("g.txt", "# a comment\nnodes 3\n\n0 1 # trailing\n1 2\n");
  write("f.txt", "# header\n1 2\n3 4\n5 6\n");
  const Graph g = load_graph(file("g.txt"), file("f.txt"));
  EXPECT_EQ(g.num_edges(), 2u);
  EXPECT_EQ(g.features()(2, 1), 6.0);
}

TEST_F(GraphFiles, Errors) {
  expect_io_error([&] { read_graph_file(file("missing.txt")); }, "missing.txt");
  write("h.txt", "0 1\n");
  expect_io_error([&] { read_graph_file(file("h.txt")); }, "h.txt:1");
  write("r.txt", "nodes 2\n0 1\n0 5\n");
  expect_io_error([&] { read_graph_file(file("r.txt")); }, "r.txt:3");
  write("m.txt", "nodes 2\n0 x\n");
  expect_io_error([&] { read_graph_file(file("m.txt")); }, "m.txt:2");
  write("e.txt", "");
  expect_io_error([&] { read_graph_file(file("e.txt")); }, "header");
}

TEST_F(GraphFiles, FeatureErrors) {
  expect_io_error([&] { read_feature_file(file("nope.txt"), 2); }, "nope.txt");
  write("f.txt", "1 2\n3\n");
  expect_io_error([&] { read_feature_file(file("f.txt"), 2); }, "f.txt:2");
  write("v.txt", "1 2\n3 abc\n");
  expect_io_error([&] { read_feature_file(file("v.txt"), 2); }, "abc");
  write("n.txt", "1 2\n3 4\n");
  expect_io_error([&] { read_feature_file(file("n.txt"), 3); }, "rows");
}

using JsonFiles = TempDir;

TEST_F(JsonFiles, FloatsReloadBitExactly) {
  Rng rng(1);
  Matrix m(7, 3);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = std::ldexp(uniform01(rng) - 0.5, static_cast<int>(k) - 10);
  m(0, 0) = 0.1;
  m(1, 1) = std::numeric_limits<double>::denorm_min();
  m(2, 2) = -0.0;
  write_json_file(file("m.json"), matrix_to_json(m));
  const Matrix back = matrix_from_json(read_json_file(file("m.json")));
  EXPECT_TRUE(matrices_equal(back, m));
  EXPECT_EQ(dump_json(matrix_to_json(m)), dump_json(matrix_to_json(back)));
}

TEST_F(JsonFiles, RejectsNonFinite) {
  Matrix m = Matrix::Zero(1, 1);
  m(0, 0) = std::nan("");
  EXPECT_THROW(dump_json(matrix_to_json(m)), IoError);
}

TEST_F(JsonFiles, InvalidJsonNamesPath) {
  write("bad.json", "{ \"a\": ");
  expect_io_error([&] { read_json_file(file("bad.json")); }, "bad.json");
}

TEST(Serialization, Edges) {
  const std::vector<Edge> e = {{0, 3}, {2, 5}};
  EXPECT_EQ(edges_from_json(edges_to_json(e)), e);
  EXPECT_THROW(edges_from_json(Json::parse("[[1]]")), IoError);
  EXPECT_THROW(edges_from_json(Json::parse("{}")), IoError);
}

TEST(Serialization, Configs) {
  ModelConfig c = small_config(EncoderKind::gcn_vgae, DecoderKind::cosine);
  c.gin_epsilon = 0.25;
  EXPECT_EQ(model_config_from_json(to_json(c)), c);
  TrainOptions o;
  o.optimizer = Optimizer::sgd;
  o.momentum = 0.9;
  o.epochs = 17;
  o.seed = 99;
  const TrainOptions back = train_options_from_json(to_json(o));
  EXPECT_EQ(back.optimizer, o.optimizer);
  EXPECT_EQ(back.momentum, o.momentum);
  EXPECT_EQ(back.epochs, o.epochs);
  EXPECT_EQ(back.seed, o.seed);
}

TEST(Serialization, SplitAndLabels) {
  const LabeledGraph lg = generate_sbm(desk_sbm(2));
  const EdgeSplit s = split_edges(lg.graph, 0.1, 4);
  const EdgeSplit back = split_from_json(to_json(s), lg.graph.features());
  EXPECT_EQ(back.train_graph, s.train_graph);
  EXPECT_EQ(back.test_pos, s.test_pos);
  EXPECT_EQ(back.test_neg, s.test_neg);
  EXPECT_EQ(back.seed, s.seed);
  const LabeledGraph lb = labeled_graph_from_json(labels_to_json(lg), lg.graph);
  EXPECT_EQ(lb.kind, lg.kind);
  EXPECT_EQ(lb.node_labels, lg.node_labels);
  EXPECT_EQ(lb.random_edges, lg.random_edges);
  EXPECT_THROW(split_from_json(to_json(s), Matrix::Zero(3, 2)), IoError);
}

TEST(Serialization, GroundTruth) {
  const LabeledGraph lg = generate_ws({.n = 30, .k = 4, .beta = 0.0, .seed = 1});
  const GroundTruth gt = ground_truth_ws(lg.graph, {0, 1}, 2);
  const GroundTruth back = ground_truth_from_json(to_json(gt));
  EXPECT_EQ(back.target, gt.target);
  EXPECT_EQ(back.hops, gt.hops);
  EXPECT_EQ(back.scope_edges, gt.scope_edges);
  EXPECT_EQ(back.edge_mask, gt.edge_mask);
  EXPECT_EQ(back.feature_mask, gt.feature_mask);
}

TEST(Serialization, AttributionsOfEveryMethod) {
  const Graph g = random_graph(15, 0.3, 2, 3);
  const LinkPredictor m = LinkPredictor::initialize(small_config(EncoderKind::gin, DecoderKind::cosine), 3, 1);
  const ExplanationContext ctx(m, g, {0, 1});
  const ExplainerOptions opts{.ig = {.steps = 8}, .lrp = {}, .gnnexplainer = {.epochs = 5}};
  for (auto k : {ExplainerKind::gnnexplainer, ExplainerKind::integrated_gradients,
                 ExplainerKind::deconvolution, ExplainerKind::lrp, ExplainerKind::random}) {
    const Attribution a = explain(k, ctx, opts, 3);
    EXPECT_EQ(attribution_from_json(Json::parse(dump_json(to_json(a)))), a) << explainer_name(k);
  }
}

TEST(Serialization, ToyIgRecordKeepsSigns) {
  const Graph g = toy_graph();
  const LinkPredictor toy = LinkPredictor::toy();
  const ExplanationContext ctx(toy, g, {kA, kB});
  const Attribution a = attribution_from_json(Json::parse(dump_json(to_json(explain_ig(ctx, {.steps = 256})))));
  ASSERT_EQ(a.scope_edges, (std::vector<Edge>{{kA, kX}, {kA, kY}, {kA, kZ}}));
  EXPECT_GT(a.edge_scores[0], 0.0);
  EXPECT_LT(a.edge_scores[1], 0.0);
  EXPECT_LT(std::abs(a.edge_scores[2]), 1e-6);
}

TEST(Serialization, ResultTableAndCurves) {
  const LabeledGraph lg = generate_sbm(desk_sbm(5));
  const EdgeSplit split = split_edges(lg.graph, 0.1, 5);
  const LinkPredictor m = LinkPredictor::initialize(small_config(EncoderKind::gin, DecoderKind::inner_product), 100, 2);
  EvaluationConfig cfg;
  cfg.explainers = {ExplainerKind::deconvolution, ExplainerKind::random};
  cfg.realizations = 2;
  cfg.max_targets = 3;
  const ResultTable t = evaluate_dataset(m, split, &lg, cfg);
  EXPECT_EQ(result_table_from_json(Json::parse(dump_json(to_json(t)))), t);
  ResultTable no_curves = t;
  no_curves.curves.clear();
  EXPECT_EQ(result_table_from_json(to_json(t, false)), no_curves);
  EXPECT_EQ(curves_from_json(curves_to_json(t.curves)), t.curves);

  cfg.protocol = Protocol::ground_truth;
  const ResultTable gt = evaluate_dataset(m, split, &lg, cfg);
  EXPECT_EQ(result_table_from_json(Json::parse(dump_json(to_json(gt)))), gt);
}

TEST(Serialization, Checkpoint) {
  ModelConfig c = small_config(EncoderKind::gin, DecoderKind::inner_product);
  c.learn_gin_epsilon = true;
  const LinkPredictor m = LinkPredictor::initialize(c, 6, 8);
  const LinkPredictor back = checkpoint_from_json(Json::parse(dump_json(checkpoint_to_json(m))));
  EXPECT_EQ(back, m);
  const Graph g = random_graph(10, 0.3, 1, 6);
  EXPECT_EQ(back.predict(g, {0, 1}), m.predict(g, {0, 1}));

  Json broken = checkpoint_to_json(m);
  broken["model"]["hidden_dim"] = 9;
  EXPECT_THROW(checkpoint_from_json(broken), IoError);
}

}  // namespace
}  // namespace lpx
