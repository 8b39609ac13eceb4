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


// Per-stage costs on the desk SBM (2 x 50 nodes).

#include <benchmark/benchmark.h>

#include "lpx/evaluation.hpp"
#include "lpx/explainers.hpp"
#include "lpx/models.hpp"
#include "lpx/synthgen.hpp"

namespace {

using namespace lpx;

struct Desk {
  LabeledGraph lg = generate_sbm(SbmConfig{.block_sizes = {50, 50}, .p_in = 0.3, .p_out = 0.02, .seed = 1});
  EdgeSplit split = split_edges(lg.graph, 0.1, 1);
  LinkPredictor model = LinkPredictor::initialize(ModelConfig{}, lg.graph.num_features(), 1);
  Edge target = split.test_pos.front();
};

const Desk& desk() {
  static const Desk d;
  return d;
}

void BM_TrainEpochs(benchmark::State& state) {
  const Desk& d = desk();
  TrainOptions o;
  o.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(ModelConfig{}, d.split, o));
}
BENCHMARK(BM_TrainEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_Embed(benchmark::State& state) {
  const Desk& d = desk();
  for (auto _ : state) benchmark::DoNotOptimize(d.model.embed(d.split.train_graph));
}
BENCHMARK(BM_Embed)->Unit(benchmark::kMicrosecond);

void BM_ContextEvaluate(benchmark::State& state) {
  const Desk& d = desk();
  const ExplanationContext ctx(d.model, d.split.train_graph, d.target);
  for (auto _ : state) benchmark::DoNotOptimize(ctx.evaluate());
}
BENCHMARK(BM_ContextEvaluate)->Unit(benchmark::kMicrosecond);

void BM_Explain(benchmark::State& state) {
  const Desk& d = desk();
  const auto kind = static_cast<ExplainerKind>(state.range(0));
  state.SetLabel(std::string(explainer_name(kind)));
  const ExplanationContext ctx(d.model, d.split.train_graph, d.target);
  const ExplainerOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(explain(kind, ctx, opts, 1));
}
BENCHMARK(BM_Explain)
    ->Arg(static_cast<int>(ExplainerKind::gnnexplainer))
    ->Arg(static_cast<int>(ExplainerKind::integrated_gradients))
    ->Arg(static_cast<int>(ExplainerKind::deconvolution))
    ->Arg(static_cast<int>(ExplainerKind::lrp))
    ->Unit(benchmark::kMillisecond);

void BM_RandomBaseline(benchmark::State& state) {
  const Desk& d = desk();
  const ExplanationContext ctx(d.model, d.split.train_graph, d.target);
  const int realizations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(random_baseline(ctx, CurveKind::insertion, Subject::edges, realizations, 1,
                                             default_step_size(ctx.num_scope_edges())));
  }
}
BENCHMARK(BM_RandomBaseline)->Arg(1)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_AreaScore(benchmark::State& state) {
  Curve e;
  Curve r;
  for (int k = 0; k <= 200; ++k) {
    e.xs.push_back(k / 200.0);
    r.xs.push_back(k / 200.0);
    e.ys.push_back(1.0 - k / 400.0);
    r.ys.push_back(0.5);
  }
  for (auto _ : state) benchmark::DoNotOptimize(area_score(e, r, CurveKind::insertion));
}
BENCHMARK(BM_AreaScore);

}  // namespace

BENCHMARK_MAIN();
