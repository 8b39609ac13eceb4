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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "lpx/error.hpp"
#include "lpx/pipeline.hpp"
#include "random_networks.hpp"

namespace lpx {
namespace {

// Pinned tolerances and thresholds.
constexpr double kToyZeroTol = 1e-6;
constexpr int kToyIgSteps = 256;
constexpr double kToyMaxSeconds = 1.0;
constexpr int kGradNetworks = 100;
constexpr double kGradRelTol = 1e-4;
constexpr double kGradStep = 1e-6;
constexpr double kGradMaxSeconds = 10.0;
constexpr double kCompletenessTol = 1e-2;
constexpr int kCompletenessSteps = 256;
constexpr std::size_t kCompletenessTargets = 20;
constexpr int kLrpNetworks = 50;
constexpr double kRandomMedianTol = 0.1;
constexpr std::size_t kRandomMinTargets = 50;
constexpr double kSbmGtThreshold = 0.7;
constexpr double kWsGtThreshold = 0.6;
constexpr std::size_t kSbmGtMinTargets = 30;
constexpr double kGtMaxSeconds = 300.0;
constexpr double kNearEmptyFraction = 0.1;
constexpr double kZeroBand = 0.15;
constexpr double kEndpointTol = 1e-9;
constexpr double kAreaTol = 1e-12;

constexpr std::uint64_t kSeed = 1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Datasets and trained models shared between criteria.
struct Desk {
  LabeledGraph sbm = generate_sbm(SbmConfig{.block_sizes = {50, 50}, .p_in = 0.3, .p_out = 0.02, .seed = kSeed});
  EdgeSplit sbm_split = split_edges(sbm.graph, 0.1, kSeed);
  LabeledGraph ws = generate_ws(WsConfig{.n = 100, .k = 4, .beta = 0.1, .seed = kSeed});
  EdgeSplit ws_split = split_edges(ws.graph, 0.1, kSeed);

  std::map<std::pair<int, int>, LinkPredictor> sbm_models;
  std::optional<LinkPredictor> ws_gin;
  std::optional<ResultTable> sbm_insdel;
  std::optional<ResultTable> ws_insdel;
  std::optional<ResultTable> sbm_gt_inner;

  static ModelConfig config(EncoderKind enc, DecoderKind dec) {
    ModelConfig c;
    c.encoder = enc;
    c.decoder = dec;
    return c;
  }
  static TrainOptions training() {
    TrainOptions o;
    o.seed = kSeed;
    return o;
  }

  const LinkPredictor& sbm_model(EncoderKind enc, DecoderKind dec) {
    const auto key = std::make_pair(static_cast<int>(enc), static_cast<int>(dec));
    auto it = sbm_models.find(key);
    if (it == sbm_models.end()) it = sbm_models.emplace(key, train(config(enc, dec), sbm_split, training())).first;
    return it->second;
  }
  const LinkPredictor& ws_model() {
    if (!ws_gin) ws_gin = train(config(EncoderKind::gin, DecoderKind::inner_product), ws_split, training());
    return *ws_gin;
  }

  static EvaluationConfig insdel_config() {
    EvaluationConfig cfg;
    cfg.protocol = Protocol::insdel;
    cfg.explainers = {ExplainerKind::gnnexplainer, ExplainerKind::integrated_gradients,
                      ExplainerKind::deconvolution, ExplainerKind::lrp, ExplainerKind::random};
    cfg.max_targets = kRandomMinTargets;
    cfg.seed = kSeed;
    return cfg;
  }
  const ResultTable& sbm_insdel_table() {
    if (!sbm_insdel) {
      sbm_insdel = evaluate_dataset(sbm_model(EncoderKind::gin, DecoderKind::inner_product), sbm_split, &sbm,
                                    insdel_config());
    }
    return *sbm_insdel;
  }
  const ResultTable& ws_insdel_table() {
    if (!ws_insdel) ws_insdel = evaluate_dataset(ws_model(), ws_split, &ws, insdel_config());
    return *ws_insdel;
  }
  static EvaluationConfig gt_config(std::vector<ExplainerKind> explainers) {
    EvaluationConfig cfg;
    cfg.protocol = Protocol::ground_truth;
    cfg.explainers = std::move(explainers);
    cfg.seed = kSeed;
    return cfg;
  }
  const ResultTable& sbm_gt_inner_table() {
    if (!sbm_gt_inner) {
      sbm_gt_inner = evaluate_dataset(sbm_model(EncoderKind::gin, DecoderKind::inner_product), sbm_split, &sbm,
                                      gt_config({ExplainerKind::integrated_gradients}));
    }
    return *sbm_gt_inner;
  }
};

double agg_median(const ResultTable& t, ExplainerKind e, const char* metric, std::size_t* count = nullptr) {
  const auto a = find_aggregate(t, e, metric);
  if (!a) throw Error(std::string("missing aggregate ") + metric);
  if (count) *count = a->count;
  return a->median;
}

// 1. Toy sign pattern.
Outcome toy_signs(Desk&) {
  const auto t0 = Clock::now();
  Matrix x(5, 2);
  x << 0.5, 0.5, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.5, 0.5;
  const Edge edges[] = {{0, 2}, {0, 3}, {0, 4}};
  const Graph g = Graph::build(5, edges, x);
  const LinkPredictor toy = LinkPredictor::toy(DecoderKind::cosine);
  const ExplanationContext ctx(toy, g, {0, 1});
  bool pass = ctx.scope_edges() == std::vector<Edge>(std::begin(edges), std::end(edges));
  std::string detail;
  for (const Attribution& a : {explain_ig(ctx, {.steps = kToyIgSteps}), explain_deconv(ctx), explain_lrp(ctx)}) {
    const auto& s = a.edge_scores;
    const bool ok = s[0] > 0.0 && s[1] < 0.0 && std::abs(s[2]) <= kToyZeroTol;
    pass = pass && ok;
    detail += std::string(explainer_name(a.method)) + " (" + fmt("%+.3g", s[0]) + ", " + fmt("%+.3g", s[1]) +
              ", " + fmt("%+.1e", s[2]) + ") ";
  }
  const Attribution m = explain_gnnx(ctx, {}, kSeed);
  bool in_unit = true;
  for (double v : m.edge_scores) in_unit = in_unit && v >= 0.0 && v <= 1.0;
  const double secs = seconds_since(t0);
  detail += "gnnexplainer mask in [0,1]: " + std::string(in_unit ? "yes" : "no") + ", " + fmt("%.3f s", secs);
  return {pass && in_unit && secs < kToyMaxSeconds, detail};
}

// 2. Reverse mode vs central differences.
Outcome autodiff_fd(Desk&) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t compared = 0;
  std::size_t excluded = 0;
  for (int k = 0; k < kGradNetworks; ++k) {
    const testing::RandomNetwork net = testing::make_random_network(static_cast<std::uint64_t>(k));
    const auto r = ad::grad_check(net.f, net.input, kGradStep);
    worst = std::max(worst, r.max_relative_error);
    compared += r.compared;
    excluded += r.excluded;
  }
  const double secs = seconds_since(t0);
  return {worst < kGradRelTol && secs < kGradMaxSeconds && compared > 0,
          "max rel err " + fmt("%.2e", worst) + " over " + std::to_string(compared) + " components (" +
              std::to_string(excluded) + " at kinks excluded), " + fmt("%.2f s", secs)};
}

// 3. IG completeness on every trained encoder/decoder pair.
Outcome ig_completeness(Desk& d) {
  double worst = 0.0;
  std::size_t checked = 0;
  const auto targets = explain_targets(d.sbm_split, &d.sbm, kCompletenessTargets);
  for (auto enc : {EncoderKind::gin, EncoderKind::gcn_vgae}) {
    for (auto dec : {DecoderKind::inner_product, DecoderKind::cosine}) {
      const LinkPredictor& m = d.sbm_model(enc, dec);
      for (const Edge& t : targets) {
        const ExplanationContext ctx(m, d.sbm_split.train_graph, t);
        const Attribution a = explain_ig(ctx, {.steps = kCompletenessSteps});
        const double sum = std::accumulate(a.edge_scores.begin(), a.edge_scores.end(), 0.0) +
                           std::accumulate(a.feature_scores.begin(), a.feature_scores.end(), 0.0);
        const std::vector<double> zero_w(ctx.num_scope_edges(), 0.0);
        const double f0 = ctx.evaluate(Matrix::Zero(ctx.features().rows(), ctx.features().cols()), zero_w);
        worst = std::max(worst, std::abs(sum - (ctx.evaluate() - f0)));
        ++checked;
      }
    }
  }
  return {checked == 4 * kCompletenessTargets && worst < kCompletenessTol,
          "max |sum - (F(x) - F(0))| = " + fmt("%.2e", worst) + " over " + std::to_string(checked) +
              " (model, target) pairs"};
}

// 4. LRP conservation error shrinks with epsilon.
Outcome lrp_conservation(Desk&) {
  int monotone = 0;
  double last_errors[3] = {0, 0, 0};
  for (int k = 0; k < kLrpNetworks; ++k) {
    double err[3];
    int i = 0;
    for (double eps : {1e-2, 1e-4, 1e-6}) {
      // Positive inputs and weights keep every relu pre-activation positive.
      Rng rng(static_cast<std::uint64_t>(k));
      const int in = 2 + static_cast<int>(uniform01(rng) * 4);
      const int hidden = 2 + static_cast<int>(uniform01(rng) * 4);
      const Matrix x = testing::random_matrix(rng, 1, in).cwiseAbs() + Matrix::Constant(1, in, 0.1);
      const Matrix w1 = testing::random_matrix(rng, in, hidden).cwiseAbs();
      const Matrix w2 = testing::random_matrix(rng, hidden, hidden).cwiseAbs();
      const Matrix w3 = testing::random_matrix(rng, hidden, 1).cwiseAbs();
      ad::Tape t;
      ad::Var xv = t.variable(x);
      ad::Var h = ad::relu(ad::matmul(xv, t.constant(w1)));
      h = ad::relu(ad::matmul(h, t.constant(w2)));
      ad::Var y = ad::matmul(h, t.constant(w3));
      t.relevance(y, eps);
      err[i++] = std::abs(t.relevance_of(xv).sum() - y.scalar());
    }
    if (err[0] > err[1] && err[1] > err[2]) ++monotone;
    std::copy(err, err + 3, last_errors);
  }
  return {monotone == kLrpNetworks,
          std::to_string(monotone) + "/" + std::to_string(kLrpNetworks) +
              " nets strictly decreasing; last net errors " + fmt("%.1e", last_errors[0]) + " > " +
              fmt("%.1e", last_errors[1]) + " > " + fmt("%.1e", last_errors[2])};
}

// 5. Random explainer scores 0 in median.
Outcome random_null(Desk& d) {
  const ResultTable& t = d.sbm_insdel_table();
  bool pass = true;
  std::string detail;
  for (const char* metric : {"edge_insertion", "edge_deletion", "feature_insertion", "feature_deletion"}) {
    std::size_t n = 0;
    const double m = agg_median(t, ExplainerKind::random, metric, &n);
    pass = pass && std::abs(m) < kRandomMedianTol && n >= kRandomMinTargets;
    detail += std::string(metric) + " " + fmt("%+.3f", m) + " (n=" + std::to_string(n) + ") ";
  }
  return {pass, detail};
}

// 6. Ground-truth sensitivity/specificity of IG.
Outcome ground_truth_metrics(Desk& d) {
  const auto t0 = Clock::now();
  const ResultTable& sbm = d.sbm_gt_inner_table();
  std::size_t n_sens = 0;
  std::size_t n_spec = 0;
  const double s_sens = agg_median(sbm, ExplainerKind::integrated_gradients, "edge_sensitivity", &n_sens);
  const double s_spec = agg_median(sbm, ExplainerKind::integrated_gradients, "edge_specificity", &n_spec);
  const ResultTable ws = evaluate_dataset(d.ws_model(), d.ws_split, &d.ws,
                                          Desk::gt_config({ExplainerKind::integrated_gradients}));
  std::size_t w_n = 0;
  const double w_sens = agg_median(ws, ExplainerKind::integrated_gradients, "edge_sensitivity", &w_n);
  const double w_spec = agg_median(ws, ExplainerKind::integrated_gradients, "edge_specificity");
  const double secs = seconds_since(t0);
  const bool pass = s_sens > kSbmGtThreshold && s_spec > kSbmGtThreshold && n_sens >= kSbmGtMinTargets &&
                    n_spec >= kSbmGtMinTargets && w_sens > kWsGtThreshold && w_spec > kWsGtThreshold &&
                    secs < kGtMaxSeconds;
  return {pass, "SBM sens " + fmt("%.3f", s_sens) + " spec " + fmt("%.3f", s_spec) + " (n=" +
                    std::to_string(n_sens) + "/" + std::to_string(n_spec) + "); WS sens " + fmt("%.3f", w_sens) +
                    " spec " + fmt("%.3f", w_spec) + " (n=" + std::to_string(w_n) + "); " + fmt("%.1f s", secs)};
}

// 7. Cosine decoder degrades IG and empties GNNExplainer masks.
Outcome cosine_degradation(Desk& d) {
  const double inner = agg_median(d.sbm_gt_inner_table(), ExplainerKind::integrated_gradients, "edge_sensitivity");
  const LinkPredictor& cos = d.sbm_model(EncoderKind::gin, DecoderKind::cosine);
  const EvaluationConfig cfg = Desk::gt_config({ExplainerKind::integrated_gradients, ExplainerKind::gnnexplainer});
  const auto targets = explain_targets(d.sbm_split, &d.sbm);
  const auto attrs = explain_all(cos, d.sbm_split.train_graph, targets, cfg);
  const ResultTable t = evaluate_attributions(cos, d.sbm_split.train_graph, attrs, &d.sbm, cfg);
  const double cosine = agg_median(t, ExplainerKind::integrated_gradients, "edge_sensitivity");
  std::size_t masks = 0;
  std::size_t near_empty = 0;
  for (const Attribution& a : attrs) {
    if (a.method != ExplainerKind::gnnexplainer || a.edge_scores.empty()) continue;
    std::size_t on = 0;
    for (double v : a.edge_scores) on += v > 0.5;
    ++masks;
    near_empty += static_cast<double>(on) <= kNearEmptyFraction * static_cast<double>(a.edge_scores.size());
  }
  const double frac = masks ? static_cast<double>(near_empty) / static_cast<double>(masks) : 0.0;
  return {cosine < inner && frac > 0.5,
          "IG edge sensitivity inner " + fmt("%.3f", inner) + " vs cosine " + fmt("%.3f", cosine) +
              "; near-empty GNNExplainer masks " + std::to_string(near_empty) + "/" + std::to_string(masks) +
              " (" + fmt("%.2f", frac) + ")"};
}

// 8. GIN beats VGAE on edge insertion.
Outcome architecture_divergence(Desk& d) {
  const double gin = agg_median(d.sbm_insdel_table(), ExplainerKind::integrated_gradients, "edge_insertion");
  EvaluationConfig cfg = Desk::insdel_config();
  cfg.explainers = {ExplainerKind::integrated_gradients};
  cfg.subjects = {Subject::edges};
  cfg.kinds = {CurveKind::insertion};
  const ResultTable t =
      evaluate_dataset(d.sbm_model(EncoderKind::gcn_vgae, DecoderKind::inner_product), d.sbm_split, &d.sbm, cfg);
  const double vgae = agg_median(t, ExplainerKind::integrated_gradients, "edge_insertion");
  return {gin > vgae && std::abs(vgae) <= kZeroBand,
          "IG edge insertion median GIN " + fmt("%+.3f", gin) + " vs VGAE " + fmt("%+.3f", vgae)};
}

// 9. IG >= Deconvolution >= LRP, LRP near 0.
Outcome explainer_ordering(Desk& d) {
  bool pass = true;
  std::string detail;
  for (const auto& [name, table] : {std::pair<const char*, const ResultTable*>{"SBM", &d.sbm_insdel_table()},
                                    std::pair<const char*, const ResultTable*>{"WS", &d.ws_insdel_table()}}) {
    const double ig = agg_median(*table, ExplainerKind::integrated_gradients, "edge_insertion");
    const double de = agg_median(*table, ExplainerKind::deconvolution, "edge_insertion");
    const double lrp = agg_median(*table, ExplainerKind::lrp, "edge_insertion");
    pass = pass && ig >= de && de >= lrp && std::abs(lrp) <= kZeroBand;
    detail += std::string(name) + ": IG " + fmt("%+.3f", ig) + " Deconv " + fmt("%+.3f", de) + " LRP " +
              fmt("%+.3f", lrp) + "; ";
  }
  return {pass, detail};
}

// 10. Curve endpoints against direct model evaluations.
Outcome curve_endpoints(Desk& d) {
  double worst = 0.0;
  std::size_t curves = 0;
  const std::pair<const ResultTable*, std::pair<const LinkPredictor*, const Graph*>> runs[] = {
      {&d.sbm_insdel_table(),
       {&d.sbm_model(EncoderKind::gin, DecoderKind::inner_product), &d.sbm_split.train_graph}},
      {&d.ws_insdel_table(), {&d.ws_model(), &d.ws_split.train_graph}}};
  for (const auto& [table, model_graph] : runs) {
    for (const CurveSet& set : table->curves) {
      const ExplanationContext ctx(*model_graph.first, *model_graph.second, set.target);
      const double full = ctx.evaluate();
      Matrix x = ctx.features();
      std::vector<double> w(ctx.num_scope_edges(), 1.0);
      if (set.subject == Subject::edges) {
        std::fill(w.begin(), w.end(), 0.0);
      } else {
        for (NodeId n : ctx.scope_nodes()) x.row(n).setZero();
      }
      const double zeroed = ctx.evaluate(x, w);
      std::vector<const Curve*> all = {&set.baseline};
      for (const auto& [kind, c] : set.explainers) all.push_back(&c);
      for (const Curve* c : all) {
        const bool ins = set.kind == CurveKind::insertion;
        worst = std::max(worst, std::abs(c->ys.back() - (ins ? full : zeroed)));
        worst = std::max(worst, std::abs(c->ys.front() - (ins ? zeroed : full)));
        ++curves;
      }
    }
  }
  return {curves > 0 && worst <= kEndpointTol,
          std::to_string(curves) + " curves, max endpoint deviation " + fmt("%.2e", worst)};
}

Curve flat_curve(double y) {
  Curve c;
  for (int k = 0; k <= 10; ++k) {
    c.xs.push_back(k / 10.0);
    c.ys.push_back(y);
  }
  return c;
}

// 11. Area-score closed forms and properties.
Outcome area_scores(Desk&) {
  bool pass = true;
  const AreaScore same = area_score(flat_curve(0.3), flat_curve(0.3), CurveKind::insertion);
  pass = pass && std::abs(same.score) <= kAreaTol &&
         std::abs(area_score(flat_curve(0.3), flat_curve(0.3), CurveKind::deletion).score) <= kAreaTol;
  const AreaScore up = area_score(flat_curve(1.0), flat_curve(0.5), CurveKind::insertion);
  pass = pass && std::abs(up.a_plus - 0.5) <= kAreaTol && std::abs(up.u - 0.5) <= kAreaTol &&
         std::abs(up.a_minus) <= kAreaTol && std::abs(up.score - 1.0) <= kAreaTol;
  pass = pass && std::abs(area_score(flat_curve(0.0), flat_curve(0.5), CurveKind::insertion).score + 1.0) <= kAreaTol;
  pass = pass && std::abs(area_score(flat_curve(0.0), flat_curve(0.5), CurveKind::deletion).score - 1.0) <= kAreaTol;
  const bool closed_forms = pass;

  Rng rng(kSeed);
  double worst_sym = 0.0;
  bool bounded = true;
  const int trials = 10000;
  for (int k = 0; k < trials; ++k) {
    Curve e = flat_curve(0.0);
    Curve r = flat_curve(0.0);
    for (std::size_t i = 0; i < e.ys.size(); ++i) {
      e.ys[i] = uniform01(rng);
      r.ys[i] = uniform01(rng);
    }
    if (k % 3 == 0) r.ys.assign(r.ys.size(), uniform01(rng));
    const double si = area_score(e, r, CurveKind::insertion).score;
    const double sd = area_score(e, r, CurveKind::deletion).score;
    bounded = bounded && si >= -1.0 && si <= 1.0 && sd >= -1.0 && sd <= 1.0;
    worst_sym = std::max(worst_sym, std::abs(si + sd));
  }
  return {closed_forms && bounded && worst_sym <= kAreaTol,
          std::string("rectangles ") + (closed_forms ? "exact" : "WRONG") + ", " + std::to_string(trials) +
              " random curve pairs in [-1,1]: " + (bounded ? "yes" : "no") + ", max |s_ins + s_del| " +
              fmt("%.1e", worst_sym)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 12. Two pipeline runs give byte-identical files.
Outcome pipeline_reproducible(Desk&) {
  const fs::path root = fs::temp_directory_path() / "lpx_acceptance_repro";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    Json j = Json::parse(R"({
      "seed": 1,
      "explainers": {"gnnexplainer": {"epochs": 50}},
      "evaluation": {"protocol": "insdel", "realizations": 10, "max_targets": 5}
    })");
    j["out_dir"] = (root / run).string();
    const RunConfig cfg = parse_run_config(j);
    run_generate(cfg);
    run_train(cfg);
    run_explain(cfg);
    run_evaluate(cfg);
    run_report(cfg);
  }
  std::size_t files = 0;
  std::size_t differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const fs::path other = root / "b" / fs::relative(entry.path(), root / "a");
    differing += !fs::exists(other) || slurp(entry.path()) != slurp(other);
  }
  fs::remove_all(root);
  return {files > 0 && differing == 0,
          std::to_string(files) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace
}  // namespace lpx

int main() {
  using namespace lpx;
  const std::pair<const char*, std::function<Outcome(Desk&)>> criteria[] = {
      {"toy sign pattern", toy_signs},
      {"autodiff vs finite differences", autodiff_fd},
      {"IG completeness", ig_completeness},
      {"LRP conservation trend", lrp_conservation},
      {"random-explainer null", random_null},
      {"ground-truth metrics", ground_truth_metrics},
      {"cosine-decoder degradation", cosine_degradation},
      {"architecture divergence", architecture_divergence},
      {"explainer ordering", explainer_ordering},
      {"curve endpoint identities", curve_endpoints},
      {"area-score closed forms", area_scores},
      {"pipeline reproducibility", pipeline_reproducible},
  };
  Desk desk;
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check(desk);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
