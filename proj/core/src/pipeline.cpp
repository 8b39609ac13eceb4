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

#include "lpx/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>
#include <string>

#include "lpx/error.hpp"
#include "lpx/version.hpp"

namespace lpx {

namespace {

// Walks a JSON object, remembering the dotted path for diagnostics and
// rejecting keys nobody asked for.
class ConfigReader {
 public:
  ConfigReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  [[noreturn]] void fail(std::string_view key, std::string_view why) const {
    std::string name = path_;
    if (!key.empty()) name += (name.empty() ? "" : ".") + std::string(key);
    throw InvalidArgument("config field '" + name + "': " + std::string(why));
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <class T>
  void read(const char* key, T& out) {
    if (!has(key)) return;
    const Json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
      out = v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
      out = v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
      if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a non-negative integer");
      out = v.get<T>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
      out = v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
      out = v.get<std::string>();
    } else {
      static_assert(sizeof(T) == 0, "unsupported config type");
    }
  }

  std::vector<std::string> strings(const char* key, std::vector<std::string> fallback) {
    if (!has(key)) return fallback;
    const Json& v = j_.at(key);
    if (!v.is_array()) fail(key, "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& s : v) {
      if (!s.is_string()) fail(key, "expected a list of strings");
      out.push_back(s.get<std::string>());
    }
    return out;
  }

  template <class Enum, class Parse>
  void read_enum(const char* key, Enum& out, Parse parse) {
    std::string s;
    read(key, s);
    if (!j_.contains(key)) return;
    const auto v = parse(s);
    if (!v) fail(key, "unknown value '" + s + "'");
    out = *v;
  }

  std::optional<ConfigReader> child(const char* key) {
    if (!has(key)) return std::nullopt;
    return ConfigReader(j_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(it.key(), "unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::optional<EncoderKind> encoder_from(std::string_view s) {
  if (s == "gcn_vgae") return EncoderKind::gcn_vgae;
  if (s == "gin") return EncoderKind::gin;
  return std::nullopt;
}

std::optional<DecoderKind> decoder_from(std::string_view s) {
  if (s == "inner_product") return DecoderKind::inner_product;
  if (s == "cosine") return DecoderKind::cosine;
  return std::nullopt;
}

std::optional<Optimizer> optimizer_from(std::string_view s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "adam") return Optimizer::adam;
  return std::nullopt;
}

std::string compact(const Json& j) { return j.dump(); }

fs::path out_path(const RunConfig& cfg, const char* name) { return fs::path(cfg.out_dir) / name; }

std::string text_header(const RunConfig& cfg) {
  return std::string("# ") + kToolVersion + "\n# config: " + compact(to_json(cfg)) + "\n";
}

LinkPredictor load_checkpoint(const RunConfig& cfg, const Dataset& ds) {
  const fs::path path = out_path(cfg, "checkpoint.json");
  LinkPredictor model = checkpoint_from_json(read_json_file(path));
  if (!(model.config() == cfg.model)) {
    throw InvalidArgument("checkpoint/config mismatch: " + path.string() + " was trained with model " +
                          compact(to_json(model.config())) + ", config asks for " +
                          compact(to_json(cfg.model)));
  }
  if (model.num_features() != ds.graph.num_features()) {
    throw InvalidArgument("checkpoint/config mismatch: " + path.string() + " expects " +
                          std::to_string(model.num_features()) + " features, dataset has " +
                          std::to_string(ds.graph.num_features()));
  }
  return model;
}

std::vector<Attribution> load_attributions(const fs::path& path) {
  const Json j = read_json_file(path);
  if (!j.contains("attributions") || !j.at("attributions").is_array()) {
    throw IoError(path.string() + ": missing or malformed field 'attributions'");
  }
  std::vector<Attribution> out;
  for (const auto& a : j.at("attributions")) out.push_back(attribution_from_json(a));
  return out;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const char* color_for(const std::string& name, std::size_t index) {
  if (name == "gnnexplainer") return "#1f77b4";
  if (name == "ig") return "#d62728";
  if (name == "deconvolution") return "#2ca02c";
  if (name == "lrp") return "#ff7f0e";
  if (name == "random") return "#7f7f7f";
  if (name == "random baseline") return "#9467bd";
  static const char* palette[] = {"#8c564b", "#e377c2", "#17becf", "#bcbd22"};
  return palette[index % 4];
}

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string svg_open(const std::string& title, const std::string& comment) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt("%.0f", kWidth) + "\" height=\"" +
       fmt("%.0f", kHeight) + "\" viewBox=\"0 0 " + fmt("%.0f", kWidth) + " " + fmt("%.0f", kHeight) + "\">\n";
  s += "<!-- " + escape_xml(comment) + " -->\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt("%.1f", kLeft) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" +
       escape_xml(title) + "</text>\n";
  return s;
}

std::string axis_frame(const std::string& xlabel, const std::string& ylabel, double ymin, double ymax,
                       bool x_ticks) {
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  std::string s;
  s += "<rect x=\"" + fmt("%.1f", x0) + "\" y=\"" + fmt("%.1f", y1) + "\" width=\"" + fmt("%.1f", x1 - x0) +
       "\" height=\"" + fmt("%.1f", y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double f = k / 4.0;
    const double yv = ymin + f * (ymax - ymin);
    const double py = y0 - f * (y0 - y1);
    s += "<line x1=\"" + fmt("%.1f", x0) + "\" y1=\"" + fmt("%.1f", py) + "\" x2=\"" + fmt("%.1f", x1) +
         "\" y2=\"" + fmt("%.1f", py) + "\" stroke=\"#dddddd\"/>\n";
    s += "<text x=\"" + fmt("%.1f", x0 - 8) + "\" y=\"" + fmt("%.1f", py + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt("%.2f", yv) + "</text>\n";
    if (x_ticks) {
      const double px = x0 + f * (x1 - x0);
      s += "<text x=\"" + fmt("%.1f", px) + "\" y=\"" + fmt("%.1f", y0 + 16) +
           "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + fmt("%.2f", f) + "</text>\n";
    }
  }
  s += "<text x=\"" + fmt("%.1f", (x0 + x1) / 2) + "\" y=\"" + fmt("%.1f", kHeight - 18) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" + escape_xml(xlabel) + "</text>\n";
  s += "<text x=\"18\" y=\"" + fmt("%.1f", (y0 + y1) / 2) +
       "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       fmt("%.1f", (y0 + y1) / 2) + ")\">" + escape_xml(ylabel) + "</text>\n";
  return s;
}

std::string legend(const std::vector<Series>& series) {
  std::string s;
  const double x = kWidth - kRight + 16;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = kTop + 12 + 20.0 * static_cast<double>(k);
    s += "<line x1=\"" + fmt("%.1f", x) + "\" y1=\"" + fmt("%.1f", y) + "\" x2=\"" + fmt("%.1f", x + 22) +
         "\" y2=\"" + fmt("%.1f", y) + "\" stroke=\"" + color_for(series[k].name, k) + "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + fmt("%.1f", x + 28) + "\" y=\"" + fmt("%.1f", y + 4) +
         "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(series[k].name) + "</text>\n";
  }
  return s;
}

}  // namespace

RunConfig parse_run_config(const Json& j) {
  RunConfig cfg;
  ConfigReader root(j, "");
  root.read("seed", cfg.seed);
  root.read("out_dir", cfg.out_dir);

  if (auto d = root.child("dataset")) {
    d->read("generator", cfg.dataset.generator);
    if (cfg.dataset.generator != "sbm" && cfg.dataset.generator != "ws" && cfg.dataset.generator != "files") {
      d->fail("generator", "expected sbm, ws or files");
    }
    if (auto s = d->child("sbm")) {
      if (s->has("block_sizes")) {
        const Json& b = j.at("dataset").at("sbm").at("block_sizes");
        if (!b.is_array() || b.empty()) s->fail("block_sizes", "expected a non-empty list of positive integers");
        cfg.dataset.sbm.block_sizes.clear();
        for (const auto& v : b) {
          if (!v.is_number_integer() || v.get<long long>() < 1) {
            s->fail("block_sizes", "expected a non-empty list of positive integers");
          }
          cfg.dataset.sbm.block_sizes.push_back(v.get<std::size_t>());
        }
      }
      s->read("p_in", cfg.dataset.sbm.p_in);
      s->read("p_out", cfg.dataset.sbm.p_out);
      if (!(cfg.dataset.sbm.p_in > 0.0 && cfg.dataset.sbm.p_in <= 1.0)) s->fail("p_in", "must lie in (0, 1]");
      if (!(cfg.dataset.sbm.p_out >= 0.0 && cfg.dataset.sbm.p_out < cfg.dataset.sbm.p_in)) {
        s->fail("p_out", "must lie in [0, p_in)");
      }
      s->finish();
    }
    if (auto w = d->child("ws")) {
      w->read("n", cfg.dataset.ws.n);
      w->read("k", cfg.dataset.ws.k);
      w->read("beta", cfg.dataset.ws.beta);
      if (cfg.dataset.ws.k % 2 != 0 || cfg.dataset.ws.k >= cfg.dataset.ws.n) w->fail("k", "must be even and < n");
      if (!(cfg.dataset.ws.beta >= 0.0 && cfg.dataset.ws.beta <= 1.0)) w->fail("beta", "must lie in [0, 1]");
      w->finish();
    }
    d->read("graph_file", cfg.dataset.graph_file);
    d->read("feature_file", cfg.dataset.feature_file);
    d->read("test_fraction", cfg.dataset.test_fraction);
    if (!(cfg.dataset.test_fraction > 0.0 && cfg.dataset.test_fraction < 1.0)) {
      d->fail("test_fraction", "must lie in (0, 1)");
    }
    if (cfg.dataset.generator == "files" && (cfg.dataset.graph_file.empty() || cfg.dataset.feature_file.empty())) {
      d->fail(cfg.dataset.graph_file.empty() ? "graph_file" : "feature_file", "required when generator is files");
    }
    d->finish();
  }

  if (auto m = root.child("model")) {
    m->read_enum("encoder", cfg.model.encoder, encoder_from);
    m->read_enum("decoder", cfg.model.decoder, decoder_from);
    m->read("layers", cfg.model.layers);
    m->read("hidden_dim", cfg.model.hidden_dim);
    m->read("embed_dim", cfg.model.embed_dim);
    m->read("gin_epsilon", cfg.model.gin_epsilon);
    m->read("learn_gin_epsilon", cfg.model.learn_gin_epsilon);
    if (cfg.model.layers < 1) m->fail("layers", "must be >= 1");
    if (cfg.model.hidden_dim < 1) m->fail("hidden_dim", "must be >= 1");
    if (cfg.model.embed_dim < 1) m->fail("embed_dim", "must be >= 1");
    m->finish();
  }

  if (auto t = root.child("training")) {
    t->read_enum("optimizer", cfg.training.optimizer, optimizer_from);
    t->read("epochs", cfg.training.epochs);
    t->read("learning_rate", cfg.training.learning_rate);
    t->read("momentum", cfg.training.momentum);
    t->read("kl_weight", cfg.training.kl_weight);
    t->read("max_grad_norm", cfg.training.max_grad_norm);
    if (cfg.training.epochs < 0) t->fail("epochs", "must be >= 0");
    if (!(cfg.training.learning_rate > 0.0)) t->fail("learning_rate", "must be > 0");
    if (!(cfg.training.momentum >= 0.0 && cfg.training.momentum < 1.0)) t->fail("momentum", "must lie in [0, 1)");
    if (cfg.training.kl_weight < 0.0) t->fail("kl_weight", "must be >= 0");
    if (cfg.training.max_grad_norm < 0.0) t->fail("max_grad_norm", "must be >= 0");
    t->finish();
  }

  EvaluationConfig& ev = cfg.evaluation;
  if (auto e = root.child("explainers")) {
    std::vector<std::string> names;
    for (ExplainerKind k : ev.explainers) names.emplace_back(explainer_name(k));
    names = e->strings("methods", names);
    ev.explainers.clear();
    for (const auto& n : names) {
      const auto k = parse_explainer(n);
      if (!k) e->fail("methods", "unknown explainer '" + n + "'");
      if (std::find(ev.explainers.begin(), ev.explainers.end(), *k) != ev.explainers.end()) {
        e->fail("methods", "duplicate explainer '" + n + "'");
      }
      ev.explainers.push_back(*k);
    }
    if (ev.explainers.empty()) e->fail("methods", "needs at least one explainer");
    if (auto ig = e->child("ig")) {
      ig->read("steps", ev.explainer_options.ig.steps);
      if (ev.explainer_options.ig.steps < 1) ig->fail("steps", "must be >= 1");
      ig->finish();
    }
    if (auto lrp = e->child("lrp")) {
      lrp->read("epsilon", ev.explainer_options.lrp.epsilon);
      if (!(ev.explainer_options.lrp.epsilon > 0.0)) lrp->fail("epsilon", "must be > 0");
      lrp->finish();
    }
    if (auto g = e->child("gnnexplainer")) {
      auto& o = ev.explainer_options.gnnexplainer;
      g->read("epochs", o.epochs);
      g->read("learning_rate", o.learning_rate);
      g->read("sparsity", o.sparsity);
      g->read("entropy", o.entropy);
      g->read("init_std", o.init_std);
      if (o.epochs < 0) g->fail("epochs", "must be >= 0");
      if (!(o.learning_rate > 0.0)) g->fail("learning_rate", "must be > 0");
      if (o.sparsity < 0.0) g->fail("sparsity", "must be >= 0");
      if (o.entropy < 0.0) g->fail("entropy", "must be >= 0");
      if (o.init_std < 0.0) g->fail("init_std", "must be >= 0");
      g->finish();
    }
    e->finish();
  }

  if (auto v = root.child("evaluation")) {
    v->read_enum("protocol", ev.protocol, parse_protocol);
    v->read_enum("binarization", ev.binarization, parse_binarization);
    std::vector<std::string> subjects;
    for (Subject s : ev.subjects) subjects.emplace_back(to_string(s));
    subjects = v->strings("subjects", subjects);
    ev.subjects.clear();
    for (const auto& s : subjects) {
      const auto p = parse_subject(s);
      if (!p) v->fail("subjects", "unknown subject '" + s + "'");
      if (std::find(ev.subjects.begin(), ev.subjects.end(), *p) == ev.subjects.end()) ev.subjects.push_back(*p);
    }
    std::vector<std::string> kinds;
    for (CurveKind k : ev.kinds) kinds.emplace_back(to_string(k));
    kinds = v->strings("kinds", kinds);
    ev.kinds.clear();
    for (const auto& s : kinds) {
      const auto p = parse_curve_kind(s);
      if (!p) v->fail("kinds", "unknown curve kind '" + s + "'");
      if (std::find(ev.kinds.begin(), ev.kinds.end(), *p) == ev.kinds.end()) ev.kinds.push_back(*p);
    }
    v->read("realizations", ev.realizations);
    v->read("step_size", ev.step_size);
    v->read("max_targets", ev.max_targets);
    if (ev.realizations < 1) v->fail("realizations", "must be >= 1");
    if (ev.protocol == Protocol::insdel && (ev.subjects.empty() || ev.kinds.empty())) {
      v->fail(ev.subjects.empty() ? "subjects" : "kinds", "must not be empty for insdel");
    }
    v->finish();
  }
  root.finish();

  cfg.dataset.sbm.seed = cfg.seed;
  cfg.dataset.ws.seed = cfg.seed;
  cfg.training.seed = cfg.seed;
  ev.seed = cfg.seed;
  return cfg;
}

Json to_json(const RunConfig& cfg) {
  const auto& ev = cfg.evaluation;
  Json methods = Json::array();
  for (ExplainerKind k : ev.explainers) methods.push_back(explainer_name(k));
  Json subjects = Json::array();
  for (Subject s : ev.subjects) subjects.push_back(to_string(s));
  Json kinds = Json::array();
  for (CurveKind k : ev.kinds) kinds.push_back(to_string(k));
  Json training = to_json(cfg.training);
  training.erase("seed");
  const auto& g = ev.explainer_options.gnnexplainer;
  return {
      {"seed", cfg.seed},
      {"dataset",
       {{"generator", cfg.dataset.generator},
        {"sbm", {{"block_sizes", cfg.dataset.sbm.block_sizes}, {"p_in", cfg.dataset.sbm.p_in}, {"p_out", cfg.dataset.sbm.p_out}}},
        {"ws", {{"n", cfg.dataset.ws.n}, {"k", cfg.dataset.ws.k}, {"beta", cfg.dataset.ws.beta}}},
        {"graph_file", cfg.dataset.graph_file},
        {"feature_file", cfg.dataset.feature_file},
        {"test_fraction", cfg.dataset.test_fraction}}},
      {"model", to_json(cfg.model)},
      {"training", std::move(training)},
      {"explainers",
       {{"methods", std::move(methods)},
        {"ig", {{"steps", ev.explainer_options.ig.steps}}},
        {"lrp", {{"epsilon", ev.explainer_options.lrp.epsilon}}},
        {"gnnexplainer",
         {{"epochs", g.epochs}, {"learning_rate", g.learning_rate}, {"sparsity", g.sparsity},
          {"entropy", g.entropy}, {"init_std", g.init_std}}}}},
      {"evaluation",
       {{"protocol", to_string(ev.protocol)},
        {"binarization", to_string(ev.binarization)},
        {"subjects", std::move(subjects)},
        {"kinds", std::move(kinds)},
        {"realizations", ev.realizations},
        {"step_size", ev.step_size},
        {"max_targets", ev.max_targets}}},
  };
}

Json with_provenance(const RunConfig& cfg, Json payload) {
  payload["tool_version"] = kToolVersion;
  payload["config"] = to_json(cfg);
  return payload;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.graph = load_graph(dir / "graph.txt", dir / "features.txt");
  const Json meta = read_json_file(dir / "dataset.json");
  if (!meta.contains("dataset")) throw IoError((dir / "dataset.json").string() + ": missing field 'dataset'");
  const Json& d = meta.at("dataset");
  if (d.contains("generator") && d.at("generator") != "files") {
    ds.labels = labeled_graph_from_json(d, ds.graph);
  }
  ds.split = split_from_json(read_json_file(dir / "split.json").at("split"), ds.graph.features());
  return ds;
}

void run_generate(const RunConfig& cfg) {
  const int hops = cfg.model.layers;
  Graph g;
  std::optional<LabeledGraph> lg;
  if (cfg.dataset.generator == "files") {
    g = load_graph(cfg.dataset.graph_file, cfg.dataset.feature_file);
  } else {
    lg = cfg.dataset.generator == "sbm" ? generate_sbm(cfg.dataset.sbm) : generate_ws(cfg.dataset.ws);
    g = lg->graph;
  }
  const EdgeSplit split = split_edges(g, cfg.dataset.test_fraction, cfg.seed);

  const std::string header = text_header(cfg);
  std::string graph_text = header + "nodes " + std::to_string(g.num_nodes()) + "\n";
  for (const Edge& e : g.edges()) graph_text += std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
  write_text_file(out_path(cfg, "graph.txt"), graph_text);
  write_feature_file(out_path(cfg, "features.txt"), g.features());
  {
    // Prepend the provenance comment to the feature file.
    std::ifstream in(out_path(cfg, "features.txt"));
    const std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    write_text_file(out_path(cfg, "features.txt"), header + body);
  }

  Json dataset = lg ? labels_to_json(*lg)
                    : Json{{"generator", "files"}, {"num_nodes", g.num_nodes()}};
  write_json_file(out_path(cfg, "dataset.json"), with_provenance(cfg, {{"dataset", std::move(dataset)}}));
  write_json_file(out_path(cfg, "split.json"), with_provenance(cfg, {{"split", to_json(split)}}));

  Json truths = Json::array();
  Json skipped = Json::array();
  if (lg) {
    for (const Edge& t : explain_targets(split, &*lg)) {
      try {
        truths.push_back(to_json(ground_truth_for(*lg, split.train_graph, t, hops)));
      } catch (const InvalidArgument&) {
        skipped.push_back(Json::array({t.u, t.v}));
      }
    }
  }
  write_json_file(out_path(cfg, "ground_truth.json"),
                  with_provenance(cfg, {{"available", lg.has_value()},
                                        {"ground_truth", std::move(truths)},
                                        {"skipped_targets", std::move(skipped)}}));
}

void run_train(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg.out_dir);
  const LinkPredictor model = train(cfg.model, ds.split, cfg.training);
  write_json_file(out_path(cfg, "checkpoint.json"), with_provenance(cfg, checkpoint_to_json(model)));
  const auto& m = model.metadata();
  write_json_file(out_path(cfg, "metrics.json"),
                  with_provenance(cfg, {{"test_auc", m.test_auc},
                                        {"test_accuracy", m.test_accuracy},
                                        {"accuracy_threshold", m.accuracy_threshold},
                                        {"seed", m.options.seed},
                                        {"epochs", m.options.epochs},
                                        {"final_loss", m.loss_history.empty() ? Json(nullptr)
                                                                              : Json(m.loss_history.back())}}));
}

void run_explain(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg.out_dir);
  const LinkPredictor model = load_checkpoint(cfg, ds);
  const auto targets = explain_targets(ds.split, ds.labels ? &*ds.labels : nullptr, cfg.evaluation.max_targets);
  if (targets.empty()) throw InvalidArgument("explain: the test set has no explainable edges");
  const auto attrs = explain_all(model, ds.split.train_graph, targets, cfg.evaluation);
  Json list = Json::array();
  for (const Attribution& a : attrs) list.push_back(to_json(a));
  write_json_file(out_path(cfg, "attributions.json"), with_provenance(cfg, {{"attributions", std::move(list)}}));
}

void run_evaluate(const RunConfig& cfg) {
  const Dataset ds = load_dataset(cfg.out_dir);
  if (cfg.evaluation.protocol == Protocol::ground_truth && !ds.labels) {
    throw InvalidArgument("evaluate: ground_truth protocol needs a synthetic dataset; " +
                          (fs::path(cfg.out_dir) / "dataset.json").string() + " has no ground truth");
  }
  const LinkPredictor model = load_checkpoint(cfg, ds);
  const auto attrs = load_attributions(out_path(cfg, "attributions.json"));
  const ResultTable table = evaluate_attributions(model, ds.split.train_graph, attrs,
                                                  ds.labels ? &*ds.labels : nullptr, cfg.evaluation);
  write_json_file(out_path(cfg, "results.json"), with_provenance(cfg, to_json(table, false)));
  if (cfg.evaluation.protocol == Protocol::insdel) {
    write_json_file(out_path(cfg, "curves.json"), with_provenance(cfg, {{"curves", curves_to_json(table.curves)}}));
  }
}

void run_report(const RunConfig& cfg) {
  const fs::path results_path = out_path(cfg, "results.json");
  ResultTable table = result_table_from_json(read_json_file(results_path));
  if (table.rows.empty()) throw InvalidArgument("report: " + results_path.string() + " holds no results");
  const fs::path curves_path = out_path(cfg, "curves.json");
  if (table.protocol == Protocol::insdel && fs::exists(curves_path)) {
    table.curves = curves_from_json(read_json_file(curves_path).at("curves"));
  }
  const std::string comment = std::string(kToolVersion) + " config: " + compact(to_json(cfg));
  write_text_file(out_path(cfg, "summary.txt"), text_header(cfg) + summary_text(table));

  const fs::path plots = fs::path(cfg.out_dir) / "plots";
  std::vector<ExplainerKind> explainers;
  for (const ResultRow& r : table.rows) {
    if (std::find(explainers.begin(), explainers.end(), r.explainer) == explainers.end()) {
      explainers.push_back(r.explainer);
    }
  }
  if (table.protocol == Protocol::insdel) {
    // Curves of the first target, one plot per (subject, kind).
    std::set<std::pair<Subject, CurveKind>> drawn;
    for (const CurveSet& set : table.curves) {
      if (!drawn.insert({set.subject, set.kind}).second) continue;
      std::vector<Series> series;
      for (const auto& [kind, curve] : set.explainers) {
        series.push_back({std::string(explainer_name(kind)), curve.xs, curve.ys});
      }
      series.push_back({"random baseline", set.baseline.xs, set.baseline.ys});
      const std::string subject = set.subject == Subject::edges ? "edges" : "features";
      const std::string title = std::string(to_string(set.subject)) + " " + std::string(to_string(set.kind)) +
                                ", target (" + std::to_string(set.target.u) + ", " +
                                std::to_string(set.target.v) + ")";
      write_text_file(plots / ("curve_" + std::string(to_string(set.subject)) + "_" +
                               std::string(to_string(set.kind)) + ".svg"),
                      svg_line_plot(title, "fraction of " + subject, "model output", series, comment));
    }
    for (Subject subject : {Subject::edges, Subject::features}) {
      for (CurveKind kind : {CurveKind::insertion, CurveKind::deletion}) {
        std::vector<Series> groups;
        for (ExplainerKind e : explainers) {
          Series s{std::string(explainer_name(e)), {}, {}};
          for (const ResultRow& r : table.rows) {
            if (r.explainer != e) continue;
            for (const AreaEntry& a : r.areas) {
              if (a.subject == subject && a.kind == kind) s.ys.push_back(a.area.score);
            }
          }
          if (!s.ys.empty()) groups.push_back(std::move(s));
        }
        if (groups.empty()) continue;
        const std::string name = std::string(to_string(subject)) + "_" + std::string(to_string(kind));
        write_text_file(plots / ("scores_" + name + ".svg"),
                        svg_strip_plot(std::string(to_string(subject)) + " " + std::string(to_string(kind)) +
                                           " area scores",
                                       "area score", -1.0, 1.0, groups, comment));
      }
    }
    return;
  }
  for (Subject subject : {Subject::edges, Subject::features}) {
    for (const char* metric : {"sensitivity", "specificity"}) {
      std::vector<Series> groups;
      for (ExplainerKind e : explainers) {
        Series s{std::string(explainer_name(e)), {}, {}};
        for (const ResultRow& r : table.rows) {
          if (r.explainer != e) continue;
          const GtMetrics& m = subject == Subject::edges ? r.edge_metrics : r.feature_metrics;
          const auto& v = std::string(metric) == "sensitivity" ? m.sensitivity : m.specificity;
          if (v) s.ys.push_back(*v);
        }
        if (!s.ys.empty()) groups.push_back(std::move(s));
      }
      if (groups.empty()) continue;
      const std::string name = std::string(to_string(subject)) + "_" + metric;
      write_text_file(plots / ("gt_" + name + ".svg"),
                      svg_strip_plot(std::string(to_string(subject)) + " " + metric, metric, 0.0, 1.0, groups,
                                     comment));
    }
  }
}

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<Series>& series, const std::string& comment) {
  std::string s = svg_open(title, comment);
  s += axis_frame(xlabel, ylabel, 0.0, 1.0, true);
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& ser = series[k];
    std::string pts;
    for (std::size_t i = 0; i < ser.xs.size() && i < ser.ys.size(); ++i) {
      const double px = x0 + std::clamp(ser.xs[i], 0.0, 1.0) * (x1 - x0);
      const double py = y0 - std::clamp(ser.ys[i], 0.0, 1.0) * (y0 - y1);
      if (i) pts += ' ';
      pts += fmt("%.2f", px) + "," + fmt("%.2f", py);
    }
    const bool dashed = ser.name == "random baseline";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color_for(ser.name, k)) + "\" stroke-width=\"2\"" +
         (dashed ? " stroke-dasharray=\"6 4\"" : "") + " points=\"" + pts + "\"/>\n";
  }
  s += legend(series);
  s += "</svg>\n";
  return s;
}

std::string svg_strip_plot(const std::string& title, const std::string& ylabel, double ymin, double ymax,
                           const std::vector<Series>& groups, const std::string& comment) {
  std::string s = svg_open(title, comment);
  s += axis_frame("explainer", ylabel, ymin, ymax, false);
  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;
  auto py = [&](double v) { return y0 - (std::clamp(v, ymin, ymax) - ymin) / (ymax - ymin) * (y0 - y1); };
  if (ymin < 0.0 && ymax > 0.0) {
    s += "<line x1=\"" + fmt("%.1f", x0) + "\" y1=\"" + fmt("%.1f", py(0.0)) + "\" x2=\"" + fmt("%.1f", x1) +
         "\" y2=\"" + fmt("%.1f", py(0.0)) + "\" stroke=\"#888888\"/>\n";
  }
  const double slot = (x1 - x0) / static_cast<double>(std::max<std::size_t>(groups.size(), 1));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double cx = x0 + slot * (static_cast<double>(g) + 0.5);
    const char* color = color_for(groups[g].name, g);
    for (std::size_t k = 0; k < groups[g].ys.size(); ++k) {
      const double jitter = (static_cast<double>((k * 37) % 21) - 10.0) / 10.0 * slot * 0.3;
      s += "<circle cx=\"" + fmt("%.2f", cx + jitter) + "\" cy=\"" + fmt("%.2f", py(groups[g].ys[k])) +
           "\" r=\"2.5\" fill=\"" + color + "\" fill-opacity=\"0.6\"/>\n";
    }
    if (!groups[g].ys.empty()) {
      const double m = median(groups[g].ys);
      s += "<line x1=\"" + fmt("%.1f", cx - slot * 0.35) + "\" y1=\"" + fmt("%.2f", py(m)) + "\" x2=\"" +
           fmt("%.1f", cx + slot * 0.35) + "\" y2=\"" + fmt("%.2f", py(m)) + "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    s += "<text x=\"" + fmt("%.1f", cx) + "\" y=\"" + fmt("%.1f", y0 + 16) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(groups[g].name) +
         "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::string summary_text(const ResultTable& table) {
  std::set<Edge> targets;
  for (const ResultRow& r : table.rows) targets.insert(r.target);
  std::string s = "protocol: " + std::string(to_string(table.protocol)) + "\n";
  s += "targets: " + std::to_string(targets.size()) + "\n";
  s += "skipped targets: " + std::to_string(table.skipped_targets.size()) + "\n\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %-22s %10s %10s %6s\n", "explainer", "metric", "median", "std", "n");
  s += line;
  // Insertion rows first, then deletion, then everything else.
  std::vector<const AggregateRow*> rows;
  for (const char* key : {"_insertion", "_deletion", "_sensitivity", "_specificity"}) {
    for (const AggregateRow& a : table.aggregates) {
      if (a.metric.ends_with(key)) rows.push_back(&a);
    }
  }
  for (const AggregateRow* a : rows) {
    if (a->count == 0) {
      std::snprintf(line, sizeof line, "%-14s %-22s %10s %10s %6zu\n", std::string(explainer_name(a->explainer)).c_str(),
                    a->metric.c_str(), "undefined", "-", a->count);
    } else {
      std::snprintf(line, sizeof line, "%-14s %-22s %10.4f %10.4f %6zu\n",
                    std::string(explainer_name(a->explainer)).c_str(), a->metric.c_str(), a->median, a->stddev,
                    a->count);
    }
    s += line;
  }
  return s;
}

}  // namespace lpx
