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

#include "lpx/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "lpx/error.hpp"

namespace lpx {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) throw IoError("cannot serialize a non-finite number");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string out = buf;
  // Keep the value a float on reload ("-0" would parse as the integer 0).
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

bool is_scalar_array(const Json& j) {
  for (const auto& v : j) {
    if (v.is_structured()) return false;
  }
  return true;
}

void dump(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      if (is_scalar_array(j)) {
        out += '[';
        for (std::size_t k = 0; k < j.size(); ++k) {
          if (k) out += ", ";
          dump(j[k], out, indent + 1);
        }
        out += ']';
        return;
      }
      out += "[\n";
      for (std::size_t k = 0; k < j.size(); ++k) {
        out += inner;
        dump(j[k], out, indent + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += pad + "]";
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      std::size_t k = 0;
      for (auto it = j.begin(); it != j.end(); ++it, ++k) {
        out += inner + Json(it.key()).dump() + ": ";
        dump(it.value(), out, indent + 1);
        out += k + 1 < j.size() ? ",\n" : "\n";
      }
      out += pad + "}";
      return;
    }
    default:
      out += j.dump();
  }
}

[[noreturn]] void bad_field(std::string_view where, std::string_view key) {
  throw IoError(std::string(where) + ": missing or malformed field '" + std::string(key) + "'");
}

const Json& at(const Json& j, const char* key, std::string_view where) {
  if (!j.is_object() || !j.contains(key)) bad_field(where, key);
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, std::string_view where) {
  const Json& v = at(j, key, where);
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!v.is_number()) bad_field(where, key);
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!v.is_number_integer()) bad_field(where, key);
    }
    return v.get<T>();
  } catch (const Json::exception&) {
    bad_field(where, key);
  }
}

std::optional<double> opt_double(const Json& j, const char* key, std::string_view where) {
  const Json& v = at(j, key, where);
  if (v.is_null()) return std::nullopt;
  if (!v.is_number()) bad_field(where, key);
  return v.get<double>();
}

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Edge edge_from(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw IoError("malformed edge " + j.dump());
  }
  return {j[0].get<NodeId>(), j[1].get<NodeId>()};
}

Json edge_to(Edge e) { return Json::array({e.u, e.v}); }

template <class Enum, class Parse>
Enum parse_enum(const Json& j, const char* key, std::string_view where, Parse parse) {
  const auto s = get<std::string>(j, key, where);
  const auto v = parse(s);
  if (!v) bad_field(where, key);
  return *v;
}

std::optional<EncoderKind> parse_encoder(std::string_view s) {
  if (s == "gcn_vgae") return EncoderKind::gcn_vgae;
  if (s == "gin") return EncoderKind::gin;
  if (s == "toy") return EncoderKind::toy;
  return std::nullopt;
}

std::optional<DecoderKind> parse_decoder(std::string_view s) {
  if (s == "inner_product") return DecoderKind::inner_product;
  if (s == "cosine") return DecoderKind::cosine;
  return std::nullopt;
}

std::optional<Optimizer> parse_optimizer(std::string_view s) {
  if (s == "sgd") return Optimizer::sgd;
  if (s == "adam") return Optimizer::adam;
  return std::nullopt;
}

std::optional<GeneratorKind> parse_generator(std::string_view s) {
  if (s == "sbm") return GeneratorKind::sbm;
  if (s == "ws") return GeneratorKind::watts_strogatz;
  return std::nullopt;
}

std::vector<double> doubles(const Json& j, const char* key, std::string_view where) {
  const Json& v = at(j, key, where);
  if (!v.is_array()) bad_field(where, key);
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) bad_field(where, key);
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<std::uint8_t> mask(const Json& j, const char* key, std::string_view where) {
  const Json& v = at(j, key, where);
  if (!v.is_array()) bad_field(where, key);
  std::vector<std::uint8_t> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) bad_field(where, key);
    out.push_back(x.get<int>() != 0 ? 1 : 0);
  }
  return out;
}

Json confusion_to(const std::optional<ConfusionMatrix>& cm) {
  if (!cm) return nullptr;
  return {{"tp", cm->tp}, {"fp", cm->fp}, {"tn", cm->tn}, {"fn", cm->fn}};
}

std::optional<ConfusionMatrix> confusion_from(const Json& j, const char* key, std::string_view where) {
  const Json& v = at(j, key, where);
  if (v.is_null()) return std::nullopt;
  ConfusionMatrix cm;
  cm.tp = get<std::size_t>(v, "tp", where);
  cm.fp = get<std::size_t>(v, "fp", where);
  cm.tn = get<std::size_t>(v, "tn", where);
  cm.fn = get<std::size_t>(v, "fn", where);
  return cm;
}

Json metrics_to(const GtMetrics& m) {
  return {{"sensitivity", opt_json(m.sensitivity)},
          {"specificity", opt_json(m.specificity)},
          {"precision", opt_json(m.precision)},
          {"recall", opt_json(m.recall)}};
}

GtMetrics metrics_from(const Json& j, std::string_view where) {
  GtMetrics m;
  m.sensitivity = opt_double(j, "sensitivity", where);
  m.specificity = opt_double(j, "specificity", where);
  m.precision = opt_double(j, "precision", where);
  m.recall = opt_double(j, "recall", where);
  return m;
}

ExplainerKind explainer_from(const Json& j, const char* key, std::string_view where) {
  return parse_enum<ExplainerKind>(j, key, where, parse_explainer);
}

}  // namespace

// --- text formats -----------------------------------------------------------

void write_graph_file(const fs::path& path, std::size_t num_nodes, std::span<const Edge> edges) {
  std::string text = "nodes " + std::to_string(num_nodes) + "\n";
  for (const Edge& e : edges) text += std::to_string(e.u) + " " + std::to_string(e.v) + "\n";
  write_text_file(path, text);
}

EdgeList read_graph_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file " + path.string());
  EdgeList out;
  bool header = false;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string first;
    if (!(ss >> first)) continue;
    auto fail = [&](const std::string& why) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + why);
    };
    if (!header) {
      long long n = -1;
      std::string extra;
      if (first != "nodes" || !(ss >> n) || n < 0 || (ss >> extra)) fail("expected header 'nodes <N>'");
      out.num_nodes = static_cast<std::size_t>(n);
      header = true;
      continue;
    }
    long long u = 0;
    long long v = 0;
    std::string extra;
    try {
      std::size_t used = 0;
      u = std::stoll(first, &used);
      if (used != first.size()) fail("malformed node id '" + first + "'");
    } catch (const std::logic_error&) {
      fail("malformed node id '" + first + "'");
    }
    if (!(ss >> v) || (ss >> extra)) fail("expected 'u v'");
    if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= out.num_nodes ||
        static_cast<std::size_t>(v) >= out.num_nodes) {
      fail("node id out of range");
    }
    out.edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
  }
  if (!header) throw IoError(path.string() + ": missing 'nodes <N>' header");
  return out;
}

void write_feature_file(const fs::path& path, const Matrix& features) {
  std::string text;
  for (Eigen::Index r = 0; r < features.rows(); ++r) {
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
      if (c) text += ' ';
      text += format_double(features(r, c));
    }
    text += '\n';
  }
  write_text_file(path, text);
}

Matrix read_feature_file(const fs::path& path, std::size_t expected_rows) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::logic_error&) {
        throw IoError(path.string() + ":" + std::to_string(lineno) + ": malformed value '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(rows.front().size()) + " values");
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != expected_rows) {
    throw IoError(path.string() + ": " + std::to_string(rows.size()) + " rows, graph has " +
                  std::to_string(expected_rows) + " nodes");
  }
  const auto cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
  }
  return m;
}

Graph load_graph(const fs::path& graph_path, const fs::path& feature_path) {
  const EdgeList el = read_graph_file(graph_path);
  Matrix x = read_feature_file(feature_path, el.num_nodes);
  try {
    return Graph::build(el.num_nodes, el.edges, std::move(x));
  } catch (const InvalidArgument& e) {
    throw IoError(graph_path.string() + ": " + e.what());
  }
}

// --- JSON -------------------------------------------------------------------

std::string dump_json(const Json& j) {
  std::string out;
  dump(j, out, 0);
  out += '\n';
  return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_json_file(const fs::path& path, const Json& j) { write_text_file(path, dump_json(j)); }

Json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
}

Json edges_to_json(std::span<const Edge> edges) {
  Json j = Json::array();
  for (const Edge& e : edges) j.push_back(edge_to(e));
  return j;
}

std::vector<Edge> edges_from_json(const Json& j) {
  if (!j.is_array()) throw IoError("expected an edge list");
  std::vector<Edge> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(edge_from(e));
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json values = Json::array();
  for (Eigen::Index k = 0; k < m.size(); ++k) values.push_back(m.data()[k]);
  return {{"shape", {m.rows(), m.cols()}}, {"values", std::move(values)}};
}

Matrix matrix_from_json(const Json& j) {
  const Json& shape = at(j, "shape", "matrix");
  if (!shape.is_array() || shape.size() != 2 || !shape[0].is_number_integer() ||
      !shape[1].is_number_integer() || shape[0].get<long long>() < 0 || shape[1].get<long long>() < 0) {
    bad_field("matrix", "shape");
  }
  const auto values = doubles(j, "values", "matrix");
  const auto rows = shape[0].get<Eigen::Index>();
  const auto cols = shape[1].get<Eigen::Index>();
  if (static_cast<std::size_t>(rows * cols) != values.size()) {
    throw IoError("matrix: shape does not match the number of values");
  }
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

std::string_view to_string(EncoderKind k) {
  switch (k) {
    case EncoderKind::gcn_vgae: return "gcn_vgae";
    case EncoderKind::gin: return "gin";
    case EncoderKind::toy: return "toy";
  }
  return "unknown";
}

std::string_view to_string(DecoderKind k) {
  return k == DecoderKind::inner_product ? "inner_product" : "cosine";
}

std::string_view to_string(Optimizer o) { return o == Optimizer::sgd ? "sgd" : "adam"; }

std::string_view to_string(GeneratorKind k) { return k == GeneratorKind::sbm ? "sbm" : "ws"; }

Json to_json(const ModelConfig& c) {
  return {{"encoder", to_string(c.encoder)},   {"decoder", to_string(c.decoder)},
          {"layers", c.layers},                {"hidden_dim", c.hidden_dim},
          {"embed_dim", c.embed_dim},          {"gin_epsilon", c.gin_epsilon},
          {"learn_gin_epsilon", c.learn_gin_epsilon}};
}

ModelConfig model_config_from_json(const Json& j) {
  constexpr std::string_view where = "model";
  ModelConfig c;
  c.encoder = parse_enum<EncoderKind>(j, "encoder", where, parse_encoder);
  c.decoder = parse_enum<DecoderKind>(j, "decoder", where, parse_decoder);
  c.layers = get<int>(j, "layers", where);
  c.hidden_dim = get<int>(j, "hidden_dim", where);
  c.embed_dim = get<int>(j, "embed_dim", where);
  c.gin_epsilon = get<double>(j, "gin_epsilon", where);
  c.learn_gin_epsilon = get<bool>(j, "learn_gin_epsilon", where);
  return c;
}

Json to_json(const TrainOptions& o) {
  return {{"optimizer", to_string(o.optimizer)},
          {"epochs", o.epochs},
          {"learning_rate", o.learning_rate},
          {"momentum", o.momentum},
          {"kl_weight", o.kl_weight},
          {"max_grad_norm", o.max_grad_norm},
          {"seed", o.seed}};
}

TrainOptions train_options_from_json(const Json& j) {
  constexpr std::string_view where = "training";
  TrainOptions o;
  o.optimizer = parse_enum<Optimizer>(j, "optimizer", where, parse_optimizer);
  o.epochs = get<int>(j, "epochs", where);
  o.learning_rate = get<double>(j, "learning_rate", where);
  o.momentum = get<double>(j, "momentum", where);
  o.kl_weight = get<double>(j, "kl_weight", where);
  o.max_grad_norm = get<double>(j, "max_grad_norm", where);
  o.seed = get<std::uint64_t>(j, "seed", where);
  return o;
}

Json to_json(const EdgeSplit& s) {
  return {{"num_nodes", s.train_graph.num_nodes()},
          {"seed", s.seed},
          {"train_edges", edges_to_json(s.train_graph.edges())},
          {"test_pos", edges_to_json(s.test_pos)},
          {"test_neg", edges_to_json(s.test_neg)}};
}

EdgeSplit split_from_json(const Json& j, const Matrix& features) {
  constexpr std::string_view where = "split";
  EdgeSplit s;
  const auto n = get<std::size_t>(j, "num_nodes", where);
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw IoError("split: " + std::to_string(n) + " nodes but the feature matrix has " +
                  std::to_string(features.rows()) + " rows");
  }
  s.seed = get<std::uint64_t>(j, "seed", where);
  const auto train = edges_from_json(at(j, "train_edges", where));
  s.test_pos = edges_from_json(at(j, "test_pos", where));
  s.test_neg = edges_from_json(at(j, "test_neg", where));
  try {
    s.train_graph = Graph::build(n, train, features);
  } catch (const InvalidArgument& e) {
    throw IoError(std::string("split: ") + e.what());
  }
  return s;
}

Json labels_to_json(const LabeledGraph& lg) {
  Json j = {{"generator", to_string(lg.kind)},
            {"num_nodes", lg.graph.num_nodes()},
            {"random_edges", edges_to_json(lg.random_edges)}};
  j["node_labels"] = lg.node_labels ? Json(*lg.node_labels) : Json(nullptr);
  return j;
}

LabeledGraph labeled_graph_from_json(const Json& j, Graph graph) {
  constexpr std::string_view where = "dataset";
  LabeledGraph lg;
  lg.kind = parse_enum<GeneratorKind>(j, "generator", where, parse_generator);
  if (get<std::size_t>(j, "num_nodes", where) != graph.num_nodes()) bad_field(where, "num_nodes");
  lg.random_edges = edges_from_json(at(j, "random_edges", where));
  const Json& labels = at(j, "node_labels", where);
  if (!labels.is_null()) {
    try {
      lg.node_labels = labels.get<std::vector<int>>();
    } catch (const Json::exception&) {
      bad_field(where, "node_labels");
    }
    if (lg.node_labels->size() != graph.num_nodes()) bad_field(where, "node_labels");
  }
  lg.graph = std::move(graph);
  return lg;
}

Json to_json(const GroundTruth& gt) {
  return {{"target", edge_to(gt.target)},
          {"hops", gt.hops},
          {"scope_edges", edges_to_json(gt.scope_edges)},
          {"edge_mask", gt.edge_mask},
          {"feature_mask", gt.feature_mask}};
}

GroundTruth ground_truth_from_json(const Json& j) {
  constexpr std::string_view where = "ground_truth";
  GroundTruth gt;
  gt.target = edge_from(at(j, "target", where));
  gt.hops = get<int>(j, "hops", where);
  gt.scope_edges = edges_from_json(at(j, "scope_edges", where));
  gt.edge_mask = mask(j, "edge_mask", where);
  gt.feature_mask = mask(j, "feature_mask", where);
  if (gt.edge_mask.size() != gt.scope_edges.size()) bad_field(where, "edge_mask");
  return gt;
}

Json to_json(const Attribution& a) {
  Json hp = Json::object();
  for (const auto& [k, v] : a.hyperparameters) hp[k] = v;
  return {{"target", edge_to(a.target)},
          {"method", explainer_name(a.method)},
          {"signed", a.is_signed},
          {"seed", a.seed},
          {"hyperparameters", std::move(hp)},
          {"scope_edges", edges_to_json(a.scope_edges)},
          {"edge_scores", a.edge_scores},
          {"feature_scores", a.feature_scores},
          {"scope_nodes", a.scope_nodes},
          {"node_feature_scores", matrix_to_json(a.node_feature_scores)}};
}

Attribution attribution_from_json(const Json& j) {
  constexpr std::string_view where = "attribution";
  Attribution a;
  a.target = edge_from(at(j, "target", where));
  a.method = explainer_from(j, "method", where);
  a.is_signed = get<bool>(j, "signed", where);
  a.seed = get<std::uint64_t>(j, "seed", where);
  const Json& hp = at(j, "hyperparameters", where);
  if (!hp.is_object()) bad_field(where, "hyperparameters");
  for (auto it = hp.begin(); it != hp.end(); ++it) {
    if (!it.value().is_number()) bad_field(where, "hyperparameters");
    a.hyperparameters[it.key()] = it.value().get<double>();
  }
  a.scope_edges = edges_from_json(at(j, "scope_edges", where));
  a.edge_scores = doubles(j, "edge_scores", where);
  a.feature_scores = doubles(j, "feature_scores", where);
  try {
    a.scope_nodes = at(j, "scope_nodes", where).get<std::vector<NodeId>>();
  } catch (const Json::exception&) {
    bad_field(where, "scope_nodes");
  }
  a.node_feature_scores = matrix_from_json(at(j, "node_feature_scores", where));
  if (a.edge_scores.size() != a.scope_edges.size()) bad_field(where, "edge_scores");
  return a;
}

Json to_json(const Curve& c) {
  return {{"kind", to_string(c.kind)}, {"subject", to_string(c.subject)}, {"xs", c.xs}, {"ys", c.ys}};
}

Curve curve_from_json(const Json& j) {
  constexpr std::string_view where = "curve";
  Curve c;
  c.kind = parse_enum<CurveKind>(j, "kind", where, parse_curve_kind);
  c.subject = parse_enum<Subject>(j, "subject", where, parse_subject);
  c.xs = doubles(j, "xs", where);
  c.ys = doubles(j, "ys", where);
  if (c.xs.size() != c.ys.size()) bad_field(where, "ys");
  return c;
}

Json curves_to_json(std::span<const CurveSet> curves) {
  Json out = Json::array();
  for (const CurveSet& set : curves) {
    Json ex = Json::array();
    for (const auto& [kind, curve] : set.explainers) {
      ex.push_back({{"explainer", explainer_name(kind)}, {"curve", to_json(curve)}});
    }
    out.push_back({{"target", edge_to(set.target)},
                   {"subject", to_string(set.subject)},
                   {"kind", to_string(set.kind)},
                   {"baseline", to_json(set.baseline)},
                   {"explainers", std::move(ex)}});
  }
  return out;
}

std::vector<CurveSet> curves_from_json(const Json& j) {
  constexpr std::string_view where = "curves";
  if (!j.is_array()) throw IoError("curves: expected an array");
  std::vector<CurveSet> out;
  for (const auto& s : j) {
    CurveSet set;
    set.target = edge_from(at(s, "target", where));
    set.subject = parse_enum<Subject>(s, "subject", where, parse_subject);
    set.kind = parse_enum<CurveKind>(s, "kind", where, parse_curve_kind);
    set.baseline = curve_from_json(at(s, "baseline", where));
    for (const auto& e : at(s, "explainers", where)) {
      set.explainers.emplace_back(explainer_from(e, "explainer", where), curve_from_json(at(e, "curve", where)));
    }
    out.push_back(std::move(set));
  }
  return out;
}

Json to_json(const ResultTable& t, bool with_curves) {
  Json rows = Json::array();
  for (const ResultRow& r : t.rows) {
    Json areas = Json::array();
    for (const AreaEntry& a : r.areas) {
      areas.push_back({{"subject", to_string(a.subject)},
                       {"kind", to_string(a.kind)},
                       {"a_plus", a.area.a_plus},
                       {"a_minus", a.area.a_minus},
                       {"u", a.area.u},
                       {"l", a.area.l},
                       {"score", a.area.score}});
    }
    rows.push_back({{"target", edge_to(r.target)},
                    {"explainer", explainer_name(r.explainer)},
                    {"edge_confusion", confusion_to(r.edge_confusion)},
                    {"feature_confusion", confusion_to(r.feature_confusion)},
                    {"edge_metrics", metrics_to(r.edge_metrics)},
                    {"feature_metrics", metrics_to(r.feature_metrics)},
                    {"areas", std::move(areas)}});
  }
  Json aggregates = Json::array();
  for (const AggregateRow& a : t.aggregates) {
    aggregates.push_back({{"explainer", explainer_name(a.explainer)},
                          {"metric", a.metric},
                          {"median", a.median},
                          {"std", a.stddev},
                          {"count", a.count}});
  }
  Json j = {{"protocol", to_string(t.protocol)},
            {"rows", std::move(rows)},
            {"aggregates", std::move(aggregates)},
            {"skipped_targets", edges_to_json(t.skipped_targets)}};
  if (with_curves) j["curves"] = curves_to_json(t.curves);
  return j;
}

ResultTable result_table_from_json(const Json& j) {
  constexpr std::string_view where = "results";
  ResultTable t;
  t.protocol = parse_enum<Protocol>(j, "protocol", where, parse_protocol);
  for (const auto& r : at(j, "rows", where)) {
    ResultRow row;
    row.target = edge_from(at(r, "target", where));
    row.explainer = explainer_from(r, "explainer", where);
    row.edge_confusion = confusion_from(r, "edge_confusion", where);
    row.feature_confusion = confusion_from(r, "feature_confusion", where);
    row.edge_metrics = metrics_from(at(r, "edge_metrics", where), where);
    row.feature_metrics = metrics_from(at(r, "feature_metrics", where), where);
    for (const auto& a : at(r, "areas", where)) {
      AreaEntry e;
      e.subject = parse_enum<Subject>(a, "subject", where, parse_subject);
      e.kind = parse_enum<CurveKind>(a, "kind", where, parse_curve_kind);
      e.area.mode = e.kind;
      e.area.a_plus = get<double>(a, "a_plus", where);
      e.area.a_minus = get<double>(a, "a_minus", where);
      e.area.u = get<double>(a, "u", where);
      e.area.l = get<double>(a, "l", where);
      e.area.score = get<double>(a, "score", where);
      row.areas.push_back(e);
    }
    t.rows.push_back(std::move(row));
  }
  for (const auto& a : at(j, "aggregates", where)) {
    AggregateRow row;
    row.explainer = explainer_from(a, "explainer", where);
    row.metric = get<std::string>(a, "metric", where);
    row.median = get<double>(a, "median", where);
    row.stddev = get<double>(a, "std", where);
    row.count = get<std::size_t>(a, "count", where);
    t.aggregates.push_back(std::move(row));
  }
  t.skipped_targets = edges_from_json(at(j, "skipped_targets", where));
  if (j.contains("curves")) t.curves = curves_from_json(j.at("curves"));
  return t;
}

Json checkpoint_to_json(const LinkPredictor& model) {
  Json params = Json::object();
  for (const auto& [name, value] : model.parameters()) params[name] = matrix_to_json(value);
  const TrainingMetadata& m = model.metadata();
  Json model_json = to_json(model.config());
  model_json["num_features"] = model.num_features();
  return {{"model", std::move(model_json)},
          {"training", {{"options", to_json(m.options)},
                        {"test_auc", m.test_auc},
                        {"test_accuracy", m.test_accuracy},
                        {"accuracy_threshold", m.accuracy_threshold},
                        {"loss_history", m.loss_history}}},
          {"parameters", std::move(params)}};
}

LinkPredictor checkpoint_from_json(const Json& j) {
  constexpr std::string_view where = "checkpoint";
  const Json& mj = at(j, "model", where);
  const ModelConfig config = model_config_from_json(mj);
  const auto num_features = get<std::size_t>(mj, "num_features", "model");
  const Json& pj = at(j, "parameters", where);
  if (!pj.is_object()) bad_field(where, "parameters");
  ParameterMap params;
  for (auto it = pj.begin(); it != pj.end(); ++it) params[it.key()] = matrix_from_json(it.value());

  // Shapes must match what the config would create.
  const LinkPredictor reference = LinkPredictor::initialize(config, std::max<std::size_t>(num_features, 1), 0);
  if (config.encoder != EncoderKind::toy) {
    for (const auto& [name, value] : reference.parameters()) {
      auto it = params.find(name);
      if (it == params.end()) throw IoError("checkpoint: missing parameter '" + name + "'");
      if (it->second.rows() != value.rows() || it->second.cols() != value.cols()) {
        throw IoError("checkpoint: parameter '" + name + "' has the wrong shape for the model config");
      }
    }
    if (params.size() != reference.parameters().size()) {
      throw IoError("checkpoint: unexpected extra parameters for the model config");
    }
  }

  LinkPredictor model(config, num_features, std::move(params));
  const Json& tj = at(j, "training", where);
  TrainingMetadata& m = model.metadata();
  m.options = train_options_from_json(at(tj, "options", "training"));
  m.test_auc = get<double>(tj, "test_auc", "training");
  m.test_accuracy = get<double>(tj, "test_accuracy", "training");
  m.accuracy_threshold = get<double>(tj, "accuracy_threshold", "training");
  m.loss_history = doubles(tj, "loss_history", "training");
  return model;
}

}  // namespace lpx
