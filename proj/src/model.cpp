// SPDX-License-Identifier: Apache-2.0
#include "grin/model.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace grin::model {

namespace {

using ad::Tensor;
using ad::Var;

Tensor glorot(int rows, int cols, std::mt19937_64& rng) {
  double limit = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(rows, cols);
  for (double& x : t.data) x = dist(rng);
  return t;
}

Mlp make_mlp(int in, int hidden, int out, std::mt19937_64& rng) {
  Mlp m;
  m.w1 = glorot(in, hidden, rng);
  m.b1 = Tensor(1, hidden);
  m.w2 = glorot(hidden, out, rng);
  m.b2 = Tensor(1, out);
  return m;
}

struct MlpVars {
  Var w1, b1, w2, b2;
};

MlpVars register_mlp(ad::Tape& t, const Mlp& m, std::vector<Var>& out) {
  MlpVars v{t.input(m.w1, true), t.input(m.b1, true), t.input(m.w2, true),
            t.input(m.b2, true)};
  out.insert(out.end(), {v.w1, v.b1, v.w2, v.b2});
  return v;
}

Var apply_mlp(ad::Tape& t, const MlpVars& m, Var x) {
  Var h = t.relu(t.add(t.matmul(x, m.w1), m.b1));
  return t.add(t.matmul(h, m.w2), m.b2);
}

Tensor edge_feature_rows(const graph::PolymerGraph& g) {
  // both directions of every undirected edge: rows 2i (u->v) and 2i+1 (v->u)
  Tensor e(2 * static_cast<int>(g.edges.size()), graph::kEdgeDim);
  for (size_t i = 0; i < g.edges.size(); ++i) {
    int k = static_cast<int>(g.edges[i].kind);
    e.at(2 * static_cast<int>(i), k) = 1.0;
    e.at(2 * static_cast<int>(i) + 1, k) = 1.0;
  }
  return e;
}

}  // namespace

Aggregator aggregator_from_string(const std::string& s) {
  if (s == "max") return Aggregator::Max;
  if (s == "mean") return Aggregator::Mean;
  if (s == "sum") return Aggregator::Sum;
  throw Error("unknown aggregator '" + s + "'");
}

Readout readout_from_string(const std::string& s) {
  if (s == "max") return Readout::Max;
  if (s == "mean") return Readout::Mean;
  if (s == "sum") return Readout::Sum;
  throw Error("unknown readout '" + s + "'");
}

std::string to_string(Aggregator a) {
  switch (a) {
    case Aggregator::Max: return "max";
    case Aggregator::Mean: return "mean";
    default: return "sum";
  }
}

std::string to_string(Readout r) {
  switch (r) {
    case Readout::Max: return "max";
    case Readout::Mean: return "mean";
    default: return "sum";
  }
}

ModelParams ModelParams::init(const ModelConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  const int d = cfg.hidden_dim;
  ModelParams p;
  p.config = cfg;
  p.input_proj.w = glorot(graph::kNodeDim, d, rng);
  p.input_proj.b = Tensor(1, d);
  for (int l = 0; l < cfg.num_layers; ++l) {
    LayerParams lp;
    lp.message = make_mlp(d + graph::kEdgeDim, d, d, rng);
    lp.update = make_mlp(2 * d, d, d, rng);
    p.layers.push_back(std::move(lp));
  }
  p.head = make_mlp(d, d, 1, rng);
  return p;
}

std::vector<ad::Tensor*> ModelParams::tensors() {
  std::vector<Tensor*> out = {&input_proj.w, &input_proj.b};
  for (LayerParams& l : layers) {
    for (Tensor* t : {&l.message.w1, &l.message.b1, &l.message.w2,
                      &l.message.b2, &l.update.w1, &l.update.b1, &l.update.w2,
                      &l.update.b2})
      out.push_back(t);
  }
  for (Tensor* t : {&head.w1, &head.b1, &head.w2, &head.b2}) out.push_back(t);
  return out;
}

std::vector<const ad::Tensor*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

std::vector<const ad::Tensor*> ModelParams::l1_tensors() const {
  std::vector<const Tensor*> out;
  for (const LayerParams& l : layers) {
    for (const Tensor* t : {&l.message.w1, &l.message.b1, &l.message.w2,
                            &l.message.b2, &l.update.w1, &l.update.b1,
                            &l.update.w2, &l.update.b2})
      out.push_back(t);
  }
  return out;
}

ForwardVars forward_on_tape(ad::Tape& tape, const graph::PolymerGraph& g,
                            const ModelParams& p, Aggregator agg) {
  if (g.num_nodes == 0) throw EmptyGraphError("forward on empty graph");

  ForwardVars fv;
  Var in_w = tape.input(p.input_proj.w, true);
  Var in_b = tape.input(p.input_proj.b, true);
  fv.param_vars = {in_w, in_b};

  std::vector<std::pair<MlpVars, MlpVars>> layer_vars;
  for (const LayerParams& l : p.layers) {
    MlpVars mv = register_mlp(tape, l.message, fv.param_vars);
    MlpVars uv = register_mlp(tape, l.update, fv.param_vars);
    layer_vars.emplace_back(mv, uv);
  }
  MlpVars head = register_mlp(tape, p.head, fv.param_vars);

  Tensor x(g.num_nodes, graph::kNodeDim);
  x.data = g.node_features;
  Var h = tape.add(tape.matmul(tape.input(x), in_w), in_b);

  // directed edge expansion
  std::vector<int> src, dst;
  src.reserve(2 * g.edges.size());
  for (const graph::Edge& e : g.edges) {
    src.push_back(e.u);
    dst.push_back(e.v);
    src.push_back(e.v);
    dst.push_back(e.u);
  }
  std::vector<std::vector<int>> incoming(g.num_nodes);
  for (size_t i = 0; i < dst.size(); ++i)
    incoming[dst[i]].push_back(static_cast<int>(i));

  Var efeat = tape.input(edge_feature_rows(g));
  ad::Tape::Reduce mode = agg == Aggregator::Max    ? ad::Tape::Reduce::Max
                          : agg == Aggregator::Mean ? ad::Tape::Reduce::Mean
                                                    : ad::Tape::Reduce::Sum;

  for (const auto& [mv, uv] : layer_vars) {
    Var m_agg;
    if (src.empty()) {
      m_agg = tape.input(Tensor(g.num_nodes, p.config.hidden_dim));
    } else {
      Var hsrc = tape.gather_rows(h, src);
      Var msg = apply_mlp(tape, mv, tape.concat_cols(hsrc, efeat));
      m_agg = tape.segment_reduce(msg, incoming, mode);
    }
    Var upd = apply_mlp(tape, uv, tape.concat_cols(h, m_agg));
    h = tape.add(h, upd);
  }

  Var hg;
  switch (p.config.readout) {
    case Readout::Max: hg = tape.rowwise_max_with_argmax(h); break;
    case Readout::Mean: hg = tape.rowwise_mean(h); break;
    case Readout::Sum: hg = tape.rowwise_sum(h); break;
  }
  Var yhat = apply_mlp(tape, head, hg);

  fv.node_embeddings = h;
  fv.graph_embedding = hg;
  fv.prediction = yhat;
  return fv;
}

Embeddings forward(const graph::PolymerGraph& g, const ModelParams& p,
                   Aggregator agg) {
  ad::Tape tape;
  ForwardVars fv = forward_on_tape(tape, g, p, agg);
  Embeddings e;
  e.node_embeddings = tape.value(fv.node_embeddings);
  e.graph_embedding = tape.value(fv.graph_embedding);
  e.prediction = tape.value(fv.prediction).data[0];
  for (double v : e.node_embeddings.data)
    if (!std::isfinite(v)) throw Error("non-finite node embedding");
  if (!std::isfinite(e.prediction)) throw Error("non-finite prediction");
  return e;
}

namespace {

double cosine(const Tensor& a, const Tensor& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a.data[i] * b.data[i];
    na += a.data[i] * a.data[i];
    nb += b.data[i] * b.data[i];
  }
  if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

std::vector<FamilyEmbedding> embed_family(const smiles::RepeatUnit& ru,
                                          const std::vector<int>& sizes,
                                          const ModelParams& p,
                                          Aggregator agg) {
  std::vector<FamilyEmbedding> out;
  for (int n : sizes) {
    FamilyEmbedding fe;
    fe.repeat_size = n;
    fe.emb = forward(graph::detail::assemble_chain(ru, n), p, agg);
    out.push_back(std::move(fe));
  }
  for (auto& fe : out)
    fe.cosine_to_first =
        cosine(fe.emb.graph_embedding, out.front().emb.graph_embedding);
  return out;
}

namespace {

nlohmann::ordered_json tensor_to_json(const Tensor& t) {
  nlohmann::ordered_json j;
  j["rows"] = t.rows;
  j["cols"] = t.cols;
  j["data"] = t.data;
  return j;
}

Tensor tensor_from_json(const nlohmann::json& j) {
  Tensor t(j.at("rows").get<int>(), j.at("cols").get<int>());
  t.data = j.at("data").get<std::vector<double>>();
  if (t.data.size() != static_cast<size_t>(t.rows) * t.cols)
    throw IoError("checkpoint tensor size mismatch");
  return t;
}

}  // namespace

std::string save_checkpoint(const ModelParams& p, Aggregator agg) {
  nlohmann::ordered_json j;
  j["format"] = "grin-checkpoint";
  j["version"] = 1;
  j["config"]["hidden_dim"] = p.config.hidden_dim;
  j["config"]["num_layers"] = p.config.num_layers;
  j["config"]["readout"] = to_string(p.config.readout);
  j["config"]["aggregator"] = to_string(agg);
  j["config"]["seed"] = p.config.seed;
  j["tensors"] = nlohmann::ordered_json::array();
  for (const Tensor* t : p.tensors()) j["tensors"].push_back(tensor_to_json(*t));
  return j.dump();
}

std::pair<ModelParams, Aggregator> load_checkpoint(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "grin-checkpoint")
    throw IoError("not a checkpoint file");
  ModelConfig cfg;
  cfg.hidden_dim = j.at("config").at("hidden_dim").get<int>();
  cfg.num_layers = j.at("config").at("num_layers").get<int>();
  cfg.readout = readout_from_string(j.at("config").at("readout").get<std::string>());
  cfg.seed = j.at("config").at("seed").get<std::uint64_t>();
  Aggregator agg =
      aggregator_from_string(j.at("config").at("aggregator").get<std::string>());
  ModelParams p = ModelParams::init(cfg);
  auto dst = p.tensors();
  const auto& src = j.at("tensors");
  if (src.size() != dst.size()) throw IoError("checkpoint tensor count mismatch");
  for (size_t i = 0; i < dst.size(); ++i) {
    Tensor t = tensor_from_json(src[i]);
    if (!t.same_shape(*dst[i])) throw IoError("checkpoint tensor shape mismatch");
    *dst[i] = std::move(t);
  }
  return {std::move(p), agg};
}

}  // namespace grin::model
