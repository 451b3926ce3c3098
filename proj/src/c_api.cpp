// SPDX-License-Identifier: Apache-2.0
#include "grin/grin.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "grin/augment.hpp"
#include "grin/eval.hpp"
#include "grin/graph.hpp"
#include "grin/model.hpp"
#include "grin/smiles.hpp"
#include "grin/theory.hpp"
#include "grin/train.hpp"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

grin_status fail(grin_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename Fn>
grin_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    return fn();
  } catch (const grin::SyntaxError& e) {
    return fail(GRIN_ERR_SYNTAX, e.what());
  } catch (const grin::AnchorError& e) {
    return fail(GRIN_ERR_ANCHOR, e.what());
  } catch (const grin::ConnectivityError& e) {
    return fail(GRIN_ERR_CONNECTIVITY, e.what());
  } catch (const grin::DisconnectedError& e) {
    return fail(GRIN_ERR_CONNECTIVITY, e.what());
  } catch (const grin::ShapeError& e) {
    return fail(GRIN_ERR_SHAPE, e.what());
  } catch (const grin::IoError& e) {
    return fail(GRIN_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(GRIN_ERR_INTERNAL, e.what());
  }
}

grin_status copy_out(const std::string& s, char* buf, size_t buflen,
                     size_t* len) {
  if (len) *len = s.size();
  if (!buf) return GRIN_OK;
  if (buflen < s.size() + 1)
    return fail(GRIN_ERR_USAGE, "output buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GRIN_OK;
}

std::vector<int> parse_sizes(const std::string& csv) {
  std::vector<int> sizes;
  std::istringstream in(csv);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 1)
      throw grin::Error("bad repeat size '" + tok + "'");
    sizes.push_back(v);
  }
  if (sizes.empty()) throw grin::Error("empty size list");
  return sizes;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw grin::IoError("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw grin::IoError("cannot write " + path);
  f << content;
  if (!f) throw grin::IoError("write failed for " + path);
}

// key = value config lines; '#' starts a comment
std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw grin::IoError("bad config line '" + line + "'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::vector<grin::graph::PolymerGraph> load_jsonl(const std::string& path) {
  std::vector<grin::graph::PolymerGraph> out;
  std::ifstream f(path);
  if (!f) throw grin::IoError("cannot open " + path);
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    out.push_back(grin::graph::from_jsonl(line));
  }
  if (out.empty()) throw grin::IoError("no graphs in " + path);
  return out;
}

// Exhaustive maximum-spanning-tree weight, used by the mst theory verb.
double brute_force_max_spanning_weight(const grin::theory::WeightedGraph& g) {
  int m = static_cast<int>(g.edges.size());
  int n = g.num_nodes;
  if (n > 10 || m > 24) throw grin::Error("brute force limited to tiny graphs");
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (static_cast<int>(__builtin_popcount(mask)) != n - 1) continue;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    double w = 0.0;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      int a = find(g.edges[i].u), b = find(g.edges[i].v);
      if (a == b) ok = false;
      parent[a] = b;
      w += g.edges[i].w;
    }
    if (ok) best = std::max(best, w);
  }
  if (best < 0.0) throw grin::DisconnectedError("no spanning tree exists");
  return best;
}

grin::train::TrainConfig config_from_kv(
    const std::map<std::string, std::string>& kv) {
  grin::train::TrainConfig cfg;
  auto get = [&](const char* key, auto parse, auto& out) {
    auto it = kv.find(key);
    if (it != kv.end()) out = parse(it->second);
  };
  auto to_d = [](const std::string& s) { return std::stod(s); };
  auto to_i = [](const std::string& s) { return std::stoi(s); };
  auto to_u = [](const std::string& s) { return std::stoull(s); };
  get("lr", to_d, cfg.lr);
  get("batch_size", to_i, cfg.batch_size);
  get("max_epochs", to_i, cfg.max_epochs);
  get("patience", to_i, cfg.patience);
  get("l1_weight", to_d, cfg.l1_weight);
  get("l1_warmup_epochs", to_i, cfg.l1_warmup_epochs);
  get("hidden_dim", to_i, cfg.hidden_dim);
  get("num_layers", to_i, cfg.num_layers);
  std::uint64_t seed = cfg.seed;
  get("seed", to_u, seed);
  cfg.seed = seed;
  if (auto it = kv.find("aggregator"); it != kv.end())
    cfg.aggregator = grin::model::aggregator_from_string(it->second);
  if (auto it = kv.find("readout"); it != kv.end())
    cfg.readout = grin::model::readout_from_string(it->second);
  return cfg;
}

}  // namespace

struct grin_repeat_unit {
  grin::smiles::RepeatUnit ru;
};

struct grin_graph {
  grin::graph::PolymerGraph g;
};

extern "C" {

const char* grin_last_error(void) { return g_last_error.c_str(); }

uint32_t grin_api_version(void) { return 1; }

grin_status grin_parse_repeat_unit(const char* text, grin_repeat_unit** out) {
  if (!text || !out) return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = new grin_repeat_unit{grin::smiles::parse_repeat_unit(text)};
    return GRIN_OK;
  });
}

void grin_repeat_unit_free(grin_repeat_unit* ru) { delete ru; }

int grin_repeat_unit_num_atoms(const grin_repeat_unit* ru) {
  return ru ? static_cast<int>(ru->ru.atoms.size()) : 0;
}

int grin_repeat_unit_num_bonds(const grin_repeat_unit* ru) {
  return ru ? static_cast<int>(ru->ru.bonds.size()) : 0;
}

grin_status grin_canonical_text(const grin_repeat_unit* ru, char* buf,
                                size_t buflen, size_t* len) {
  if (!ru) return fail(GRIN_ERR_USAGE, "null repeat unit");
  return guarded([&] {
    return copy_out(grin::smiles::canonical_text(ru->ru), buf, buflen, len);
  });
}

grin_status grin_chain_repeat(const grin_repeat_unit* ru, int n,
                              grin_graph** out) {
  if (!ru || !out) return fail(GRIN_ERR_USAGE, "null argument");
  if (n < 1) return fail(GRIN_ERR_USAGE, "repeat count must be >= 1");
  return guarded([&] {
    *out = new grin_graph{grin::augment::chain_repeat(ru->ru, n)};
    return GRIN_OK;
  });
}

void grin_graph_free(grin_graph* g) { delete g; }

int grin_graph_num_nodes(const grin_graph* g) {
  return g ? g->g.num_nodes : 0;
}

int grin_graph_num_edges(const grin_graph* g) {
  return g ? static_cast<int>(g->g.edges.size()) : 0;
}

grin_status grin_graph_diameter(const grin_graph* g, int* out) {
  if (!g || !out) return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    *out = grin::graph::diameter(g->g);
    return GRIN_OK;
  });
}

grin_status grin_graph_to_json(const grin_graph* g, char* buf, size_t buflen,
                               size_t* len) {
  if (!g) return fail(GRIN_ERR_USAGE, "null graph");
  return guarded(
      [&] { return copy_out(grin::graph::to_jsonl(g->g), buf, buflen, len); });
}

grin_status grin_cmd_augment(const char* input_csv, const char* sizes_csv,
                             double ratio, uint64_t seed,
                             const char* out_path) {
  if (!input_csv || !sizes_csv || !out_path)
    return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    auto ingest = grin::eval::ingest_csv(input_csv);
    if (!ingest.errors.empty()) {
      std::ostringstream msg;
      msg << ingest.errors.size() << " malformed rows:";
      for (const auto& e : ingest.errors)
        msg << " line " << e.line << ": " << e.message << ";";
      // malformed rows are reported but valid rows proceed
      g_last_error = msg.str();
    }
    grin::augment::AugmentSpec spec;
    spec.repeat_sizes = parse_sizes(sizes_csv);
    std::sort(spec.repeat_sizes.begin(), spec.repeat_sizes.end());
    spec.merge_ratio = ratio;
    spec.seed = seed;
    auto graphs = grin::augment::build_training_set(ingest.samples, spec);
    std::ostringstream out;
    for (const auto& g : graphs) out << grin::graph::to_jsonl(g) << '\n';
    write_file(out_path, out.str());
    return GRIN_OK;
  });
}

grin_status grin_cmd_synth(int count, uint64_t seed, const char* out_csv) {
  if (!out_csv) return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    auto samples = grin::eval::synth_corpus(count, seed);
    std::ostringstream out;
    out << "smiles,value\n";
    out.precision(17);
    for (const auto& s : samples)
      out << s.unit.source_text << ',' << s.label << '\n';
    write_file(out_csv, out.str());
    return GRIN_OK;
  });
}

grin_status grin_cmd_train(const char* data_jsonl, const char* cfg_path,
                           const char* ckpt_out, const char* history_csv) {
  if (!data_jsonl || !cfg_path || !ckpt_out)
    return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    auto kv = parse_kv(read_file(cfg_path));
    auto cfg = config_from_kv(kv);
    double valid_frac = 0.1;
    if (auto it = kv.find("valid_frac"); it != kv.end())
      valid_frac = std::stod(it->second);
    if (!(valid_frac > 0.0 && valid_frac < 1.0))
      throw grin::Error("valid_frac must be in (0, 1)");

    auto graphs = load_jsonl(data_jsonl);
    std::vector<int> order(graphs.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed ^ 0xa5a5a5a5ULL);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_valid = std::max<size_t>(
        1, static_cast<size_t>(valid_frac * static_cast<double>(graphs.size())));
    if (n_valid >= graphs.size())
      throw grin::Error("dataset too small for the validation fraction");
    std::vector<grin::graph::PolymerGraph> train_set, valid_set;
    for (size_t i = 0; i < order.size(); ++i)
      (i < n_valid ? valid_set : train_set).push_back(graphs[order[i]]);

    auto result = grin::train::train(train_set, valid_set, cfg);
    write_file(ckpt_out,
               grin::model::save_checkpoint(result.params, cfg.aggregator));
    if (history_csv)
      write_file(history_csv, grin::train::history_csv(result.history));
    return GRIN_OK;
  });
}

grin_status grin_cmd_eval(const char* ckpt_path, const char* test_csv,
                          const char* sizes_csv, const char* report_json_out) {
  if (!ckpt_path || !test_csv || !sizes_csv || !report_json_out)
    return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    auto [params, agg] = grin::model::load_checkpoint(read_file(ckpt_path));
    auto ingest = grin::eval::ingest_csv(test_csv);
    auto sizes = parse_sizes(sizes_csv);
    auto report =
        grin::eval::sweep_eval(params, agg, ingest.samples, sizes);
    report.config_echo = grin::model::to_string(agg) + "/" +
                         grin::model::to_string(params.config.readout);
    report.seed = params.config.seed;
    write_file(report_json_out, grin::eval::report_json(report));
    return GRIN_OK;
  });
}

grin_status grin_cmd_embed(const char* ckpt_path, const char* ru_text,
                           const char* sizes_csv, const char* out_csv) {
  if (!ckpt_path || !ru_text || !sizes_csv || !out_csv)
    return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    auto [params, agg] = grin::model::load_checkpoint(read_file(ckpt_path));
    auto ru = grin::smiles::parse_repeat_unit(ru_text);
    auto sizes = parse_sizes(sizes_csv);
    auto fams = grin::model::embed_family(ru, sizes, params, agg);
    std::ostringstream out;
    out << "n,cosine_to_first,prediction";
    for (int j = 0; j < params.config.hidden_dim; ++j) out << ",e" << j;
    out << '\n';
    out.precision(17);
    for (const auto& fe : fams) {
      out << fe.repeat_size << ',' << fe.cosine_to_first << ','
          << fe.emb.prediction;
      for (double v : fe.emb.graph_embedding.data) out << ',' << v;
      out << '\n';
    }
    write_file(out_csv, out.str());
    return GRIN_OK;
  });
}

grin_status grin_cmd_verify_theory(const char* prop, const char* params_json,
                                   const char* report_json_out) {
  if (!prop || !report_json_out) return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&]() -> grin_status {
    nlohmann::json p = nlohmann::json::object();
    if (params_json && *params_json) {
      try {
        p = nlohmann::json::parse(params_json);
      } catch (const nlohmann::json::exception& e) {
        throw grin::IoError(std::string("bad params json: ") + e.what());
      }
    }
    nlohmann::ordered_json report;
    bool pass = false;
    std::string prop_name = prop;

    if (prop_name == "invariance") {
      int train_n = p.value("train_n", 3);
      int test_max = p.value("test_max", 100);
      double y_star = p.value("y_star", 1.0);
      double tol = p.value("tol", 1e-2);
      int seeds = p.value("seeds", 10);
      std::vector<int> test_sizes;
      for (int m = 2; m <= test_max; ++m) test_sizes.push_back(m);
      auto r = grin::theory::verify_latent_invariance(train_n, test_sizes,
                                                      y_star, tol, seeds);
      pass = r.pass;
      report["prop"] = "invariance";
      report["pass"] = r.pass;
      report["train_n"] = train_n;
      report["y_star"] = r.y_star;
      report["tol"] = r.tol;
      report["seeds_passed"] = r.seeds_passed;
      report["seeds_total"] = r.seeds_total;
      report["worst_deviation"] = r.worst_deviation;
      report["per_seed_deviation"] = r.per_seed_deviation;
      report["per_seed_fit_loss"] = r.per_seed_fit_loss;
    } else if (prop_name == "gradsum") {
      int n_min = p.value("n_min", 3);
      int n_max = p.value("n_max", 10);
      std::vector<double> ls = p.value("l_values",
                                       std::vector<double>{0.1, 0.5, 0.9});
      double delta = p.value("delta", 1.0);
      double rel_tol = p.value("rel_tol", 1e-6);
      pass = true;
      report["prop"] = "gradsum";
      // the error is injected once, at the final layer
      report["injection"] = "once-at-final-layer";
      report["cells"] = nlohmann::ordered_json::array();
      for (int n = n_min; n <= n_max; ++n)
        for (double l : ls) {
          auto r = grin::theory::verify_grad_sum(n, l, delta);
          double rel = std::abs(r.measured - r.closed_form) /
                       std::max(1e-300, std::abs(r.closed_form));
          bool cell_pass = rel <= rel_tol;
          pass = pass && cell_pass;
          nlohmann::ordered_json c;
          c["n"] = n;
          c["l"] = l;
          c["measured"] = r.measured;
          c["closed_form"] = r.closed_form;
          c["rel_error"] = rel;
          c["pass"] = cell_pass;
          report["cells"].push_back(std::move(c));
        }
      report["pass"] = pass;
    } else if (prop_name == "mst") {
      int instances = p.value("instances", 100);
      int max_nodes = p.value("max_nodes", 7);
      std::uint64_t seed = p.value("seed", 0);
      std::mt19937_64 rng(seed);
      int mismatches = 0;
      for (int it = 0; it < instances; ++it) {
        std::uniform_int_distribution<int> nd(3, max_nodes);
        int n = nd(rng);
        grin::theory::WeightedGraph g;
        g.num_nodes = n;
        // random spanning tree first, then extra edges
        for (int v = 1; v < n; ++v) {
          std::uniform_int_distribution<int> pd(0, v - 1);
          g.edges.push_back({pd(rng), v, 0.0});
        }
        std::uniform_int_distribution<int> extra(0, n);
        int extras = extra(rng);
        for (int e = 0; e < extras; ++e) {
          std::uniform_int_distribution<int> vd(0, n - 1);
          int a = vd(rng), b = vd(rng);
          if (a == b) continue;
          bool dup = false;
          for (const auto& ed : g.edges)
            if ((ed.u == a && ed.v == b) || (ed.u == b && ed.v == a))
              dup = true;
          if (!dup) g.edges.push_back({a, b, 0.0});
        }
        // distinct weights
        std::vector<double> ws(g.edges.size());
        std::iota(ws.begin(), ws.end(), 1.0);
        std::shuffle(ws.begin(), ws.end(), rng);
        for (size_t i = 0; i < g.edges.size(); ++i) g.edges[i].w = ws[i];

        auto tree = grin::theory::prim_mst(g, 0);
        double got = grin::theory::tree_weight(g, tree);
        double want = brute_force_max_spanning_weight(g);
        if (std::abs(got - want) > 1e-9) ++mismatches;
      }
      pass = mismatches == 0;
      report["prop"] = "mst";
      report["pass"] = pass;
      report["instances"] = instances;
      report["mismatches"] = mismatches;
      report["seed"] = seed;
    } else {
      return fail(GRIN_ERR_USAGE, "unknown property '" + prop_name + "'");
    }

    write_file(report_json_out, report.dump(2));
    if (!pass)
      return fail(GRIN_ERR_CHECK_FAILED,
                  "property '" + prop_name + "' did not hold");
    return GRIN_OK;
  });
}

grin_status grin_cmd_mst(const char* graph_json_path, int start,
                         const char* out_json) {
  if (!graph_json_path || !out_json)
    return fail(GRIN_ERR_USAGE, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_file(graph_json_path));
    } catch (const nlohmann::json::exception& e) {
      throw grin::IoError(std::string("bad graph json: ") + e.what());
    }
    grin::theory::WeightedGraph g;
    g.num_nodes = j.at("n").get<int>();
    for (const auto& e : j.at("edges"))
      g.edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(),
                         e.at(2).get<double>()});
    auto tree = grin::theory::prim_mst(g, start);
    nlohmann::ordered_json out;
    out["start"] = start;
    out["tree_weight"] = grin::theory::tree_weight(g, tree);
    out["edges"] = nlohmann::ordered_json::array();
    for (int id : tree)
      out["edges"].push_back({g.edges[id].u, g.edges[id].v, g.edges[id].w});
    write_file(out_json, out.dump(2));
    return GRIN_OK;
  });
}

grin_status grin_cmd_gradcheck(int trials, uint64_t seed, double rel_tol,
                               char* summary, size_t summary_len) {
  return guarded([&]() -> grin_status {
    if (trials < 1) return fail(GRIN_ERR_USAGE, "trials must be >= 1");
    auto units = grin::eval::synth_corpus(std::max(trials, 10), seed);
    double worst = 0.0;
    int failures = 0;
    for (int trial = 0; trial < trials; ++trial) {
      grin::model::ModelConfig mc;
      mc.hidden_dim = 6;
      mc.num_layers = 2;
      mc.readout = grin::model::Readout::Max;
      mc.seed = seed + trial;
      auto params = grin::model::ModelParams::init(mc);
      auto g = grin::augment::chain_repeat(units[trial].unit,
                                           1 + (trial % 3));
      g.label = units[trial].label;

      // analytic gradients
      grin::ad::Tape tape;
      auto fv = grin::model::forward_on_tape(tape, g, params,
                                             grin::model::Aggregator::Max);
      auto target = tape.input(grin::ad::Tensor::scalar(*g.label));
      auto loss = tape.mse(fv.prediction, target);
      tape.backward(loss);
      std::vector<grin::ad::Tensor> analytic;
      for (auto v : fv.param_vars) analytic.push_back(tape.grad(v));

      // central finite differences on a random subset of parameters
      auto ptrs = params.tensors();
      std::mt19937_64 rng(seed * 977 + trial);
      auto loss_at = [&]() {
        auto e = grin::model::forward(g, params, grin::model::Aggregator::Max);
        double d = e.prediction - *g.label;
        return d * d;
      };
      const double h = 1e-6;
      for (int probe = 0; probe < 20; ++probe) {
        std::uniform_int_distribution<size_t> td(0, ptrs.size() - 1);
        size_t ti = td(rng);
        std::uniform_int_distribution<size_t> kd(0, ptrs[ti]->size() - 1);
        size_t k = kd(rng);
        double saved = ptrs[ti]->data[k];
        ptrs[ti]->data[k] = saved + h;
        double lp = loss_at();
        ptrs[ti]->data[k] = saved - h;
        double lm = loss_at();
        ptrs[ti]->data[k] = saved;
        double fd = (lp - lm) / (2 * h);
        double an = analytic[ti].data[k];
        double rel = std::abs(fd - an) / std::max(1.0, std::abs(an));
        worst = std::max(worst, rel);
        if (rel > rel_tol) ++failures;
      }
    }
    std::ostringstream msg;
    msg << "trials=" << trials << " worst_rel=" << worst
        << " failures=" << failures;
    if (summary && summary_len > 0) {
      std::string s = msg.str();
      std::strncpy(summary, s.c_str(), summary_len - 1);
      summary[summary_len - 1] = '\0';
    }
    if (failures > 0) return fail(GRIN_ERR_CHECK_FAILED, msg.str());
    return GRIN_OK;
  });
}

}  // extern "C"
