// SPDX-License-Identifier: Apache-2.0
#include "grin/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace grin::theory {

namespace {

using ad::Tensor;
using ad::Var;

double spectral_norm(const Tensor& m) {
  // power iteration; matrices here are tiny
  std::vector<double> v(m.cols, 1.0 / std::sqrt(m.cols));
  double norm = 0.0;
  for (int it = 0; it < 200; ++it) {
    std::vector<double> mv(m.rows, 0.0);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) mv[i] += m.at(i, j) * v[j];
    std::vector<double> mtmv(m.cols, 0.0);
    for (int i = 0; i < m.rows; ++i)
      for (int j = 0; j < m.cols; ++j) mtmv[j] += m.at(i, j) * mv[i];
    double len = 0.0;
    for (double x : mtmv) len += x * x;
    len = std::sqrt(len);
    if (len == 0.0) return 0.0;
    for (size_t j = 0; j < v.size(); ++j) v[j] = mtmv[j] / len;
    norm = std::sqrt(len);
  }
  return norm;
}

}  // namespace

std::vector<int> prim_mst(const WeightedGraph& g, int start) {
  if (g.num_nodes <= 0) throw Error("empty graph");
  if (start < 0 || start >= g.num_nodes) throw Error("bad start node");
  for (const auto& e : g.edges) {
    if (e.u == e.v) throw Error("self-loop in weighted graph");
    if (e.w <= 0.0) throw Error("edge weights must be positive");
  }
  std::vector<std::vector<std::pair<int, int>>> adj(g.num_nodes);  // (nbr, eid)
  for (size_t i = 0; i < g.edges.size(); ++i) {
    adj[g.edges[i].u].push_back({g.edges[i].v, static_cast<int>(i)});
    adj[g.edges[i].v].push_back({g.edges[i].u, static_cast<int>(i)});
  }

  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<bool> in_tree(g.num_nodes, false);
  std::vector<double> attach_score(g.num_nodes, kNone);  // a_v
  std::vector<int> attach_edge(g.num_nodes, -1);
  std::vector<int> attach_from(g.num_nodes, -1);

  auto relax = [&](int v) {
    for (auto [u, eid] : adj[v]) {
      if (in_tree[u]) continue;
      double w = g.edges[eid].w;
      if (w > attach_score[u] ||
          (w == attach_score[u] && v < attach_from[u])) {
        attach_score[u] = w;
        attach_edge[u] = eid;
        attach_from[u] = v;
      }
    }
  };

  std::vector<int> tree_edges;
  in_tree[start] = true;
  relax(start);
  for (int step = 1; step < g.num_nodes; ++step) {
    int best = -1;
    for (int v = 0; v < g.num_nodes; ++v) {
      if (in_tree[v] || attach_score[v] == kNone) continue;
      if (best < 0 || attach_score[v] > attach_score[best]) best = v;
      // ties keep the smaller node index: the scan order does that
    }
    if (best < 0) throw DisconnectedError("weighted graph is not connected");
    in_tree[best] = true;
    tree_edges.push_back(attach_edge[best]);
    relax(best);
  }
  return tree_edges;
}

double tree_weight(const WeightedGraph& g, const std::vector<int>& edge_ids) {
  double s = 0.0;
  for (int id : edge_ids) s += g.edges[id].w;
  return s;
}

Hyperchain contract(const graph::PolymerGraph& g) {
  if (g.unit_size <= 0 || g.num_nodes % g.unit_size != 0)
    throw MalformedError("graph was not built from whole repeat units");
  int n = g.num_nodes / g.unit_size;
  if (n != g.repeat_count)
    throw MalformedError("repeat_count does not match node count");

  std::set<std::pair<int, int>> chain_edges;
  for (const auto& e : g.edges) {
    if (e.kind != graph::EdgeKind::InterUnit) continue;
    int su = e.u / g.unit_size;
    int sv = e.v / g.unit_size;
    if (su == sv) throw MalformedError("inter-unit edge inside one unit");
    auto key = std::minmax(su, sv);
    if (!chain_edges.insert({key.first, key.second}).second)
      throw MalformedError("duplicate inter-unit edge between supernodes");
  }
  std::set<std::pair<int, int>> expected;
  for (int i = 0; i + 1 < n; ++i) expected.insert({i, i + 1});
  if (chain_edges != expected)
    throw MalformedError("inter-unit edges do not form a simple path");

  Hyperchain c;
  c.length = n;
  c.hyperdegree.assign(n, 2);
  if (n == 1) {
    c.hyperdegree[0] = 0;
  } else {
    c.hyperdegree.front() = 1;
    c.hyperdegree.back() = 1;
  }
  return c;
}

ContractionNet ContractionNet::exact_contraction(int dim, double l_lip) {
  if (!(l_lip > 0.0 && l_lip < 1.0))
    throw ConstructionError("l_lip must be in (0, 1)");
  ContractionNet net;
  net.dim = dim;
  net.l_lip = l_lip;
  net.msg_w = Tensor(dim, dim);
  net.upd_h_w = Tensor(dim, dim);
  net.upd_m_w = Tensor(dim, dim);
  for (int i = 0; i < dim; ++i) {
    net.msg_w.at(i, i) = l_lip;
    net.upd_m_w.at(i, i) = 1.0;
  }
  net.check();
  return net;
}

void ContractionNet::check() const {
  for (double x : msg_w.data)
    if (x < 0.0)
      throw ConstructionError("message weights must be non-negative");
  // composed per-layer map along the message path: h -> h W_m W_u
  Tensor comp(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k)
        comp.at(i, j) += msg_w.at(i, k) * upd_m_w.at(k, j);
  if (spectral_norm(comp) > l_lip * (1.0 + 1e-9))
    throw ConstructionError("per-layer contraction bound violated");
}

ad::Tensor hyperchain_forward(const Hyperchain& c, const ContractionNet& net,
                              int layers, const std::vector<ad::Tensor>& init) {
  if (layers < 1) throw Error("layers must be >= 1");
  const int n = c.length;
  const int d = net.dim;

  Tensor h(n, d, 1.0);
  if (!init.empty()) {
    if (static_cast<int>(init.size()) != n)
      throw ShapeError("init must have one row per supernode");
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) h.at(i, j) = init[i].at(0, j);
  }

  auto apply = [&](const Tensor& x, const Tensor& w, int row) {
    std::vector<double> out(d, 0.0);
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) out[j] += x.at(row, k) * w.at(k, j);
    return out;
  };

  for (int t = 0; t < layers; ++t) {
    Tensor next(n, d);
    for (int i = 0; i < n; ++i) {
      std::vector<double> m(d, 0.0);
      if (c.hyperdegree[i] > 0) {
        bool first = true;
        for (int j : {i - 1, i + 1}) {
          if (j < 0 || j >= n) continue;
          auto msg = apply(h, net.msg_w, j);
          if (first) {
            m = msg;
            first = false;
          } else {
            for (int k = 0; k < d; ++k) m[k] = std::max(m[k], msg[k]);
          }
        }
      }
      auto hh = apply(h, net.upd_h_w, i);
      for (int j = 0; j < d; ++j) {
        double mm = 0.0;
        for (int k = 0; k < d; ++k) mm += m[k] * net.upd_m_w.at(k, j);
        next.at(i, j) = hh[j] + mm;
      }
    }
    h = std::move(next);
  }
  return h;
}

namespace {

// Trainable hyperchain net used by the invariance check: MLP message and
// update maps over dim-4 embeddings, mean readout, linear head.
struct ChainNet {
  static constexpr int kDim = 4;
  static constexpr int kHidden = 8;
  static constexpr int kLayers = 2;

  Tensor msg_w1, msg_b1, msg_w2, msg_b2;
  Tensor upd_w1, upd_b1, upd_w2, upd_b2;
  Tensor head_w, head_b;

  static ChainNet init(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto glorot = [&](int r, int c) {
      double lim = std::sqrt(6.0 / (r + c));
      std::uniform_real_distribution<double> dist(-lim, lim);
      Tensor t(r, c);
      for (double& x : t.data) x = dist(rng);
      return t;
    };
    ChainNet n;
    n.msg_w1 = glorot(kDim, kHidden);
    n.msg_b1 = Tensor(1, kHidden);
    n.msg_w2 = glorot(kHidden, kDim);
    n.msg_b2 = Tensor(1, kDim);
    n.upd_w1 = glorot(2 * kDim, kHidden);
    n.upd_b1 = Tensor(1, kHidden);
    n.upd_w2 = glorot(kHidden, kDim);
    n.upd_b2 = Tensor(1, kDim);
    n.head_w = glorot(kDim, 1);
    n.head_b = Tensor(1, 1);
    return n;
  }

  std::vector<Tensor*> tensors() {
    return {&msg_w1, &msg_b1, &msg_w2, &msg_b2, &upd_w1, &upd_b1,
            &upd_w2, &upd_b2, &head_w, &head_b};
  }
};

struct ChainNetVars {
  std::vector<Var> params;
};

Var chain_forward_on_tape(ad::Tape& t, const ChainNetVars& v, int n) {
  const auto& p = v.params;
  Var msg_w1 = p[0], msg_b1 = p[1], msg_w2 = p[2], msg_b2 = p[3];
  Var upd_w1 = p[4], upd_b1 = p[5], upd_w2 = p[6], upd_b2 = p[7];
  Var head_w = p[8], head_b = p[9];

  Var h = t.input(Tensor(n, ChainNet::kDim, 1.0));
  for (int layer = 0; layer < ChainNet::kLayers; ++layer) {
    Var msg_all = t.add(
        t.matmul(t.relu(t.add(t.matmul(h, msg_w1), msg_b1)), msg_w2), msg_b2);
    std::vector<std::vector<int>> groups(n);
    for (int i = 0; i < n; ++i) {
      if (i - 1 >= 0) groups[i].push_back(i - 1);
      if (i + 1 < n) groups[i].push_back(i + 1);
    }
    Var m = t.segment_reduce(msg_all, groups, ad::Tape::Reduce::Max);
    Var cat = t.concat_cols(h, m);
    h = t.add(t.matmul(t.relu(t.add(t.matmul(cat, upd_w1), upd_b1)), upd_w2),
              upd_b2);
  }
  Var pooled = t.rowwise_mean(h);
  return t.add(t.matmul(pooled, head_w), head_b);
}

double chain_predict(ChainNet& net, int n) {
  ad::Tape t;
  ChainNetVars v;
  for (Tensor* p : net.tensors()) v.params.push_back(t.input(*p, false));
  return t.value(chain_forward_on_tape(t, v, n)).data[0];
}

}  // namespace

InvarianceReport verify_latent_invariance(int train_n,
                                          const std::vector<int>& test_sizes,
                                          double y_star, double tol,
                                          int num_seeds, double fit_threshold) {
  if (train_n < 2) throw Error("train_n must be >= 2");
  constexpr double kLambda = 1e-5;
  constexpr int kMaxSteps = 5000;

  InvarianceReport report;
  report.seeds_total = num_seeds;
  report.y_star = y_star;
  report.tol = tol;

  for (int seed = 0; seed < num_seeds; ++seed) {
    ChainNet net = ChainNet::init(static_cast<std::uint64_t>(seed) * 7919 + 1);
    auto params = net.tensors();
    ad::AdamState adam;

    double fit = std::numeric_limits<double>::infinity();
    for (int step = 0; step < kMaxSteps && fit > fit_threshold; ++step) {
      ad::Tape t;
      ChainNetVars v;
      for (Tensor* p : params) v.params.push_back(t.input(*p, true));
      Var f1 = chain_forward_on_tape(t, v, 1);
      Var fn = chain_forward_on_tape(t, v, train_n);
      Var ys = t.input(Tensor::scalar(y_star));
      Var d1 = t.sub(f1, ys);
      Var dn = t.sub(fn, ys);
      Var fit_loss = t.add(t.mse(d1, t.input(Tensor::scalar(0.0))),
                           t.mse(dn, t.input(Tensor::scalar(0.0))));
      Var l1 = t.input(Tensor::scalar(0.0));
      for (Var pv : v.params) l1 = t.add(l1, t.l1_norm(pv));
      Var total = t.add(fit_loss, t.scale(l1, kLambda));
      t.backward(total);
      std::vector<Tensor> grads;
      for (Var pv : v.params) grads.push_back(t.grad(pv));
      ad::adam_step(params, grads, adam, 1e-2);
      fit = t.value(fit_loss).data[0];
    }
    report.per_seed_fit_loss.push_back(fit);

    if (!(fit <= fit_threshold)) {
      report.per_seed_deviation.push_back(
          std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double dev = 0.0;
    for (int m : test_sizes)
      dev = std::max(dev, std::abs(chain_predict(net, m) - y_star));
    report.per_seed_deviation.push_back(dev);
    if (dev <= tol) ++report.seeds_passed;
    report.worst_deviation = std::max(report.worst_deviation, dev);
  }
  report.pass = report.seeds_passed >= (num_seeds * 8 + 9) / 10;
  return report;
}

GradSumResult verify_grad_sum(int n, double l_lip, double delta) {
  if (n < 3) throw Error("n must be >= 3");
  ContractionNet net = ContractionNet::exact_contraction(1, l_lip);

  const int layers = n - 2;
  ad::Tape t;
  // strictly increasing initial embeddings force rightward max routing
  std::vector<Var> h;
  for (int i = 0; i < n; ++i)
    h.push_back(t.input(Tensor::scalar(2.0 + i), true));
  std::vector<std::vector<Var>> all_layers = {h};
  for (int layer = 0; layer < layers; ++layer) {
    std::vector<Var> next;
    for (int i = 0; i < n; ++i) {
      std::vector<Var> msgs;
      for (int j : {i - 1, i + 1}) {
        if (j < 0 || j >= n) continue;
        msgs.push_back(t.scale(h[j], net.msg_w.data[0]));
      }
      Var m = msgs.size() == 1 ? msgs[0]
                               : t.rowwise_max_with_argmax(t.stack_rows(msgs));
      next.push_back(t.scale(m, net.upd_m_w.data[0]));
    }
    all_layers.push_back(next);
    h = std::move(next);
  }

  // inject an error of norm delta at the degree-2 supernode s_2 (index 1)
  Var loss = t.scale(h[1], delta);
  t.backward(loss);

  double measured = 0.0;
  for (int layer = 0; layer < layers; ++layer)  // all pre-final layers
    for (int i = 0; i < n; ++i)
      measured += std::abs(t.grad(all_layers[layer][i]).data[0]);

  GradSumResult r;
  r.measured = measured;
  r.closed_form = delta * l_lip * (1.0 - std::pow(l_lip, n - 2)) / (1.0 - l_lip);
  return r;
}

}  // namespace grin::theory
