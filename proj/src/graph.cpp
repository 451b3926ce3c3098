// SPDX-License-Identifier: Apache-2.0
#include "grin/graph.hpp"

#include <algorithm>
#include <array>
#include <deque>

#include "json.hpp"

namespace grin::graph {

namespace {

const std::array<std::string, 11> kElementOrder = {
    "B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "*"};

const std::array<std::string, 4> kEdgeKindName = {"single", "double", "triple",
                                                 "inter"};

int bucket(int x) { return std::min(x, 4); }

void fill_node_features(PolymerGraph& g) {
  g.node_features.assign(static_cast<size_t>(g.num_nodes) * kNodeDim, 0.0);
  for (int v = 0; v < g.num_nodes; ++v) {
    double* row = &g.node_features[static_cast<size_t>(v) * kNodeDim];
    int ei = element_index(g.elements[v]);
    row[ei] = 1.0;
    if (g.elements[v] == "*") row[11] = 1.0;
    row[12 + bucket(g.degree(v))] = 1.0;
    row[17 + bucket(g.implicit_h[v])] = 1.0;
  }
}

}  // namespace

int element_index(const std::string& el) {
  for (size_t i = 0; i < kElementOrder.size(); ++i)
    if (kElementOrder[i] == el) return static_cast<int>(i);
  throw Error("unknown element '" + el + "'");
}

int PolymerGraph::degree(int node) const {
  int d = 0;
  for (const Edge& e : edges)
    if (e.u == node || e.v == node) ++d;
  return d;
}

std::vector<std::vector<int>> PolymerGraph::adjacency() const {
  std::vector<std::vector<int>> adj(num_nodes);
  for (const Edge& e : edges) {
    adj[e.u].push_back(e.v);
    adj[e.v].push_back(e.u);
  }
  for (auto& nb : adj) std::sort(nb.begin(), nb.end());
  return adj;
}

namespace detail {

PolymerGraph assemble_chain(const smiles::RepeatUnit& ru, int n) {
  if (n < 1) throw Error("repeat count must be >= 1");
  const int m = static_cast<int>(ru.atoms.size());

  PolymerGraph g;
  g.num_nodes = n * m;
  g.repeat_count = n;
  g.unit_size = m;
  g.elements.reserve(g.num_nodes);
  g.implicit_h.reserve(g.num_nodes);
  for (int i = 0; i < n; ++i)
    for (const auto& a : ru.atoms) {
      g.elements.push_back(a.element);
      g.implicit_h.push_back(a.implicit_h);
    }
  for (int i = 0; i < n; ++i) {
    int off = i * m;
    for (const auto& b : ru.bonds) {
      Edge e;
      e.u = std::min(b.a, b.b) + off;
      e.v = std::max(b.a, b.b) + off;
      e.kind = b.order == smiles::BondOrder::Single   ? EdgeKind::Single
               : b.order == smiles::BondOrder::Double ? EdgeKind::Double
                                                      : EdgeKind::Triple;
      g.edges.push_back(e);
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    int a = ru.anchor_out + i * m;
    int b = ru.anchor_in + (i + 1) * m;
    Edge e;
    e.u = std::min(a, b);
    e.v = std::max(a, b);
    e.kind = EdgeKind::InterUnit;
    g.edges.push_back(e);
  }
  fill_node_features(g);
  return g;
}

}  // namespace detail

PolymerGraph featurize(const smiles::RepeatUnit& ru) {
  return detail::assemble_chain(ru, 1);
}

int diameter(const PolymerGraph& g) {
  if (g.num_nodes <= 1) return 0;
  auto adj = g.adjacency();
  int best = 0;
  std::vector<int> dist(g.num_nodes);
  for (int s = 0; s < g.num_nodes; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::deque<int> q = {s};
    dist[s] = 0;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int u : adj[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push_back(u);
        }
    }
    for (int d : dist) {
      if (d < 0) throw DisconnectedError("graph is not connected");
      best = std::max(best, d);
    }
  }
  return best;
}

GraphStats stats(const PolymerGraph& g) {
  return {g.num_nodes, static_cast<int>(g.edges.size()), diameter(g)};
}

std::string to_jsonl(const PolymerGraph& g) {
  nlohmann::ordered_json j;
  j["nodes"] = nlohmann::ordered_json::array();
  for (int v = 0; v < g.num_nodes; ++v) {
    nlohmann::ordered_json node;
    node["el"] = g.elements[v];
    node["anchor"] = g.elements[v] == "*" ? 1 : 0;
    node["deg"] = g.degree(v);
    node["hs"] = g.implicit_h[v];
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = nlohmann::ordered_json::array();
  for (const Edge& e : g.edges)
    j["edges"].push_back({e.u, e.v, kEdgeKindName[static_cast<int>(e.kind)]});
  j["n"] = g.repeat_count;
  j["unit_size"] = g.unit_size;
  if (g.label)
    j["label"] = *g.label;
  else
    j["label"] = nullptr;
  return j.dump();
}

PolymerGraph from_jsonl(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad graph record: ") + e.what());
  }
  PolymerGraph g;
  g.num_nodes = static_cast<int>(j.at("nodes").size());
  for (const auto& node : j.at("nodes")) {
    g.elements.push_back(node.at("el").get<std::string>());
    g.implicit_h.push_back(node.at("hs").get<int>());
  }
  for (const auto& e : j.at("edges")) {
    Edge edge;
    edge.u = e.at(0).get<int>();
    edge.v = e.at(1).get<int>();
    std::string kind = e.at(2).get<std::string>();
    auto it = std::find(kEdgeKindName.begin(), kEdgeKindName.end(), kind);
    if (it == kEdgeKindName.end()) throw IoError("bad edge kind '" + kind + "'");
    edge.kind = static_cast<EdgeKind>(it - kEdgeKindName.begin());
    if (edge.u >= edge.v || edge.v >= g.num_nodes)
      throw IoError("bad edge endpoints in graph record");
    g.edges.push_back(edge);
  }
  g.repeat_count = j.at("n").get<int>();
  g.unit_size = j.at("unit_size").get<int>();
  if (!j.at("label").is_null()) g.label = j.at("label").get<double>();
  fill_node_features(g);
  return g;
}

}  // namespace grin::graph
