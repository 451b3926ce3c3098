// SPDX-License-Identifier: Apache-2.0
// Test-only oracles, independent of the library implementations they check.
#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <set>
#include <vector>

#include "grin/graph.hpp"
#include "grin/smiles.hpp"
#include "grin/theory.hpp"

namespace oracles {

// Exhaustive isomorphism with anchor roles preserved; fine for <= 12 atoms.
inline bool isomorphic(const grin::smiles::RepeatUnit& a,
                       const grin::smiles::RepeatUnit& b) {
  const size_t n = a.atoms.size();
  if (b.atoms.size() != n || a.bonds.size() != b.bonds.size()) return false;

  auto edge_set = [](const grin::smiles::RepeatUnit& r) {
    std::set<std::tuple<int, int, int>> s;
    for (const auto& e : r.bonds)
      s.insert({std::min(e.a, e.b), std::max(e.a, e.b),
                static_cast<int>(e.order)});
    return s;
  };
  auto bs = edge_set(b);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (size_t i = 0; i < n && ok; ++i) {
      const auto& aa = a.atoms[i];
      const auto& bb = b.atoms[perm[i]];
      if (aa.element != bb.element || aa.implicit_h != bb.implicit_h ||
          aa.formal_charge != bb.formal_charge)
        ok = false;
    }
    if (ok && (perm[a.anchor_in] != b.anchor_in ||
               perm[a.anchor_out] != b.anchor_out))
      ok = false;
    if (ok) {
      std::set<std::tuple<int, int, int>> mapped;
      for (const auto& e : a.bonds)
        mapped.insert({std::min(perm[e.a], perm[e.b]),
                       std::max(perm[e.a], perm[e.b]),
                       static_cast<int>(e.order)});
      if (mapped == bs) return true;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

// All-pairs shortest paths by Floyd-Warshall; diameter oracle.
inline int floyd_warshall_diameter(const grin::graph::PolymerGraph& g) {
  const int n = g.num_nodes;
  const int inf = 1 << 20;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& e : g.edges) d[e.u][e.v] = d[e.v][e.u] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  int best = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) best = std::max(best, d[i][j]);
  return best;
}

// Exhaustive maximum spanning tree weight over all edge subsets.
inline double brute_force_mst_weight(const grin::theory::WeightedGraph& g) {
  const int m = static_cast<int>(g.edges.size());
  const int n = g.num_nodes;
  double best = -1.0;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != n - 1) continue;
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    double w = 0.0;
    bool acyclic = true;
    for (int i = 0; i < m && acyclic; ++i) {
      if (!(mask & (1u << i))) continue;
      int a = find(g.edges[i].u);
      int b = find(g.edges[i].v);
      if (a == b)
        acyclic = false;
      else {
        parent[a] = b;
        w += g.edges[i].w;
      }
    }
    if (acyclic) best = std::max(best, w);
  }
  return best;
}

}  // namespace oracles
