// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "grin/errors.hpp"
#include "grin/smiles.hpp"

namespace grin::graph {

enum class EdgeKind : std::uint8_t { Single = 0, Double = 1, Triple = 2, InterUnit = 3 };

struct Edge {
  int u = 0;  // u < v
  int v = 0;
  EdgeKind kind = EdgeKind::Single;
};

// Node feature layout (kNodeDim columns):
//   [0..10]  element one-hot, order B,C,N,O,P,S,F,Cl,Br,I,*
//   [11]     anchor flag
//   [12..16] degree bucket one-hot {0,1,2,3,>=4}
//   [17..21] implicit-H bucket one-hot {0,1,2,3,>=4}
inline constexpr int kNodeDim = 22;
inline constexpr int kEdgeDim = 4;  // one-hot over EdgeKind

struct PolymerGraph {
  int num_nodes = 0;
  std::vector<double> node_features;  // num_nodes x kNodeDim, row-major
  std::vector<Edge> edges;            // undirected, stored once, u < v
  int repeat_count = 1;
  int unit_size = 0;
  std::optional<double> label;

  // raw per-node attributes kept for serialization
  std::vector<std::string> elements;
  std::vector<int> implicit_h;

  double feature(int node, int col) const {
    return node_features[static_cast<size_t>(node) * kNodeDim + col];
  }
  int degree(int node) const;
  std::vector<std::vector<int>> adjacency() const;
};

struct GraphStats {
  int num_nodes = 0;
  int num_edges = 0;
  int diameter = 0;
};

int element_index(const std::string& el);

// Single-unit featurization; equals chain_repeat(ru, 1).
PolymerGraph featurize(const smiles::RepeatUnit& ru);

// Exact unweighted diameter via all-pairs BFS. Throws DisconnectedError.
int diameter(const PolymerGraph& g);

GraphStats stats(const PolymerGraph& g);

namespace detail {
// n disjoint copies of the unit linked v_out(i) -> v_in(i+1) by inter-unit
// edges; node features recomputed on the assembled graph. Backs both
// featurize (n=1) and augment::chain_repeat.
PolymerGraph assemble_chain(const smiles::RepeatUnit& ru, int n);
}  // namespace detail

// JSON Lines interchange, key order {nodes, edges, n, unit_size, label}.
std::string to_jsonl(const PolymerGraph& g);
PolymerGraph from_jsonl(const std::string& line);

}  // namespace grin::graph
