// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "grin/autodiff.hpp"
#include "grin/graph.hpp"

namespace grin::theory {

// Undirected weighted graph for spanning-tree work. Weights positive.
struct WeightedGraph {
  int num_nodes = 0;
  struct WEdge {
    int u = 0;
    int v = 0;
    double w = 0.0;
  };
  std::vector<WEdge> edges;
};

// Maximum spanning tree via the greedy attach recurrence: maintain per-node
// best attachment score a_v over the grown tree, attach the argmax each
// step. Ties break toward the smaller node index. Returns n-1 edge indices.
std::vector<int> prim_mst(const WeightedGraph& g, int start);

double tree_weight(const WeightedGraph& g, const std::vector<int>& edge_ids);

struct Hyperchain {
  int length = 0;                 // n supernodes
  std::vector<int> hyperdegree;   // 0 for n=1; 1 at ends; 2 inside
  // chain edges are implicitly {s_i, s_i+1}
};

// Contract each repeat unit of a chain-built graph to a supernode, keeping
// only inter-unit edges. MalformedError if those edges are not the path.
Hyperchain contract(const graph::PolymerGraph& g);

// Shared linear message/update maps with a per-layer contraction bound:
//   m = h W_m,  h' = h W_h + m W_u
// The composed per-layer operator norm along the message path must be
// <= l_lip (checked at construction).
struct ContractionNet {
  int dim = 1;
  ad::Tensor msg_w;     // dim x dim
  ad::Tensor upd_h_w;   // dim x dim
  ad::Tensor upd_m_w;   // dim x dim
  double l_lip = 0.5;

  // msg_w scaled to operator norm l_lip, upd_m_w = identity, upd_h_w = 0,
  // all entries non-negative: the max branch is weight-transparent and each
  // layer contracts by exactly l_lip.
  static ContractionNet exact_contraction(int dim, double l_lip);

  void check() const;  // throws ConstructionError
};

// Layer-wise hyperchain message passing: deg-0 supernodes use m = 0,
// otherwise element-wise max over neighbor messages; h' = U(h, m).
// Returns per-supernode embeddings after T layers (n x dim).
ad::Tensor hyperchain_forward(const Hyperchain& c, const ContractionNet& net,
                              int layers,
                              const std::vector<ad::Tensor>& init = {});

struct InvarianceReport {
  bool pass = false;
  int seeds_passed = 0;
  int seeds_total = 0;
  double worst_deviation = 0.0;  // max over test sizes, worst passing seed set
  std::vector<double> per_seed_deviation;
  std::vector<double> per_seed_fit_loss;
  double y_star = 0.0;
  double tol = 0.0;
};

// Trains a small trainable hyperchain net on {P_1, P_n} with a shared
// target, then measures max_m |f(P_m) - y*| over test sizes.
InvarianceReport verify_latent_invariance(int train_n,
                                          const std::vector<int>& test_sizes,
                                          double y_star, double tol,
                                          int num_seeds = 10,
                                          double fit_threshold = 1e-6);

struct GradSumResult {
  double measured = 0.0;
  double closed_form = 0.0;  // delta * L * (1 - L^(n-2)) / (1 - L)
};

// Backprop-norm accumulation on P_n under an exact-contraction scalar net:
// error of norm delta injected once at the final layer at a hyperdegree-2
// supernode, routing constructed so the gradient walks the chain.
GradSumResult verify_grad_sum(int n, double l_lip, double delta);

}  // namespace grin::theory
