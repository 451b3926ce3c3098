// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grin/autodiff.hpp"
#include "grin/graph.hpp"

namespace grin::model {

enum class Aggregator { Max, Mean, Sum };
enum class Readout { Max, Mean, Sum };

Aggregator aggregator_from_string(const std::string& s);
Readout readout_from_string(const std::string& s);
std::string to_string(Aggregator a);
std::string to_string(Readout r);

// One-hidden-layer MLP with ReLU: y = relu(x W1 + b1) W2 + b2.
struct Mlp {
  ad::Tensor w1, b1, w2, b2;
};

struct Linear {
  ad::Tensor w, b;
};

struct LayerParams {
  Mlp message;  // [h_u || e_uv] -> d
  Mlp update;   // [h_v || m_v] -> d
};

struct ModelConfig {
  int hidden_dim = 64;
  int num_layers = 3;
  Readout readout = Readout::Max;
  std::uint64_t seed = 0;
};

struct ModelParams {
  ModelConfig config;
  Linear input_proj;  // kNodeDim -> d
  std::vector<LayerParams> layers;
  Mlp head;  // d -> 1

  static ModelParams init(const ModelConfig& cfg);

  // All tensors, in a fixed order (input_proj, layers, head).
  std::vector<ad::Tensor*> tensors();
  std::vector<const ad::Tensor*> tensors() const;
  // Message/update MLP tensors only: the l1 penalty scope.
  std::vector<const ad::Tensor*> l1_tensors() const;
};

struct Embeddings {
  ad::Tensor node_embeddings;  // N x d
  ad::Tensor graph_embedding;  // 1 x d
  double prediction = 0.0;
};

// Tape-level forward pass; exposes the prediction Var so callers can attach
// a loss and run backward. Parameter Vars are registered in tensors() order.
struct ForwardVars {
  ad::Var node_embeddings;
  ad::Var graph_embedding;
  ad::Var prediction;               // 1 x 1
  std::vector<ad::Var> param_vars;  // same order as ModelParams::tensors()
};

ForwardVars forward_on_tape(ad::Tape& tape, const graph::PolymerGraph& g,
                            const ModelParams& p, Aggregator agg);

Embeddings forward(const graph::PolymerGraph& g, const ModelParams& p,
                   Aggregator agg);

struct FamilyEmbedding {
  int repeat_size = 0;
  Embeddings emb;
  double cosine_to_first = 1.0;  // vs the first requested size
};

std::vector<FamilyEmbedding> embed_family(const smiles::RepeatUnit& ru,
                                          const std::vector<int>& sizes,
                                          const ModelParams& p, Aggregator agg);

// Versioned JSON checkpoint with config echo and all tensors.
std::string save_checkpoint(const ModelParams& p, Aggregator agg);
std::pair<ModelParams, Aggregator> load_checkpoint(const std::string& text);

}  // namespace grin::model
