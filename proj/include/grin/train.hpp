// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grin/graph.hpp"
#include "grin/model.hpp"

namespace grin::train {

struct TrainConfig {
  double lr = 1e-3;
  int batch_size = 32;
  int max_epochs = 400;
  int patience = 100;
  double l1_weight = 1e-3;   // lambda
  int l1_warmup_epochs = 50; // lambda is 0 before this epoch
  std::uint64_t seed = 0;
  model::Aggregator aggregator = model::Aggregator::Max;
  model::Readout readout = model::Readout::Max;
  int hidden_dim = 64;
  int num_layers = 3;

  void validate() const;
};

struct LossReport {
  double task_loss = 0.0;  // mean squared error over the batch
  double l1_term = 0.0;    // sum of |theta| over message/update MLPs
  double total = 0.0;      // task + lambda_effective * l1
};

struct EpochRecord {
  int epoch = 0;
  double task_loss = 0.0;
  double l1_term = 0.0;
  double valid_rmse = 0.0;
};

struct TrainResult {
  model::ModelParams params;  // best checkpoint by valid RMSE
  std::vector<EpochRecord> history;
  double best_valid_rmse = 0.0;
  int best_epoch = 0;
};

// Forward-only loss evaluation over a batch of labeled graphs.
LossReport loss(const std::vector<graph::PolymerGraph>& batch,
                const model::ModelParams& params, model::Aggregator agg,
                double lambda_effective);

// Mini-batch Adam on MSE + l1 with warm-up and early stopping. Deterministic
// for a fixed config and seed. Throws DivergenceError on non-finite loss.
TrainResult train(const std::vector<graph::PolymerGraph>& train_set,
                  const std::vector<graph::PolymerGraph>& valid_set,
                  const TrainConfig& cfg);

double rmse_on(const std::vector<graph::PolymerGraph>& set,
               const model::ModelParams& params, model::Aggregator agg);

std::string history_csv(const std::vector<EpochRecord>& history);

}  // namespace grin::train
