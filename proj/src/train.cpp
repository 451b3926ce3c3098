// SPDX-License-Identifier: Apache-2.0
#include "grin/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace grin::train {

namespace {

using ad::Tensor;

double l1_of(const model::ModelParams& p) {
  double s = 0.0;
  for (const Tensor* t : p.l1_tensors())
    for (double x : t->data) s += std::abs(x);
  return s;
}

// Accumulates d(task MSE)/d(theta) for one graph into grads (scaled by w).
double accumulate_graph_grad(const graph::PolymerGraph& g,
                             const model::ModelParams& p,
                             model::Aggregator agg, double w,
                             std::vector<Tensor>& grads) {
  ad::Tape tape;
  model::ForwardVars fv = model::forward_on_tape(tape, g, p, agg);
  ad::Var target = tape.input(Tensor::scalar(g.label.value()));
  ad::Var sq = tape.mse(fv.prediction, target);
  tape.backward(sq);
  for (size_t i = 0; i < fv.param_vars.size(); ++i) {
    const Tensor& gi = tape.grad(fv.param_vars[i]);
    for (size_t k = 0; k < gi.size(); ++k) grads[i].data[k] += w * gi.data[k];
  }
  return tape.value(sq).data[0];
}

}  // namespace

void TrainConfig::validate() const {
  if (lr <= 0 || batch_size <= 0 || max_epochs <= 0 || patience <= 0 ||
      l1_weight < 0 || l1_warmup_epochs < 0 || hidden_dim <= 0 ||
      num_layers <= 0)
    throw Error("train config values must be positive");
  if (patience > max_epochs) throw Error("patience must be <= max_epochs");
}

LossReport loss(const std::vector<graph::PolymerGraph>& batch,
                const model::ModelParams& params, model::Aggregator agg,
                double lambda_effective) {
  if (batch.empty()) throw Error("empty batch");
  LossReport r;
  for (const auto& g : batch) {
    if (!g.label) throw Error("unlabeled graph in batch");
    double y = model::forward(g, params, agg).prediction;
    double d = y - *g.label;
    r.task_loss += d * d;
  }
  r.task_loss /= static_cast<double>(batch.size());
  r.l1_term = l1_of(params);
  r.total = r.task_loss + lambda_effective * r.l1_term;
  return r;
}

double rmse_on(const std::vector<graph::PolymerGraph>& set,
               const model::ModelParams& params, model::Aggregator agg) {
  if (set.empty()) throw Error("empty evaluation set");
  double s = 0.0;
  for (const auto& g : set) {
    double d = model::forward(g, params, agg).prediction - g.label.value();
    s += d * d;
  }
  return std::sqrt(s / static_cast<double>(set.size()));
}

TrainResult train(const std::vector<graph::PolymerGraph>& train_set,
                  const std::vector<graph::PolymerGraph>& valid_set,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.empty() || valid_set.empty())
    throw Error("train and valid sets must be non-empty");

  model::ModelConfig mc;
  mc.hidden_dim = cfg.hidden_dim;
  mc.num_layers = cfg.num_layers;
  mc.readout = cfg.readout;
  mc.seed = cfg.seed;
  model::ModelParams params = model::ModelParams::init(mc);

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  ad::AdamState adam;

  TrainResult result;
  result.params = params;
  result.best_valid_rmse = std::numeric_limits<double>::infinity();

  auto param_ptrs = params.tensors();
  // indices of l1-scoped tensors within the flat list: message/update MLPs
  // occupy positions 2 .. 2+8*L-1 (after input_proj.w/b, before the head)
  const size_t l1_begin = 2;
  const size_t l1_end = 2 + 8 * static_cast<size_t>(cfg.num_layers);

  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  int epochs_since_best = 0;
  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    double lambda_eff = epoch < cfg.l1_warmup_epochs ? 0.0 : cfg.l1_weight;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double epoch_task = 0.0;
    int num_batches = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      double n = static_cast<double>(end - start);

      std::vector<Tensor> grads;
      for (Tensor* t : param_ptrs) grads.emplace_back(t->rows, t->cols);

      double batch_task = 0.0;
      for (size_t i = start; i < end; ++i) {
        const auto& g = train_set[order[i]];
        if (!g.label) throw Error("unlabeled graph in training set");
        batch_task += accumulate_graph_grad(g, params, cfg.aggregator, 1.0 / n,
                                            grads);
      }
      batch_task /= n;
      if (!std::isfinite(batch_task))
        throw DivergenceError("training loss became non-finite at epoch " +
                              std::to_string(epoch));
      if (lambda_eff > 0.0) {
        for (size_t i = l1_begin; i < l1_end; ++i) {
          const Tensor& t = *param_ptrs[i];
          for (size_t k = 0; k < t.size(); ++k) {
            if (t.data[k] > 0.0) grads[i].data[k] += lambda_eff;
            if (t.data[k] < 0.0) grads[i].data[k] -= lambda_eff;
          }
        }
      }
      ad::adam_step(param_ptrs, grads, adam, cfg.lr);
      epoch_task += batch_task;
      ++num_batches;
    }
    epoch_task /= std::max(1, num_batches);

    double valid_rmse = rmse_on(valid_set, params, cfg.aggregator);
    if (!std::isfinite(valid_rmse))
      throw DivergenceError("validation loss became non-finite at epoch " +
                            std::to_string(epoch));
    result.history.push_back({epoch, epoch_task, l1_of(params), valid_rmse});

    if (valid_rmse < result.best_valid_rmse) {
      result.best_valid_rmse = valid_rmse;
      result.best_epoch = epoch;
      result.params = params;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= cfg.patience) {
      break;
    }
  }
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out << "epoch,task_loss,l1,valid_rmse\n";
  out.precision(17);
  for (const EpochRecord& r : history)
    out << r.epoch << ',' << r.task_loss << ',' << r.l1_term << ','
        << r.valid_rmse << '\n';
  return out.str();
}

}  // namespace grin::train
