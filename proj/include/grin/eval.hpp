// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "grin/augment.hpp"
#include "grin/model.hpp"

namespace grin::eval {

struct Metrics {
  double r2 = 0.0;
  double rmse = 0.0;
};

// r2 = 1 - SS_res/SS_tot; throws DegenerateError when SS_tot = 0.
Metrics metrics(const std::vector<double>& y_true,
                const std::vector<double>& y_pred);

struct SizeResult {
  int repeat_size = 0;
  double r2 = 0.0;
  double rmse = 0.0;
  int count = 0;
  double mean_cosine_to_n1 = 1.0;  // graph-embedding drift vs n=1
};

struct EvalReport {
  std::vector<SizeResult> per_size;
  double r2_gap_first_to_last = 0.0;  // Test1 vs TestMax
  std::uint64_t seed = 0;
  std::string config_echo;
};

EvalReport sweep_eval(const model::ModelParams& params, model::Aggregator agg,
                      const std::vector<augment::Sample>& test_base,
                      const std::vector<int>& sizes);

std::string report_json(const EvalReport& r);

struct RowError {
  int line = 0;
  std::string message;
};

struct IngestResult {
  std::vector<augment::Sample> samples;
  std::vector<RowError> errors;
};

// CSV with header `smiles,value`; malformed rows are collected, valid rows
// proceed. `#` lines are comments.
IngestResult ingest_csv(const std::string& path);
IngestResult ingest_csv_text(const std::string& text);

// Random valid repeat units over C/O/N chains with optional C/=O branches,
// 2-8 heavy atoms. Label = 10*#C + 25*#O + 40*#(double bonds touching O),
// independent of repeat count by construction.
std::vector<augment::Sample> synth_corpus(int count, std::uint64_t seed);

double synth_label(const smiles::RepeatUnit& ru);

}  // namespace grin::eval
