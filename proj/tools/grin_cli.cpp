// SPDX-License-Identifier: Apache-2.0
// Command-line front end; talks to the shared library through the C API.
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "grin/grin.h"

namespace {

int status_to_exit(grin_status s) {
  if (s == GRIN_OK) return 0;
  if (s == GRIN_ERR_USAGE) return 1;
  return 2;  // check failure or runtime error
}

int finish(grin_status s) {
  if (s != GRIN_OK) std::fprintf(stderr, "error: %s\n", grin_last_error());
  return status_to_exit(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"grin: repetition-invariant polymer graph learning"};
  app.require_subcommand(1);

  // augment
  std::string in_csv, sizes = "1,3", out_path;
  double ratio = 1.0;
  std::uint64_t seed = 0;
  auto* aug = app.add_subcommand("augment", "Build an augmented graph set");
  aug->add_option("--input", in_csv, "CSV with smiles,value")->required();
  aug->add_option("--sizes", sizes, "repeat sizes, e.g. 1,3");
  aug->add_option("--ratio", ratio, "merge ratio in (0,1]");
  aug->add_option("--seed", seed, "RNG seed");
  aug->add_option("--out", out_path, "output JSONL")->required();

  // synth
  int count = 100;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic corpus");
  synth->add_option("--count", count, "number of units")->required();
  synth->add_option("--seed", seed, "RNG seed");
  synth->add_option("--out", out_path, "output CSV")->required();

  // train
  std::string data, cfg, ckpt, history;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--data", data, "training JSONL")->required();
  train->add_option("--cfg", cfg, "key = value config file")->required();
  train->add_option("--out", ckpt, "checkpoint output")->required();
  train->add_option("--history", history, "per-epoch history CSV");

  // eval
  std::string report;
  auto* eval = app.add_subcommand("eval", "Repeat-size evaluation sweep");
  eval->add_option("--model", ckpt, "checkpoint")->required();
  eval->add_option("--test", data, "test CSV with smiles,value")->required();
  eval->add_option("--sizes", sizes, "repeat sizes, e.g. 1,5,10,60");
  eval->add_option("--out", report, "report JSON")->required();

  // embed
  std::string ru;
  auto* embed = app.add_subcommand("embed", "Export family embeddings");
  embed->add_option("--model", ckpt, "checkpoint")->required();
  embed->add_option("--ru", ru, "repeat unit text, e.g. *CC*")->required();
  embed->add_option("--sizes", sizes, "repeat sizes");
  embed->add_option("--out", out_path, "output CSV")->required();

  // verify-theory
  std::string prop, params_json = "{}";
  auto* verify = app.add_subcommand("verify-theory", "Run a property check");
  verify->add_option("--prop", prop, "invariance|gradsum|mst")->required();
  verify->add_option("--params", params_json, "JSON parameter overrides");
  verify->add_option("--out", report, "report JSON")->required();

  // mst
  int start = 0;
  auto* mst = app.add_subcommand("mst", "Maximum spanning tree of a graph");
  mst->add_option("--input", in_csv, "JSON {n, edges:[[u,v,w]]}")->required();
  mst->add_option("--start", start, "start node");
  mst->add_option("--out", report, "tree JSON")->required();

  // gradcheck
  int trials = 10;
  double rel_tol = 1e-4;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  gc->add_option("--trials", trials, "number of random instances");
  gc->add_option("--seed", seed, "RNG seed");
  gc->add_option("--rel-tol", rel_tol, "relative tolerance");

  CLI11_PARSE(app, argc, argv);

  if (aug->parsed())
    return finish(grin_cmd_augment(in_csv.c_str(), sizes.c_str(), ratio, seed,
                                   out_path.c_str()));
  if (synth->parsed())
    return finish(grin_cmd_synth(count, seed, out_path.c_str()));
  if (train->parsed())
    return finish(grin_cmd_train(data.c_str(), cfg.c_str(), ckpt.c_str(),
                                 history.empty() ? nullptr : history.c_str()));
  if (eval->parsed())
    return finish(grin_cmd_eval(ckpt.c_str(), data.c_str(), sizes.c_str(),
                                report.c_str()));
  if (embed->parsed())
    return finish(grin_cmd_embed(ckpt.c_str(), ru.c_str(), sizes.c_str(),
                                 out_path.c_str()));
  if (verify->parsed())
    return finish(grin_cmd_verify_theory(prop.c_str(), params_json.c_str(),
                                         report.c_str()));
  if (mst->parsed())
    return finish(grin_cmd_mst(in_csv.c_str(), start, report.c_str()));
  if (gc->parsed()) {
    char summary[256] = {0};
    grin_status s =
        grin_cmd_gradcheck(trials, seed, rel_tol, summary, sizeof(summary));
    std::printf("%s\n", summary);
    return finish(s);
  }
  return 1;
}
