// SPDX-License-Identifier: Apache-2.0
// Exercises the shared-library surface through grin.h only.
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "grin/grin.h"

namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  auto p = fs::temp_directory_path() / "grin_capi_tests";
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("api version and error state") {
  CHECK(grin_api_version() >= 1);
  grin_repeat_unit* ru = nullptr;
  CHECK(grin_parse_repeat_unit("*CC*", &ru) == GRIN_OK);
  CHECK(std::string(grin_last_error()).empty());
  grin_repeat_unit_free(ru);
}

TEST_CASE("parse, inspect, canonicalize") {
  grin_repeat_unit* ru = nullptr;
  REQUIRE(grin_parse_repeat_unit("*CC(=O)OC*", &ru) == GRIN_OK);
  CHECK(grin_repeat_unit_num_atoms(ru) == 7);
  CHECK(grin_repeat_unit_num_bonds(ru) == 6);

  size_t len = 0;
  CHECK(grin_canonical_text(ru, nullptr, 0, &len) == GRIN_OK);
  REQUIRE(len > 0);
  std::string buf(len + 1, '\0');
  CHECK(grin_canonical_text(ru, buf.data(), buf.size(), &len) == GRIN_OK);
  buf.resize(len);
  CHECK(buf.find('*') != std::string::npos);
  grin_repeat_unit_free(ru);
}

TEST_CASE("status codes map the failure modes") {
  grin_repeat_unit* ru = nullptr;
  CHECK(grin_parse_repeat_unit("*C(Z)C*", &ru) == GRIN_ERR_SYNTAX);
  CHECK(std::string(grin_last_error()).size() > 0);
  CHECK(grin_parse_repeat_unit("CC", &ru) == GRIN_ERR_ANCHOR);
  CHECK(grin_parse_repeat_unit("*CC*", nullptr) == GRIN_ERR_USAGE);
  CHECK(grin_parse_repeat_unit(nullptr, &ru) == GRIN_ERR_USAGE);
}

TEST_CASE("chain repeat and graph accessors") {
  grin_repeat_unit* ru = nullptr;
  REQUIRE(grin_parse_repeat_unit("*CC*", &ru) == GRIN_OK);
  grin_graph* g = nullptr;
  REQUIRE(grin_chain_repeat(ru, 3, &g) == GRIN_OK);
  CHECK(grin_graph_num_nodes(g) == 12);
  CHECK(grin_graph_num_edges(g) == 11);
  int diam = -1;
  CHECK(grin_graph_diameter(g, &diam) == GRIN_OK);
  CHECK(diam == 11);

  size_t len = 0;
  REQUIRE(grin_graph_to_json(g, nullptr, 0, &len) == GRIN_OK);
  std::string buf(len + 1, '\0');
  REQUIRE(grin_graph_to_json(g, buf.data(), buf.size(), &len) == GRIN_OK);
  buf.resize(len);
  CHECK(buf.rfind("{\"nodes\":", 0) == 0);

  grin_graph* bad = nullptr;
  CHECK(grin_chain_repeat(ru, 0, &bad) == GRIN_ERR_USAGE);
  grin_graph_free(g);
  grin_repeat_unit_free(ru);
}

TEST_CASE("synth -> augment -> train -> eval -> embed round trip") {
  auto dir = tmp_dir();
  auto csv = dir / "corpus.csv";
  auto jsonl = dir / "data.jsonl";
  auto cfg = dir / "train.cfg";
  auto ckpt = dir / "model.json";
  auto hist = dir / "history.csv";
  auto report = dir / "report.json";
  auto emb = dir / "embed.csv";

  REQUIRE(grin_cmd_synth(12, 5, csv.string().c_str()) == GRIN_OK);
  auto corpus_text = slurp(csv);
  CHECK(corpus_text.rfind("smiles,value", 0) == 0);

  REQUIRE(grin_cmd_augment(csv.string().c_str(), "1,2", 1.0, 7,
                           jsonl.string().c_str()) == GRIN_OK);
  auto jl = slurp(jsonl);
  int lines = 0;
  for (char c : jl)
    if (c == '\n') ++lines;
  CHECK(lines == 24);

  spit(cfg,
       "# tiny config for the api test\n"
       "lr = 0.01\n"
       "batch_size = 8\n"
       "max_epochs = 4\n"
       "patience = 4\n"
       "l1_weight = 0.0\n"
       "l1_warmup_epochs = 0\n"
       "hidden_dim = 8\n"
       "num_layers = 2\n"
       "seed = 1\n"
       "aggregator = max\n"
       "readout = max\n"
       "valid_frac = 0.25\n");
  REQUIRE(grin_cmd_train(jsonl.string().c_str(), cfg.string().c_str(),
                         ckpt.string().c_str(),
                         hist.string().c_str()) == GRIN_OK);
  CHECK(slurp(ckpt).find("grin-checkpoint") != std::string::npos);
  CHECK(slurp(hist).rfind("epoch,", 0) == 0);

  REQUIRE(grin_cmd_eval(ckpt.string().c_str(), csv.string().c_str(), "1,3",
                        report.string().c_str()) == GRIN_OK);
  CHECK(slurp(report).find("\"per_size\"") != std::string::npos);

  REQUIRE(grin_cmd_embed(ckpt.string().c_str(), "*CC*", "1,2,4",
                         emb.string().c_str()) == GRIN_OK);
  auto emb_text = slurp(emb);
  CHECK(emb_text.find("1,") != std::string::npos);
  CHECK(emb_text.find("4,") != std::string::npos);
}

TEST_CASE("verify-theory: gradsum and mst") {
  auto dir = tmp_dir();
  auto out = dir / "theory.json";
  CHECK(grin_cmd_verify_theory("gradsum", "{\"n_min\": 3, \"n_max\": 6}",
                               out.string().c_str()) == GRIN_OK);
  CHECK(slurp(out).find("\"measured\"") != std::string::npos);

  CHECK(grin_cmd_verify_theory("mst", "{\"instances\": 20, \"seed\": 3}",
                               out.string().c_str()) == GRIN_OK);

  CHECK(grin_cmd_verify_theory("no-such-prop", "{}",
                               out.string().c_str()) == GRIN_ERR_USAGE);
}

TEST_CASE("mst command") {
  auto dir = tmp_dir();
  auto in = dir / "wg.json";
  auto out = dir / "mst.json";
  spit(in, "{\"n\": 3, \"edges\": [[0,1,2.0],[1,2,3.0],[0,2,1.0]]}");
  REQUIRE(grin_cmd_mst(in.string().c_str(), 0, out.string().c_str()) ==
          GRIN_OK);
  auto text = slurp(out);
  CHECK(text.find("\"tree_weight\": 5.0") != std::string::npos);
}

TEST_CASE("gradcheck command") {
  char summary[256] = {0};
  CHECK(grin_cmd_gradcheck(3, 9, 1e-4, summary, sizeof summary) == GRIN_OK);
  CHECK(std::strlen(summary) > 0);
}
