// SPDX-License-Identifier: Apache-2.0
#include <set>

#include "doctest.h"
#include "grin/augment.hpp"
#include "grin/eval.hpp"
#include "grin/graph.hpp"

using namespace grin;

namespace {

std::vector<augment::Sample> make_base(int count) {
  return eval::synth_corpus(count, 7);
}

}  // namespace

TEST_CASE("chain_repeat node and edge counts") {
  auto ru = smiles::parse_repeat_unit("*CC*");
  auto g = augment::chain_repeat(ru, 3);
  CHECK(g.num_nodes == 12);
  CHECK(g.edges.size() == 11);  // 3*3 + 2
  int inter = 0;
  for (const auto& e : g.edges)
    if (e.kind == graph::EdgeKind::InterUnit) ++inter;
  CHECK(inter == 2);
  CHECK(g.repeat_count == 3);
}

TEST_CASE("chain_repeat n=1 equals featurize") {
  auto ru = smiles::parse_repeat_unit("*CC(=O)OC*");
  auto a = augment::chain_repeat(ru, 1);
  auto b = graph::featurize(ru);
  CHECK(graph::to_jsonl(a) == graph::to_jsonl(b));
}

TEST_CASE("chain_repeat matches an explicit copy-and-link oracle") {
  auto ru = smiles::parse_repeat_unit("*CC(=O)OC*");
  const int n = 4;
  const int m = static_cast<int>(ru.atoms.size());
  auto g = augment::chain_repeat(ru, n);

  std::set<std::tuple<int, int, int>> want;
  for (int i = 0; i < n; ++i)
    for (const auto& b : ru.bonds) {
      int kind = b.order == smiles::BondOrder::Single   ? 0
                 : b.order == smiles::BondOrder::Double ? 1
                                                        : 2;
      want.insert({std::min(b.a, b.b) + i * m, std::max(b.a, b.b) + i * m,
                   kind});
    }
  for (int i = 0; i + 1 < n; ++i)
    want.insert({ru.anchor_out + i * m, ru.anchor_in + (i + 1) * m, 3});

  std::set<std::tuple<int, int, int>> got;
  for (const auto& e : g.edges)
    got.insert({e.u, e.v, static_cast<int>(e.kind)});
  CHECK(got == want);
  // element pattern repeats per copy
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < m; ++a)
      CHECK(g.elements[i * m + a] == ru.atoms[a].element);
}

TEST_CASE("count identities for n up to 60") {
  for (const char* text : {"*CC*", "*CC(=O)OC*", "*C(C)C*"}) {
    auto ru = smiles::parse_repeat_unit(text);
    auto va = static_cast<int>(ru.atoms.size());
    auto ea = static_cast<int>(ru.bonds.size());
    for (int n = 1; n <= 60; ++n) {
      auto g = augment::chain_repeat(ru, n);
      CHECK(g.num_nodes == n * va);
      CHECK(static_cast<int>(g.edges.size()) == n * ea + (n - 1));
    }
  }
}

TEST_CASE("terminal anchors stay degree 1, linked anchors reach 2") {
  auto ru = smiles::parse_repeat_unit("*CC*");
  auto g = augment::chain_repeat(ru, 3);
  CHECK(g.degree(0) == 1);             // v_in of copy 1
  CHECK(g.degree(11) == 1);            // v_out of copy 3
  CHECK(g.degree(3) == 2);             // v_out of copy 1, linked
  CHECK(g.degree(4) == 2);             // v_in of copy 2, linked
}

TEST_CASE("build_training_set counting") {
  auto base = make_base(100);
  augment::AugmentSpec spec;
  spec.repeat_sizes = {1, 3};
  spec.merge_ratio = 1.0;
  spec.seed = 42;
  auto out = augment::build_training_set(base, spec);
  CHECK(out.size() == 200);
  int n1 = 0, n3 = 0;
  for (const auto& g : out) {
    if (g.repeat_count == 1) ++n1;
    if (g.repeat_count == 3) ++n3;
  }
  CHECK(n1 == 100);
  CHECK(n3 == 100);

  spec.merge_ratio = 0.8;
  CHECK(augment::build_training_set(base, spec).size() == 180);
}

TEST_CASE("build_training_set determinism and label preservation") {
  auto base = make_base(40);
  augment::AugmentSpec spec;
  spec.repeat_sizes = {1, 2, 3};
  spec.merge_ratio = 0.5;
  spec.seed = 99;
  auto a = augment::build_training_set(base, spec);
  auto b = augment::build_training_set(base, spec);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i)
    CHECK(graph::to_jsonl(a[i]) == graph::to_jsonl(b[i]));

  std::set<double> base_labels;
  for (const auto& s : base) base_labels.insert(s.label);
  for (const auto& g : a) {
    REQUIRE(g.label.has_value());
    CHECK(base_labels.count(*g.label) == 1);
  }
}

TEST_CASE("split sizes and rounding") {
  augment::SplitSpec spec;
  spec.seed = 1;
  auto s10 = augment::split(10, spec);
  CHECK(s10.train.size() == 6);
  CHECK(s10.valid.size() == 1);
  CHECK(s10.test.size() == 3);

  auto s7 = augment::split(7, spec);
  CHECK(s7.train.size() == 5);  // remainder goes to train
  CHECK(s7.valid.size() == 0);
  CHECK(s7.test.size() == 2);
}

TEST_CASE("split has no leakage across many seeds") {
  augment::SplitSpec spec;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    spec.seed = seed;
    auto s = augment::split(37, spec);
    std::set<int> all(s.train.begin(), s.train.end());
    for (int i : s.valid) CHECK(all.insert(i).second);
    for (int i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == 37);
  }
}

TEST_CASE("hyperchain recoverability from tagged edges") {
  auto ru = smiles::parse_repeat_unit("*CC(=O)OC*");
  for (int n : {1, 2, 5, 9}) {
    auto g = augment::chain_repeat(ru, n);
    std::set<std::pair<int, int>> contracted;
    for (const auto& e : g.edges) {
      if (e.kind != graph::EdgeKind::InterUnit) continue;
      contracted.insert({e.u / g.unit_size, e.v / g.unit_size});
    }
    std::set<std::pair<int, int>> want;
    for (int i = 0; i + 1 < n; ++i) want.insert({i, i + 1});
    CHECK(contracted == want);
  }
}
