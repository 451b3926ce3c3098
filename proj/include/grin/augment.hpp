// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "grin/graph.hpp"
#include "grin/smiles.hpp"

namespace grin::augment {

struct Sample {
  smiles::RepeatUnit unit;
  double label = 0.0;
};

struct AugmentSpec {
  std::vector<int> repeat_sizes = {1, 3};  // sorted, distinct, contains 1
  double merge_ratio = 1.0;                // in (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitSpec {
  double train_frac = 0.6;
  double valid_frac = 0.1;
  double test_frac = 0.3;
  std::uint64_t seed = 0;
};

// The n-repeat polymer graph: n copies of the unit plus n-1 inter-unit
// edges between consecutive anchors. |V| = n*|V_A|, |E| = n*|E_A| + (n-1).
graph::PolymerGraph chain_repeat(const smiles::RepeatUnit& ru, int n);

// Every base sample at n=1, plus each augmented size for a seeded
// merge_ratio fraction of the base samples. Labels are copied unchanged.
std::vector<graph::PolymerGraph> build_training_set(
    const std::vector<Sample>& base, const AugmentSpec& spec);

struct Split {
  std::vector<int> train;  // base-sample indices
  std::vector<int> valid;
  std::vector<int> test;
};

// Disjoint base-level partition; floor-rounded sizes, remainder to train.
Split split(std::size_t num_samples, const SplitSpec& spec);

}  // namespace grin::augment
