// SPDX-License-Identifier: Apache-2.0
#include "grin/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace grin::augment {

void AugmentSpec::validate() const {
  if (repeat_sizes.empty()) throw Error("repeat_sizes must be non-empty");
  if (!std::is_sorted(repeat_sizes.begin(), repeat_sizes.end()))
    throw Error("repeat_sizes must be sorted");
  if (std::adjacent_find(repeat_sizes.begin(), repeat_sizes.end()) !=
      repeat_sizes.end())
    throw Error("repeat_sizes must be distinct");
  if (repeat_sizes.front() != 1) throw Error("repeat_sizes must contain 1");
  if (!(merge_ratio > 0.0 && merge_ratio <= 1.0))
    throw Error("merge_ratio must be in (0, 1]");
}

graph::PolymerGraph chain_repeat(const smiles::RepeatUnit& ru, int n) {
  return graph::detail::assemble_chain(ru, n);
}

std::vector<graph::PolymerGraph> build_training_set(
    const std::vector<Sample>& base, const AugmentSpec& spec) {
  spec.validate();
  if (base.empty()) throw Error("base sample list is empty");

  std::vector<graph::PolymerGraph> out;
  for (const Sample& s : base) {
    auto g = chain_repeat(s.unit, 1);
    g.label = s.label;
    out.push_back(std::move(g));
  }
  std::mt19937_64 rng(spec.seed);
  for (int n : spec.repeat_sizes) {
    if (n == 1) continue;
    std::vector<int> idx(base.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    auto k = static_cast<size_t>(
        std::llround(spec.merge_ratio * static_cast<double>(base.size())));
    idx.resize(std::min(k, idx.size()));
    std::sort(idx.begin(), idx.end());
    for (int i : idx) {
      auto g = chain_repeat(base[i].unit, n);
      g.label = base[i].label;
      out.push_back(std::move(g));
    }
  }
  return out;
}

Split split(std::size_t num_samples, const SplitSpec& spec) {
  if (num_samples == 0) throw Error("cannot split an empty sample list");
  double frac_sum = spec.train_frac + spec.valid_frac + spec.test_frac;
  if (std::abs(frac_sum - 1.0) > 1e-9)
    throw Error("split fractions must sum to 1");

  std::vector<int> idx(num_samples);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(spec.seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  auto n_valid = static_cast<size_t>(std::floor(spec.valid_frac * num_samples));
  auto n_test = static_cast<size_t>(std::floor(spec.test_frac * num_samples));
  auto n_train = num_samples - n_valid - n_test;  // remainder goes to train

  Split s;
  s.train.assign(idx.begin(), idx.begin() + n_train);
  s.valid.assign(idx.begin() + n_train, idx.begin() + n_train + n_valid);
  s.test.assign(idx.begin() + n_train + n_valid, idx.end());
  return s;
}

}  // namespace grin::augment
