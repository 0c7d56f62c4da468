#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "wdist/core/random.hpp"
#include "wdist/data/dataset.hpp"

namespace wdist {

struct SplitFractions {
  double train = 10.0 / 14.0;
  double val = 2.0 / 14.0;
  double test = 2.0 / 14.0;
};

/// Disjoint train/val/test split, stratified by bin.
///
/// Rows are grouped by bin, each group is shuffled, and the concatenation is
/// dealt out so every prefix tracks the target proportions. Totals are exact
/// (train and val rounded, test takes the rest) and each bin's share in each
/// split is within two rows of the global proportion.
inline std::array<LabeledDataset, 3> split_dataset(const LabeledDataset& ds, const SplitFractions& f,
                                                   std::uint64_t seed) {
  if (!(f.train > 0.0 && f.val > 0.0 && f.test > 0.0)) throw ParameterError("split: fractions must be positive");
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) throw ParameterError("split: fractions must sum to 1");

  const std::size_t n = ds.size();
  const std::size_t n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.train));
  const std::size_t n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(static_cast<double>(n) * f.val)));
  const std::array<std::size_t, 3> target = {n_train, n_val, n - n_train - n_val};

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[ds.rows[i].bin].push_back(i);
  SeededRandomSource rng(derive_seed(seed, 0x53504c4954ULL));
  std::vector<std::size_t> order;
  order.reserve(n);
  for (auto& [bin, idx] : strata) {
    rng.shuffle(idx);
    order.insert(order.end(), idx.begin(), idx.end());
  }

  std::array<std::vector<std::size_t>, 3> assigned;
  for (std::size_t pos = 0; pos < n; ++pos) {
    int best = -1;
    double best_deficit = 0.0;
    for (int k = 0; k < 3; ++k) {
      if (assigned[k].size() >= target[k]) continue;
      const double deficit = static_cast<double>(target[k]) * static_cast<double>(pos + 1) / static_cast<double>(n) -
                             static_cast<double>(assigned[k].size());
      if (best < 0 || deficit > best_deficit) {
        best = k;
        best_deficit = deficit;
      }
    }
    assigned[best].push_back(order[pos]);
  }

  std::array<LabeledDataset, 3> out;
  const std::array<Split, 3> tags = {Split::train, Split::val, Split::test};
  for (int k = 0; k < 3; ++k) {
    auto& idx = assigned[k];
    std::sort(idx.begin(), idx.end());
    out[k].layout = ds.layout;
    out[k].spec = ds.spec;
    out[k].split = tags[k];
    out[k].manifest = ds.manifest;
    out[k].rows.reserve(idx.size());
    for (std::size_t i : idx) out[k].rows.push_back(ds.rows[i]);
  }
  return out;
}

}  // namespace wdist
