#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "kbq/dataset.hpp"
#include "kbq/error.hpp"
#include "kbq/random.hpp"

namespace kbq {

struct SmoteParams {
  int perc_over = 100;
  int perc_under = 200;
  int k = 5;
  std::uint64_t seed = 0;
};

// The less frequent label; on a tie, the lexicographically smaller one.
inline std::string minority_label(const Dataset& d) {
  const auto counts = d.class_counts();
  if (counts.size() != 2)
    throw Error("features", ErrorCode::NotBinary, "expected 2 classes, got " + std::to_string(counts.size()));
  auto a = counts.begin(), b = std::next(a);
  return b->second < a->second ? b->first : a->first;
}

// Oversamples the minority class with interpolated points and undersamples
// the majority. Output order: original minority rows, synthetic rows, then
// the selected majority rows in input order.
inline Dataset smote(const Dataset& d, const SmoteParams& params) {
  check_rectangular(d, "features");
  if (params.perc_over < 100 || params.perc_over % 100 != 0)
    throw Error("features", ErrorCode::InvalidArgument, "perc_over must be a positive multiple of 100");
  if (params.perc_under < 0) throw Error("features", ErrorCode::InvalidArgument, "perc_under must be >= 0");
  if (params.k < 1) throw Error("features", ErrorCode::InvalidArgument, "k must be >= 1");

  const std::string minority = minority_label(d);
  std::vector<std::size_t> min_idx, maj_idx;
  for (std::size_t i = 0; i < d.size(); ++i) (d.y[i] == minority ? min_idx : maj_idx).push_back(i);
  const std::size_t m = min_idx.size();
  const std::size_t k = static_cast<std::size_t>(params.k);
  if (m < k + 1)
    throw Error("features", ErrorCode::TooFewMinority,
                "minority class has " + std::to_string(m) + " rows, need at least k+1 = " + std::to_string(k + 1));

  Rng rng(params.seed);
  const std::size_t width = d.width();
  const auto dist2 = [&](std::size_t a, std::size_t b) {
    double s = 0;
    for (std::size_t j = 0; j < width; ++j) {
      const double t = d.x[a][j] - d.x[b][j];
      s += t * t;
    }
    return s;
  };

  Dataset out;
  for (std::size_t i : min_idx) out.add(d.x[i], d.y[i]);

  const std::size_t per_point = static_cast<std::size_t>(params.perc_over / 100);
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t a = 0; a < m; ++a) {
    cand.clear();
    for (std::size_t b = 0; b < m; ++b)
      if (b != a) cand.emplace_back(dist2(min_idx[a], min_idx[b]), b);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t s = 0; s < per_point; ++s) {
      const auto& base = d.x[min_idx[a]];
      const auto& nb = d.x[min_idx[cand[rng.below(k)].second]];
      std::vector<double> synth(width);
      for (std::size_t j = 0; j < width; ++j) synth[j] = base[j] + rng.uniform01() * (nb[j] - base[j]);
      out.add(std::move(synth), minority);
    }
  }

  const std::size_t n_synth = m * per_point;
  const std::size_t target = n_synth * static_cast<std::size_t>(params.perc_under) / 100;
  std::vector<std::size_t> chosen;
  if (target <= maj_idx.size()) {
    std::vector<std::size_t> pool = maj_idx;
    for (std::size_t i = 0; i < target; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(target));
    std::sort(chosen.begin(), chosen.end());
  } else {
    chosen = maj_idx;
    while (chosen.size() < target) chosen.push_back(maj_idx[rng.below(maj_idx.size())]);
  }
  for (std::size_t i : chosen) out.add(d.x[i], d.y[i]);
  return out;
}

}  // namespace kbq
