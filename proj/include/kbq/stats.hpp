#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace kbq::stats {

// (value, weight) pairs; weight is the number of repetitions of value.
using Weighted = std::vector<std::pair<double, double>>;

struct Moments {
  double n = 0;
  double mean = 0;
  double quadratic_mean = 0;
  double variance = 0;  // sample (n - 1)
  double stddev = 0;
  double skewness = 0;  // adjusted Fisher-Pearson
  double kurtosis = 0;  // bias-adjusted excess
};

// Estimators are undefined for tiny or constant samples; those report 0:
// variance needs n >= 2, skewness n >= 3, kurtosis n >= 4, and both higher
// moments need a non-zero variance.
inline Moments moments(const Weighted& xs) {
  Moments m;
  double sum = 0, sum_sq = 0;
  for (const auto& [x, w] : xs) {
    m.n += w;
    sum += w * x;
    sum_sq += w * x * x;
  }
  if (m.n == 0) return m;
  const double n = m.n;
  m.mean = sum / n;
  m.quadratic_mean = std::sqrt(sum_sq / n);
  double c2 = 0, c3 = 0, c4 = 0, scale = 0;
  for (const auto& [x, w] : xs) {
    if (w > 0) scale = std::max(scale, std::abs(x));
    const double d = x - m.mean;
    const double d2 = d * d;
    c2 += w * d2;
    c3 += w * d2 * d;
    c4 += w * d2 * d2;
  }
  // A constant sample can leave rounding residue in c2; treat that as zero.
  const double tiny = 1e-12 * scale;
  if (n < 2 || c2 <= n * tiny * tiny) return m;
  m.variance = c2 / (n - 1);
  m.stddev = std::sqrt(m.variance);
  if (n >= 3) {
    const double g1 = (c3 / n) / std::pow(c2 / n, 1.5);
    m.skewness = g1 * std::sqrt(n * (n - 1)) / (n - 2);
  }
  if (n >= 4) {
    const double s4 = m.variance * m.variance;
    m.kurtosis = (n + 1) * n / ((n - 1) * (n - 2) * (n - 3)) * c4 / s4 - 3 * (n - 1) * (n - 1) / ((n - 2) * (n - 3));
  }
  return m;
}

inline Moments moments(const std::vector<double>& xs) {
  Weighted w;
  w.reserve(xs.size());
  for (double x : xs) w.emplace_back(x, 1.0);
  return moments(w);
}

// 1-based nearest rank ceil(pct/100 * n), clamped to [1, n].
inline std::uint64_t nearest_rank(std::uint64_t pct, std::uint64_t n) {
  std::uint64_t r = (pct * n + 99) / 100;
  if (r < 1) r = 1;
  if (r > n) r = n;
  return r;
}

// Value at a 1-based rank in the expansion of a histogram whose keys are in
// ascending order.
template <typename Hist>
typename Hist::key_type value_at_rank(const Hist& h, std::uint64_t rank) {
  std::uint64_t seen = 0;
  for (const auto& [v, c] : h) {
    seen += c;
    if (seen >= rank) return v;
  }
  return h.rbegin()->first;
}

}  // namespace kbq::stats
