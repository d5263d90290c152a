#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kbq/error.hpp"
#include "kbq/histogram.hpp"
#include "kbq/profiler.hpp"
#include "kbq/stats.hpp"

namespace kbq {

// The 30 cardinality features, p1..p30. Index with p(1) .. p(30).
struct CardinalityFeatureVector {
  std::array<double, 30> values{};

  double p(std::size_t i) const { return values.at(i - 1); }
  double& p(std::size_t i) { return values.at(i - 1); }
  std::vector<double> as_vector() const { return {values.begin(), values.end()}; }
};

namespace detail {

inline CardinalityHistogram nonzero_buckets(const CardinalityHistogram& h) {
  CardinalityHistogram out;
  for (const auto& [v, c] : h)
    if (c > 0) out.emplace(v, c);
  return out;
}

}  // namespace detail

// Three views of the per-subject cardinality distribution: the raw values,
// the set of distinct values, and each value's share of subjects.
inline CardinalityFeatureVector cardinality_features(const CardinalityHistogram& hist_in) {
  const CardinalityHistogram hist = detail::nonzero_buckets(hist_in);
  const std::uint64_t n = histogram_mass(hist);
  if (n == 0) throw Error("features", ErrorCode::EmptyHistogram, "cardinality histogram is empty");
  if (n < 2) throw Error("features", ErrorCode::SingleObservation, "cardinality features need at least 2 subjects");

  CardinalityFeatureVector f;
  stats::Weighted raw, distinct, shares;
  std::uint64_t mode = 0, mode_count = 0;
  for (const auto& [v, c] : hist) {
    raw.emplace_back(static_cast<double>(v), static_cast<double>(c));
    distinct.emplace_back(static_cast<double>(v), 1.0);
    shares.emplace_back(static_cast<double>(c) / static_cast<double>(n), 1.0);
    if (c > mode_count) mode = v, mode_count = c;
  }

  const auto rank_value = [&](std::uint64_t pct) {
    return static_cast<double>(stats::value_at_rank(hist, stats::nearest_rank(pct, n)));
  };
  const stats::Moments r = stats::moments(raw);
  f.p(1) = static_cast<double>(hist.begin()->first);
  f.p(2) = static_cast<double>(hist.rbegin()->first);
  f.p(3) = r.mean;
  f.p(4) = static_cast<double>(mode);
  f.p(5) = r.quadratic_mean;
  f.p(6) = r.kurtosis;
  f.p(7) = r.stddev;
  f.p(8) = r.skewness;
  f.p(9) = r.variance;
  f.p(10) = rank_value(98);
  f.p(11) = rank_value(2);
  f.p(12) = rank_value(75);
  f.p(13) = rank_value(25);

  const stats::Moments d = stats::moments(distinct);
  f.p(14) = static_cast<double>(hist.size());
  f.p(15) = d.mean;
  f.p(16) = d.quadratic_mean;
  f.p(17) = d.kurtosis;
  f.p(18) = d.stddev;
  f.p(19) = d.skewness;
  f.p(20) = d.variance;

  const stats::Moments s = stats::moments(shares);
  double lo = 1, hi = 0;
  for (const auto& [share, w] : shares) lo = std::min(lo, share), hi = std::max(hi, share);
  const auto share_of = [&](std::uint64_t v) {
    auto it = hist.find(v);
    return it == hist.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(n);
  };
  f.p(21) = lo;
  f.p(22) = hi;
  f.p(23) = share_of(0);
  f.p(24) = share_of(1);
  f.p(25) = s.mean;
  f.p(26) = s.quadratic_mean;
  f.p(27) = s.kurtosis;
  f.p(28) = s.stddev;
  f.p(29) = s.skewness;
  f.p(30) = s.variance;
  return f;
}

inline const std::array<std::string_view, 8> range_feature_names{
    "iri_share",          "literal_share",          "blank_share",        "iri_distinct_share",
    "literal_distinct_share", "blank_distinct_share", "top_datatype_share", "top_class_share"};

// Node-kind shares among totals and among distinct objects, then the share
// of literals carrying the most common datatype and the share of IRI/blank
// objects typed with the most common class.
inline std::vector<double> range_features(const PropertyStats& ps) {
  const auto& nk = ps.node_kinds;
  const double total = static_cast<double>(nk.iri_total + nk.literal_total + nk.blank_total);
  if (ps.freq == 0 || total == 0)
    throw Error("features", ErrorCode::ZeroFrequency, "property <" + ps.property + "> has no objects");
  const double distinct = static_cast<double>(nk.iri_distinct + nk.literal_distinct + nk.blank_distinct);
  const auto share = [](double a, double b) { return b > 0 ? a / b : 0.0; };

  std::uint64_t top_dt = 0, top_cls = 0;
  for (const auto& [dt, c] : ps.datatype_hist) top_dt = std::max(top_dt, c.total);
  for (const auto& [cls, c] : ps.object_class_hist) top_cls = std::max(top_cls, c.total);

  return {
      share(static_cast<double>(nk.iri_total), total),
      share(static_cast<double>(nk.literal_total), total),
      share(static_cast<double>(nk.blank_total), total),
      share(static_cast<double>(nk.iri_distinct), distinct),
      share(static_cast<double>(nk.literal_distinct), distinct),
      share(static_cast<double>(nk.blank_distinct), distinct),
      share(static_cast<double>(top_dt), static_cast<double>(nk.literal_total)),
      share(static_cast<double>(top_cls), static_cast<double>(nk.iri_total + nk.blank_total)),
  };
}

struct StringLengthSummary {
  std::uint64_t q1 = 0, q3 = 0, min = 0, max = 0;
  friend bool operator==(const StringLengthSummary&, const StringLengthSummary&) = default;
};

// Nearest-rank quartiles: rank ceil(q * N) into the sorted expansion.
inline StringLengthSummary string_quartiles(const LengthHistogram& hist_in) {
  LengthHistogram hist;
  for (const auto& [len, c] : hist_in)
    if (c > 0) hist.emplace(len, c);
  const std::uint64_t n = histogram_mass(hist);
  if (n == 0) throw Error("features", ErrorCode::EmptyHistogram, "string length histogram is empty");
  StringLengthSummary s;
  s.min = hist.begin()->first;
  s.max = hist.rbegin()->first;
  s.q1 = stats::value_at_rank(hist, std::max<std::uint64_t>(1, (n + 3) / 4));
  s.q3 = stats::value_at_rank(hist, std::max<std::uint64_t>(1, (3 * n + 3) / 4));
  return s;
}

struct CardinalityLabels {
  std::string min;  // MIN0, MIN1 or MIN1+
  std::string max;  // MAX1 or MAX1+
  friend bool operator==(const CardinalityLabels&, const CardinalityLabels&) = default;
};

inline CardinalityLabels observed_cardinality_labels(const CardinalityHistogram& hist_in) {
  const CardinalityHistogram hist = detail::nonzero_buckets(hist_in);
  if (hist.empty()) throw Error("features", ErrorCode::EmptyHistogram, "cardinality histogram is empty");
  const std::uint64_t lo = hist.begin()->first;
  const std::uint64_t hi = hist.rbegin()->first;
  return {lo == 0 ? "MIN0" : lo == 1 ? "MIN1" : "MIN1+", hi > 1 ? "MAX1+" : "MAX1"};
}

}  // namespace kbq
