#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "kbq/csv.hpp"
#include "kbq/error.hpp"
#include "kbq/profiler.hpp"
#include "kbq/registry.hpp"

namespace kbq {

enum class CompletenessMode { Raw, Normalized };
enum class Strictness { Weak, Strict };

constexpr std::string_view to_string(CompletenessMode m) { return m == CompletenessMode::Raw ? "raw" : "normalized"; }
constexpr std::string_view to_string(Strictness s) { return s == Strictness::Weak ? "weak" : "strict"; }

// NF(p, C) = freq(p, C) / count(C). May exceed 1 for multi-valued properties.
inline double normalized_frequency(std::uint64_t freq, std::uint64_t entity_count) {
  if (entity_count == 0) throw Error("evolution", ErrorCode::ZeroEntityCount, "normalized frequency needs count(C) > 0");
  return static_cast<double>(freq) / static_cast<double>(entity_count);
}

struct FreqCount {
  std::uint64_t freq = 0;
  std::uint64_t count = 0;
};

// 1 when the current release did not lose ground: NF_cur >= NF_prev (or raw
// freq in raw mode; > instead of >= when strict).
inline int property_completeness(FreqCount prev, FreqCount cur, CompletenessMode mode = CompletenessMode::Normalized,
                                 Strictness strictness = Strictness::Weak) {
  if (mode == CompletenessMode::Raw) {
    return strictness == Strictness::Weak ? cur.freq >= prev.freq : cur.freq > prev.freq;
  }
  if (prev.count == 0 || cur.count == 0)
    throw Error("evolution", ErrorCode::ZeroEntityCount, "normalized frequency needs count(C) > 0");
  // Cross-multiplied so equal ratios compare equal.
  const unsigned __int128 lhs = static_cast<unsigned __int128>(cur.freq) * prev.count;
  const unsigned __int128 rhs = static_cast<unsigned __int128>(prev.freq) * cur.count;
  return strictness == Strictness::Weak ? lhs >= rhs : lhs > rhs;
}

struct CompletenessRow {
  std::string property;
  std::uint64_t freq_prev = 0, freq_cur = 0;
  double nf_prev = 0, nf_cur = 0;
  int complete = 0;
  CompletenessMode mode = CompletenessMode::Normalized;
  Strictness strictness = Strictness::Weak;
};

// Mean of the per-property flags.
inline double class_completeness(const std::vector<CompletenessRow>& rows) {
  if (rows.empty()) throw Error("evolution", ErrorCode::EmptyRowSet, "class completeness over zero properties");
  std::size_t ones = 0;
  for (const auto& r : rows) ones += r.complete;
  return static_cast<double>(ones) / static_cast<double>(rows.size());
}

struct ClassCompletenessReport {
  std::string class_iri;
  std::string release_prev, release_cur;
  std::vector<CompletenessRow> rows;
  double class_completeness = 0;
};

// Compares two releases of one class over the properties common to both.
inline ClassCompletenessReport completeness_report(const KBProfile& prev, const KBProfile& cur, const std::string& cls,
                                                   CompletenessMode mode = CompletenessMode::Normalized,
                                                   Strictness strictness = Strictness::Weak) {
  const auto props = filter_properties({prev, cur}, cls);
  const ClassProfile& cp = *prev.find(cls);
  const ClassProfile& cc = *cur.find(cls);
  ClassCompletenessReport rep{cls, prev.release, cur.release, {}, 0};
  for (const auto& p : props) {
    CompletenessRow r;
    r.property = p;
    r.freq_prev = cp.properties.at(p).freq;
    r.freq_cur = cc.properties.at(p).freq;
    if (cp.entity_count > 0) r.nf_prev = normalized_frequency(r.freq_prev, cp.entity_count);
    if (cc.entity_count > 0) r.nf_cur = normalized_frequency(r.freq_cur, cc.entity_count);
    r.complete = property_completeness({r.freq_prev, cp.entity_count}, {r.freq_cur, cc.entity_count}, mode, strictness);
    r.mode = mode;
    r.strictness = strictness;
    rep.rows.push_back(std::move(r));
  }
  rep.class_completeness = class_completeness(rep.rows);
  return rep;
}

inline void write_completeness_csv(std::ostream& os, const ClassCompletenessReport& rep, const std::string& provenance) {
  csv::Writer w(os);
  w.comment(provenance);
  w.row({"class", "property", "release_prev", "release_cur", "freq_prev", "freq_cur", "nf_prev", "nf_cur", "complete"});
  for (const auto& r : rep.rows)
    w.row({rep.class_iri, r.property, rep.release_prev, rep.release_cur, std::to_string(r.freq_prev),
           std::to_string(r.freq_cur), csv::format_double(r.nf_prev), csv::format_double(r.nf_cur),
           std::to_string(r.complete)});
}

struct CountPoint {
  std::string release;
  Date date;
  std::uint64_t count = 0;
};

struct CountSeries {
  std::string class_iri;
  std::vector<CountPoint> points;  // ascending by date
};

struct GrowthResult {
  double slope = 0;      // entities per day
  double intercept = 0;  // entities at the first release
  double predicted_last = 0;
  double residual_last = 0;
  double mean_abs_residual = 0;
  double nd = 0;  // +inf when the history fits exactly and the last point deviates
  int growth = 0;
};

// Fits ordinary least squares to releases 1..n-1 with t = days since the
// first release, then scores the newest release against that line:
// nd = |residual_n| / mean(|residual_i|, i < n), growth = [nd >= 1].
inline GrowthResult growth_analysis(const CountSeries& series) {
  const auto& pts = series.points;
  const std::size_t n = pts.size();
  if (n < 3)
    throw Error("evolution", ErrorCode::InsufficientPoints,
                "growth analysis needs at least 3 releases, got " + std::to_string(n));
  for (std::size_t i = 1; i < n; ++i)
    if (!(pts[i - 1].date < pts[i].date))
      throw Error("evolution", ErrorCode::InvalidSeries, "release dates must be strictly increasing");

  std::vector<double> t(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i] = static_cast<double>(pts[i].date - pts[0].date);
    y[i] = static_cast<double>(pts[i].count);
  }
  const std::size_t m = n - 1;
  double t_mean = 0, y_mean = 0;
  for (std::size_t i = 0; i < m; ++i) t_mean += t[i], y_mean += y[i];
  t_mean /= static_cast<double>(m);
  y_mean /= static_cast<double>(m);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (t[i] - t_mean) * (t[i] - t_mean);
    sxy += (t[i] - t_mean) * (y[i] - y_mean);
  }
  if (sxx == 0) throw Error("evolution", ErrorCode::DegenerateFit, "all fitted releases share one date");

  GrowthResult g;
  g.slope = sxy / sxx;
  g.intercept = y_mean - g.slope * t_mean;
  double sum_abs = 0;
  for (std::size_t i = 0; i < m; ++i) sum_abs += std::abs(g.slope * t[i] + g.intercept - y[i]);
  g.mean_abs_residual = sum_abs / static_cast<double>(m);
  // Rounding noise from an exact fit (always the case with two fitted points)
  // must not pass for a real residual.
  double y_scale = 0;
  for (std::size_t i = 0; i < n; ++i) y_scale = std::max(y_scale, std::abs(y[i]));
  const double noise = 1e-12 * std::max(y_scale, 1.0);
  if (g.mean_abs_residual <= noise) g.mean_abs_residual = 0;
  g.predicted_last = g.slope * t[n - 1] + g.intercept;
  g.residual_last = std::abs(g.predicted_last - y[n - 1]);
  if (g.residual_last <= noise) g.residual_last = 0;
  if (g.mean_abs_residual == 0) g.nd = g.residual_last == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  else g.nd = g.residual_last / g.mean_abs_residual;
  g.growth = g.nd >= 1.0 ? 1 : 0;
  return g;
}

inline void write_growth_csv_header(csv::Writer& w) {
  w.row({"class", "slope", "intercept", "predicted", "residual", "mean_residual", "nd", "growth"});
}

inline void write_growth_csv_row(csv::Writer& w, const std::string& cls, const GrowthResult& g) {
  w.row({cls, csv::format_double(g.slope), csv::format_double(g.intercept), csv::format_double(g.predicted_last),
         csv::format_double(g.residual_last), csv::format_double(g.mean_abs_residual), csv::format_double(g.nd),
         std::to_string(g.growth)});
}

}  // namespace kbq
