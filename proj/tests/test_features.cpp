#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "support.hpp"

using namespace kbq;

namespace {

const CardinalityHistogram union_hist{{0, 1662}, {1, 279}, {2, 10}, {3, 5}, {4, 2}};

// Reference statistics over an explicit list of observations.
struct Reference {
  double mean = 0, qm = 0, var = 0, sd = 0, skew = 0, kurt = 0;
};

Reference reference(const std::vector<double>& xs) {
  Reference r;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) r.mean += x / n;
  double ss = 0;
  for (double x : xs) ss += x * x;
  r.qm = std::sqrt(ss / n);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double x : xs) {
    m2 += std::pow(x - r.mean, 2) / n;
    m3 += std::pow(x - r.mean, 3) / n;
    m4 += std::pow(x - r.mean, 4) / n;
  }
  double scale = 0;
  for (double x : xs) scale = std::max(scale, std::fabs(x));
  if (xs.size() < 2 || m2 <= std::pow(1e-12 * scale, 2)) return r;
  r.var = m2 * n / (n - 1);
  r.sd = std::sqrt(r.var);
  // G1 and G2 in their textbook forms.
  if (xs.size() >= 3) r.skew = std::sqrt(n * (n - 1)) / (n - 2) * m3 / std::pow(m2, 1.5);
  if (xs.size() >= 4) r.kurt = (n - 1) / ((n - 2) * (n - 3)) * ((n + 1) * (m4 / (m2 * m2) - 3) + 6);
  return r;
}

// Smallest sorted value whose 1-based position k satisfies 100k >= pct * n.
double percentile(std::vector<double> xs, std::uint64_t pct) {
  std::sort(xs.begin(), xs.end());
  std::size_t k = 1;
  while (100 * k < pct * xs.size()) ++k;
  return xs[k - 1];
}

std::array<double, 30> expansion_oracle(const CardinalityHistogram& h) {
  std::vector<double> raw, distinct, shares;
  std::uint64_t total = 0;
  for (const auto& [v, c] : h) total += c;
  for (const auto& [v, c] : h) {
    if (c == 0) continue;
    for (std::uint64_t i = 0; i < c; ++i) raw.push_back(static_cast<double>(v));
    distinct.push_back(static_cast<double>(v));
    shares.push_back(static_cast<double>(c) / static_cast<double>(total));
  }
  std::map<double, int> freq;
  for (double x : raw) ++freq[x];
  double mode = raw.front();
  int best = 0;
  for (const auto& [v, c] : freq)
    if (c > best) best = c, mode = v;

  std::array<double, 30> p{};
  const Reference r = reference(raw), d = reference(distinct), s = reference(shares);
  p[0] = *std::min_element(raw.begin(), raw.end());
  p[1] = *std::max_element(raw.begin(), raw.end());
  p[2] = r.mean, p[3] = mode, p[4] = r.qm, p[5] = r.kurt, p[6] = r.sd, p[7] = r.skew, p[8] = r.var;
  p[9] = percentile(raw, 98), p[10] = percentile(raw, 2), p[11] = percentile(raw, 75), p[12] = percentile(raw, 25);
  p[13] = static_cast<double>(distinct.size());
  p[14] = d.mean, p[15] = d.qm, p[16] = d.kurt, p[17] = d.sd, p[18] = d.skew, p[19] = d.var;
  p[20] = *std::min_element(shares.begin(), shares.end());
  p[21] = *std::max_element(shares.begin(), shares.end());
  p[22] = 0, p[23] = 0;
  for (const auto& [v, c] : h) {
    if (v == 0) p[22] = static_cast<double>(c) / static_cast<double>(total);
    if (v == 1) p[23] = static_cast<double>(c) / static_cast<double>(total);
  }
  p[24] = s.mean, p[25] = s.qm, p[26] = s.kurt, p[27] = s.sd, p[28] = s.skew, p[29] = s.var;
  return p;
}

CardinalityHistogram random_hist(Rng& rng) {
  CardinalityHistogram h;
  const std::size_t buckets = 1 + rng.below(8);
  std::uint64_t mass = 0;
  for (std::size_t i = 0; i < buckets; ++i) {
    const std::uint64_t c = 1 + rng.below(rng.below(2) ? 5 : 1500);
    h[rng.below(12)] += c;
    mass += c;
  }
  if (mass < 2) h[rng.below(12)] += 1;
  return h;
}

Dataset imbalanced(std::size_t minority, std::size_t majority, std::size_t width, std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < minority + majority; ++i) {
    const bool pos = i % (minority + majority) < minority;
    std::vector<double> row(width);
    for (auto& v : row) v = rng.normal() + (pos ? 3.0 : 0.0);
    d.add(std::move(row), pos ? "MIN0" : "MIN1+");
  }
  return d;
}

}  // namespace

TEST(CardinalityFeatures, ReferenceExample) {
  const auto f = cardinality_features(union_hist);
  const std::vector<std::pair<int, double>> reference{
      {1, 0},        {2, 4},       {3, 0.16445},  {4, 0},       {5, 0.44972},  {6, 13.7897}, {7, 0.41868},
      {8, 3.09484},  {9, 0.17529}, {10, 1},       {11, 0},      {12, 0},       {13, 0},      {14, 5},
      {16, 2.4495},  {17, -1.2},   {18, 1.5811},  {19, 0},      {20, 2.5},     {21, 0.0010}, {22, 0.8488},
      {23, 0.8488},  {24, 0.1429}, {25, 0.2},     {26, 0.3849}, {28, 0.3677},  {29, 2.0948}, {30, 0.1352}};
  for (const auto& [i, v] : reference) EXPECT_NEAR(f.p(i), v, 1e-3) << "p" << i;
}

// Two reference entries disagree with their definitions; the computed values are frozen instead.
TEST(CardinalityFeatures, DisputedEntriesFollowDefinition) {
  const auto f = cardinality_features(union_hist);
  EXPECT_DOUBLE_EQ(f.p(15), 2.0);
  const auto oracle = expansion_oracle(union_hist);
  EXPECT_NEAR(f.p(27), oracle[26], 1e-9);
  EXPECT_NEAR(f.p(27), 4.427628, 1e-5);
}

TEST(CardinalityFeatures, SmallExpansionOracle) {
  const CardinalityHistogram h{{0, 2}, {1, 1}, {2, 1}};
  const auto f = cardinality_features(h);
  const auto o = expansion_oracle(h);
  for (std::size_t i = 0; i < 30; ++i) EXPECT_NEAR(f.values[i], o[i], 1e-12) << "p" << i + 1;
  EXPECT_DOUBLE_EQ(f.p(3), 0.75);
  EXPECT_DOUBLE_EQ(f.p(9), 11.0 / 12.0);
}

TEST(CardinalityFeatures, ConstantDistribution) {
  for (std::uint64_t n : {2, 3, 17, 1000}) {
    const auto f = cardinality_features({{1, n}});
    EXPECT_EQ(f.p(1), 1);
    EXPECT_EQ(f.p(2), 1);
    EXPECT_EQ(f.p(3), 1);
    EXPECT_EQ(f.p(4), 1);
    EXPECT_EQ(f.p(9), 0);
    EXPECT_EQ(f.p(8), 0);
    EXPECT_EQ(f.p(6), 0);
    EXPECT_EQ(f.p(23), 0);
    EXPECT_EQ(f.p(24), 1);
  }
}

TEST(CardinalityFeatures, Errors) {
  auto code = [](const CardinalityHistogram& h) {
    try {
      cardinality_features(h);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  EXPECT_EQ(code({}), ErrorCode::EmptyHistogram);
  EXPECT_EQ(code({{3, 0}}), ErrorCode::EmptyHistogram);
  EXPECT_EQ(code({{3, 1}}), ErrorCode::SingleObservation);
}

TEST(CardinalityFeatures, ModeTiesGoToSmallestValue) {
  EXPECT_EQ(cardinality_features({{1, 5}, {3, 5}, {7, 2}}).p(4), 1);
  EXPECT_EQ(cardinality_features({{2, 3}, {5, 4}, {6, 4}}).p(4), 5);
}

// Property: agreement with the brute-force expansion on random histograms.
TEST(CardinalityFeatures, MatchesExpansionOracle) {
  Rng rng(101);
  for (int trial = 0; trial < 400; ++trial) {
    const CardinalityHistogram h = random_hist(rng);
    ASSERT_LE(histogram_mass(h), 10000u);
    const auto f = cardinality_features(h);
    const auto o = expansion_oracle(h);
    for (std::size_t i = 0; i < 30; ++i)
      ASSERT_NEAR(f.values[i], o[i], 1e-9 * std::max(1.0, std::fabs(o[i]))) << "trial " << trial << " p" << i + 1;
  }
}

// Property: ordering and share invariants of the vector.
TEST(CardinalityFeatures, VectorInvariants) {
  Rng rng(202);
  for (int trial = 0; trial < 400; ++trial) {
    const CardinalityHistogram h = random_hist(rng);
    const auto f = cardinality_features(h);
    EXPECT_LE(f.p(1), f.p(11));
    EXPECT_LE(f.p(11), f.p(13));
    EXPECT_LE(f.p(13), f.p(12));
    EXPECT_LE(f.p(12), f.p(10));
    EXPECT_LE(f.p(10), f.p(2));
    EXPECT_LE(f.p(21), f.p(22));
    EXPECT_LE(f.p(22), 1.0);
    EXPECT_NEAR(f.p(25), 1.0 / f.p(14), 1e-12);
    double share_sum = 0;
    const double n = static_cast<double>(histogram_mass(h));
    for (const auto& [v, c] : h) share_sum += static_cast<double>(c) / n;
    EXPECT_NEAR(share_sum, 1.0, 1e-12);
  }
}

TEST(RangeFeatures, Shares) {
  PropertyStats web;
  web.property = "http://dbpedia.org/ontology/Web";
  web.freq = 10000;
  web.node_kinds.iri_total = 7313;
  web.node_kinds.literal_total = 2687;
  web.node_kinds.iri_distinct = 7000;
  web.node_kinds.literal_distinct = 2000;
  web.datatype_hist["http://www.w3.org/2001/XMLSchema#string"] = {2687, 2000};
  const auto r = range_features(web);
  ASSERT_EQ(r.size(), range_feature_names.size());
  EXPECT_NEAR(r[0], 0.7313, 1e-12);
  EXPECT_NEAR(r[0] + r[1] + r[2], 1.0, 1e-12);
  EXPECT_EQ(r[6], 1.0);

  PropertyStats death;
  death.freq = 65399;
  death.node_kinds.iri_total = 127;
  death.node_kinds.literal_total = 65272;
  EXPECT_NEAR(range_features(death)[0], 0.00194, 1e-5);
  EXPECT_DOUBLE_EQ(range_features(death)[0], 127.0 / 65399.0);

  PropertyStats lit;
  lit.freq = 4;
  lit.node_kinds.literal_total = 4;
  lit.node_kinds.literal_distinct = 4;
  const auto l = range_features(lit);
  EXPECT_EQ(l[1], 1.0);
  EXPECT_EQ(l[0], 0.0);

  try {
    range_features(PropertyStats{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroFrequency);
  }
}

// Property: shares lie in [0,1] and the node kinds sum to one.
TEST(RangeFeatures, SharesOnGeneratedProfiles) {
  const auto ts = kbq::testing::generate_corpus({.triples = 3000, .subjects = 200, .seed = 12});
  const KBProfile kb = profile_snapshot(kbq::testing::snapshot_of(ts));
  for (const auto& [c, cp] : kb.classes)
    for (const auto& [p, ps] : cp.properties) {
      const auto r = range_features(ps);
      for (double v : r) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
      EXPECT_NEAR(r[0] + r[1] + r[2], 1.0, 1e-12);
    }
}

TEST(StringQuartiles, Examples) {
  LengthHistogram eight;
  for (std::uint64_t len = 1; len <= 8; ++len) eight[len] = 1;
  EXPECT_EQ(string_quartiles(eight), (StringLengthSummary{2, 6, 1, 8}));
  EXPECT_EQ(string_quartiles({{5, 1}}), (StringLengthSummary{5, 5, 5, 5}));
  EXPECT_EQ(string_quartiles({{5, 9999}}), (StringLengthSummary{5, 5, 5, 5}));
  try {
    string_quartiles({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyHistogram);
  }
}

TEST(StringQuartiles, TitleHistogramMatchesSortOracle) {
  const LengthHistogram title{{16, 20}, {13, 7}, {15, 5}, {20, 4}};
  std::vector<double> expanded;
  for (const auto& [len, c] : title)
    for (std::uint64_t i = 0; i < c; ++i) expanded.push_back(static_cast<double>(len));
  const auto q = string_quartiles(title);
  EXPECT_EQ(static_cast<double>(q.q1), percentile(expanded, 25));
  EXPECT_EQ(static_cast<double>(q.q3), percentile(expanded, 75));
  EXPECT_EQ(q.q1, 15u);
  EXPECT_EQ(q.q3, 16u);
  EXPECT_EQ(q.min, 13u);
  EXPECT_EQ(q.max, 20u);
}

// Property: quartiles are observed values and ordered.
TEST(StringQuartiles, QuartilesAreObservations) {
  Rng rng(303);
  for (int trial = 0; trial < 500; ++trial) {
    LengthHistogram h;
    const std::size_t buckets = 1 + rng.below(10);
    for (std::size_t i = 0; i < buckets; ++i) h[rng.below(80)] += 1 + rng.below(30);
    const auto q = string_quartiles(h);
    EXPECT_TRUE(h.count(q.q1));
    EXPECT_TRUE(h.count(q.q3));
    EXPECT_LE(q.min, q.q1);
    EXPECT_LE(q.q1, q.q3);
    EXPECT_LE(q.q3, q.max);
    std::vector<double> expanded;
    for (const auto& [len, c] : h)
      for (std::uint64_t i = 0; i < c; ++i) expanded.push_back(static_cast<double>(len));
    EXPECT_EQ(static_cast<double>(q.q1), percentile(expanded, 25));
    EXPECT_EQ(static_cast<double>(q.q3), percentile(expanded, 75));
  }
}

TEST(CardinalityLabels, Examples) {
  EXPECT_EQ(observed_cardinality_labels({{0, 3}, {1, 2}, {2, 1}}), (CardinalityLabels{"MIN0", "MAX1+"}));
  EXPECT_EQ(observed_cardinality_labels({{1, 40}}), (CardinalityLabels{"MIN1", "MAX1"}));
  EXPECT_EQ(observed_cardinality_labels({{2, 4}, {3, 1}}), (CardinalityLabels{"MIN1+", "MAX1+"}));
  EXPECT_EQ(observed_cardinality_labels({{0, 1355038}, {1, 404069}, {2, 8165}}), (CardinalityLabels{"MIN0", "MAX1+"}));
  EXPECT_THROW(observed_cardinality_labels({}), Error);
}

TEST(Smote, BalancesTenToForty) {
  const Dataset d = imbalanced(10, 40, 4, 1);
  const Dataset out = smote(d, {100, 200, 5, 7});
  const auto counts = out.class_counts();
  EXPECT_EQ(counts.at("MIN0"), 20u);
  EXPECT_EQ(counts.at("MIN1+"), 20u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(out.x[i], d.x[i]);
}

TEST(Smote, Errors) {
  auto code = [](const Dataset& d, SmoteParams p) {
    try {
      smote(d, p);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  EXPECT_EQ(code(imbalanced(5, 20, 2, 1), {}), ErrorCode::TooFewMinority);
  Dataset three = imbalanced(10, 20, 2, 1);
  three.add({0, 0}, "MAX1");
  EXPECT_EQ(code(three, {}), ErrorCode::NotBinary);
  EXPECT_EQ(code(imbalanced(10, 20, 2, 1), {150, 200, 5, 0}), ErrorCode::InvalidArgument);
  EXPECT_EQ(code(imbalanced(10, 20, 2, 1), {100, 200, 0, 0}), ErrorCode::InvalidArgument);
}

TEST(Smote, MinorityTieBreak) {
  Dataset d;
  d.add({0}, "b");
  d.add({1}, "a");
  EXPECT_EQ(minority_label(d), "a");
}

// Property: exact balance, doubled minority and betweenness on random datasets.
TEST(Smote, BalanceAndBetweenness) {
  Rng rng(404);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t m = 6 + rng.below(40);
    const std::size_t maj = m + rng.below(200);
    const Dataset d = imbalanced(m, maj, 1 + rng.below(6), rng.next());
    const std::string minority = minority_label(d);
    const Dataset out = smote(d, {100, 200, 5, rng.next()});
    const auto counts = out.class_counts();
    ASSERT_EQ(counts.at(minority), 2 * m);
    ASSERT_EQ(out.size(), 4 * m);

    std::vector<std::size_t> real;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.y[i] == minority) real.push_back(i);
    for (std::size_t s = m; s < 2 * m; ++s) {
      ASSERT_EQ(out.y[s], minority);
      const auto& base = d.x[real[s - m]];
      bool on_segment = false;
      for (std::size_t j : real) {
        bool inside = true;
        for (std::size_t f = 0; f < base.size(); ++f) {
          const double lo = std::min(base[f], d.x[j][f]), hi = std::max(base[f], d.x[j][f]);
          inside = inside && out.x[s][f] >= lo && out.x[s][f] <= hi;
        }
        on_segment = on_segment || (j != real[s - m] && inside);
      }
      EXPECT_TRUE(on_segment) << "trial " << trial << " synthetic row " << s;
    }
  }
}

TEST(Smote, TopsUpSmallMajority) {
  const Dataset d = imbalanced(10, 12, 3, 5);
  const Dataset out = smote(d, {100, 200, 5, 1});
  EXPECT_EQ(out.class_counts().at("MIN1+"), 20u);
  EXPECT_EQ(out.class_counts().at("MIN0"), 20u);
}

TEST(Smote, Deterministic) {
  const Dataset d = imbalanced(30, 100, 5, 3);
  const Dataset a = smote(d, {100, 200, 5, 99}), b = smote(d, {100, 200, 5, 99});
  EXPECT_EQ(a.x, b.x);
  EXPECT_EQ(a.y, b.y);
  const Dataset c = smote(d, {100, 200, 5, 100});
  EXPECT_NE(a.x, c.x);
}

TEST(Annotations, ReadsAndRejects) {
  std::istringstream ok("class,property,task,label\ndbo:Person,dbo:deathDate,min_card,MIN0\n");
  const auto rows = read_annotations(ok);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0], (Annotation{"dbo:Person", "dbo:deathDate", Task::MinCard, "MIN0"}));

  std::istringstream bad("class,property,task,label\ndbo:Person,dbo:deathDate,min_card,MIN0\ndbo:Person,dbo:x,min_card,MIN2\n");
  try {
    read_annotations(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownLabel);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
  std::istringstream missing("class,property,label\na,b,MIN0\n");
  try {
    read_annotations(missing);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
  }
}

TEST(Annotations, TrainingLabelFoldsMinOne) {
  EXPECT_EQ(training_label(Task::MinCard, "MIN1"), "MIN1+");
  EXPECT_EQ(training_label(Task::MinCard, "MIN0"), "MIN0");
  EXPECT_EQ(training_label(Task::MaxCard, "MAX1"), "MAX1");
}

TEST(Annotations, RoundTripOf174Properties) {
  Rng rng(174);
  std::vector<Annotation> rows;
  const std::vector<Task> tasks{Task::MinCard, Task::MaxCard, Task::Range};
  for (int i = 0; i < 174; ++i) {
    const Task t = tasks[rng.below(3)];
    const auto labels = annotation_labels(t);
    rows.push_back({"http://dbpedia.org/ontology/C" + std::to_string(i % 9), "http://dbpedia.org/ontology/p" + std::to_string(i),
                    t, std::string(labels[rng.below(labels.size())])});
  }
  rows[3].property = "http://x/with,comma \"quoted\"";
  const auto dir = kbq::testing::temp_dir("annotations");
  save_annotations(dir / "gold.csv", rows);
  const auto back = load_annotations(dir / "gold.csv");
  EXPECT_EQ(back.size(), 174u);
  EXPECT_EQ(back, rows);
}
