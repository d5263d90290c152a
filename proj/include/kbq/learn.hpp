#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "kbq/dataset.hpp"
#include "kbq/error.hpp"
#include "kbq/random.hpp"

namespace kbq {

enum class Algorithm { RandomForest, NaiveBayes, Knn };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::RandomForest: return "random_forest";
    case Algorithm::NaiveBayes: return "naive_bayes";
    case Algorithm::Knn: return "knn";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "random_forest" || s == "rf") return Algorithm::RandomForest;
  if (s == "naive_bayes" || s == "nb") return Algorithm::NaiveBayes;
  if (s == "knn") return Algorithm::Knn;
  throw Error("learn", ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(s) + "'");
}

struct ClassifierSpec {
  Algorithm algorithm = Algorithm::RandomForest;
  int trees = 100;
  int max_depth = 0;           // 0 = unlimited
  int features_per_split = 0;  // 0 = ceil(sqrt(width))
  bool bootstrap = true;
  int k = 5;
  double var_smoothing = 1e-9;
  std::uint64_t seed = 0;
};

// A trained model. Immutable after training; safe to share across threads.
class Classifier {
 public:
  virtual ~Classifier() = default;

  std::string predict(std::span<const double> features) const {
    if (features.size() != width_)
      throw Error("learn", ErrorCode::WidthMismatch,
                  "expected " + std::to_string(width_) + " features, got " + std::to_string(features.size()));
    return labels_[predict_index(features)];
  }

  std::size_t width() const noexcept { return width_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 protected:
  Classifier(std::vector<std::string> labels, std::size_t width) : labels_(std::move(labels)), width_(width) {}
  virtual std::size_t predict_index(std::span<const double> features) const = 0;

  // Highest vote; ties go to the lower index, i.e. the smaller label.
  static std::size_t argmax(const std::vector<double>& votes) {
    return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }

  std::vector<std::string> labels_;
  std::size_t width_;
};

namespace detail {

struct Encoded {
  std::vector<std::string> labels;  // sorted
  std::vector<std::size_t> y;
};

inline Encoded encode_labels(const Dataset& d) {
  Encoded e{d.labels(), {}};
  e.y.reserve(d.size());
  for (const auto& l : d.y)
    e.y.push_back(static_cast<std::size_t>(std::lower_bound(e.labels.begin(), e.labels.end(), l) - e.labels.begin()));
  return e;
}

inline void validate_training_set(const Dataset& d) {
  if (d.size() == 0) throw Error("learn", ErrorCode::EmptyDataset, "training set is empty");
  check_rectangular(d, "learn");
  if (d.labels().size() < 2) throw Error("learn", ErrorCode::SingleClass, "training set has a single class");
}

}  // namespace detail

class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0;
    std::uint32_t left = 0, right = 0;
    std::uint32_t label = 0;
  };

  DecisionTree() = default;

  static DecisionTree fit(const std::vector<std::vector<double>>& x, const std::vector<std::size_t>& y,
                          std::size_t n_labels, std::vector<std::size_t> rows, std::size_t mtry, int max_depth,
                          Rng& rng) {
    DecisionTree t;
    Builder b{x, y, n_labels, mtry, max_depth, rng, t.nodes_};
    b.grow(rows, 0);
    return t;
  }

  std::size_t predict(std::span<const double> f) const {
    std::uint32_t i = 0;
    while (nodes_[i].feature >= 0)
      i = f[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    return nodes_[i].label;
  }

  std::size_t node_count() const noexcept { return nodes_.size(); }

 private:
  struct Builder {
    const std::vector<std::vector<double>>& x;
    const std::vector<std::size_t>& y;
    std::size_t n_labels;
    std::size_t mtry;
    int max_depth;
    Rng& rng;
    std::vector<Node>& nodes;

    static double gini(const std::vector<double>& counts, double n) {
      if (n == 0) return 0;
      double s = 1;
      for (double c : counts) s -= (c / n) * (c / n);
      return s;
    }

    std::uint32_t grow(std::vector<std::size_t>& rows, int depth) {
      const auto id = static_cast<std::uint32_t>(nodes.size());
      nodes.emplace_back();
      std::vector<double> counts(n_labels, 0.0);
      for (std::size_t r : rows) counts[y[r]] += 1;
      std::size_t majority = 0;
      for (std::size_t l = 1; l < n_labels; ++l)
        if (counts[l] > counts[majority]) majority = l;
      nodes[id].label = static_cast<std::uint32_t>(majority);

      const double n = static_cast<double>(rows.size());
      const double parent = gini(counts, n);
      if (parent == 0 || (max_depth > 0 && depth >= max_depth)) return id;

      const std::size_t width = x.front().size();
      std::vector<std::size_t> feats(width);
      std::iota(feats.begin(), feats.end(), std::size_t{0});
      const std::size_t take = std::min(mtry, width);
      for (std::size_t i = 0; i < take; ++i) std::swap(feats[i], feats[i + rng.below(width - i)]);

      double best_gain = 1e-12;
      int best_feature = -1;
      double best_threshold = 0;
      std::vector<std::size_t> order = rows;
      std::vector<double> left(n_labels), right(n_labels);
      for (std::size_t fi = 0; fi < take; ++fi) {
        const std::size_t f = feats[fi];
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
        std::fill(left.begin(), left.end(), 0.0);
        right = counts;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
          left[y[order[i]]] += 1;
          right[y[order[i]]] -= 1;
          const double lo = x[order[i]][f], hi = x[order[i + 1]][f];
          if (lo == hi) continue;
          const double nl = static_cast<double>(i + 1), nr = n - nl;
          const double gain = parent - (nl / n) * gini(left, nl) - (nr / n) * gini(right, nr);
          if (gain > best_gain) {
            best_gain = gain;
            best_feature = static_cast<int>(f);
            best_threshold = lo + (hi - lo) / 2;
            if (!(best_threshold < hi)) best_threshold = lo;
          }
        }
      }
      if (best_feature < 0) return id;

      std::vector<std::size_t> lrows, rrows;
      for (std::size_t r : rows)
        (x[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? lrows : rrows).push_back(r);
      rows.clear();
      rows.shrink_to_fit();
      const std::uint32_t l = grow(lrows, depth + 1);
      const std::uint32_t r = grow(rrows, depth + 1);
      nodes[id].feature = best_feature;
      nodes[id].threshold = best_threshold;
      nodes[id].left = l;
      nodes[id].right = r;
      return id;
    }
  };

  std::vector<Node> nodes_;
};

class RandomForest : public Classifier {
 public:
  RandomForest(const Dataset& d, const ClassifierSpec& spec) : Classifier({}, 0) {
    detail::validate_training_set(d);
    auto enc = detail::encode_labels(d);
    labels_ = std::move(enc.labels);
    width_ = d.width();
    if (spec.trees < 1) throw Error("learn", ErrorCode::InvalidArgument, "trees must be >= 1");
    const std::size_t mtry = spec.features_per_split > 0
                                 ? static_cast<std::size_t>(spec.features_per_split)
                                 : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(width_))));
    const std::size_t n = d.size();
    trees_.reserve(static_cast<std::size_t>(spec.trees));
    for (int t = 0; t < spec.trees; ++t) {
      Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(t)));
      std::vector<std::size_t> rows(n);
      if (spec.bootstrap)
        for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
      else
        std::iota(rows.begin(), rows.end(), std::size_t{0});
      trees_.push_back(DecisionTree::fit(d.x, enc.y, labels_.size(), std::move(rows), std::max<std::size_t>(1, mtry),
                                         spec.max_depth, rng));
    }
  }

  std::size_t tree_count() const noexcept { return trees_.size(); }

 protected:
  std::size_t predict_index(std::span<const double> f) const override {
    std::vector<double> votes(labels_.size(), 0.0);
    for (const auto& t : trees_) votes[t.predict(f)] += 1;
    return argmax(votes);
  }

 private:
  std::vector<DecisionTree> trees_;
};

// Gaussian Naive Bayes. Every variance is inflated by eps * (largest
// per-feature variance of the training set) to keep likelihoods finite.
class NaiveBayes : public Classifier {
 public:
  NaiveBayes(const Dataset& d, const ClassifierSpec& spec) : Classifier({}, 0) {
    detail::validate_training_set(d);
    auto enc = detail::encode_labels(d);
    labels_ = std::move(enc.labels);
    width_ = d.width();
    const std::size_t c = labels_.size(), w = width_;
    const double n = static_cast<double>(d.size());

    double max_var = 0;
    for (std::size_t j = 0; j < w; ++j) {
      double mean = 0, sq = 0;
      for (const auto& row : d.x) mean += row[j];
      mean /= n;
      for (const auto& row : d.x) sq += (row[j] - mean) * (row[j] - mean);
      max_var = std::max(max_var, sq / n);
    }
    double eps = spec.var_smoothing * max_var;
    if (eps <= 0) eps = std::numeric_limits<double>::min();

    std::vector<double> count(c, 0.0);
    mean_.assign(c, std::vector<double>(w, 0.0));
    var_.assign(c, std::vector<double>(w, 0.0));
    for (std::size_t i = 0; i < d.size(); ++i) {
      count[enc.y[i]] += 1;
      for (std::size_t j = 0; j < w; ++j) mean_[enc.y[i]][j] += d.x[i][j];
    }
    for (std::size_t l = 0; l < c; ++l)
      for (std::size_t j = 0; j < w; ++j) mean_[l][j] /= count[l];
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < w; ++j) {
        const double t = d.x[i][j] - mean_[enc.y[i]][j];
        var_[enc.y[i]][j] += t * t;
      }
    log_prior_.resize(c);
    for (std::size_t l = 0; l < c; ++l) {
      log_prior_[l] = std::log(count[l] / n);
      for (std::size_t j = 0; j < w; ++j) var_[l][j] = var_[l][j] / count[l] + eps;
    }
  }

  // Unnormalized log posterior per label.
  std::vector<double> log_posterior(std::span<const double> f) const {
    std::vector<double> out(labels_.size());
    for (std::size_t l = 0; l < labels_.size(); ++l) {
      double s = log_prior_[l];
      for (std::size_t j = 0; j < width_; ++j) {
        const double t = f[j] - mean_[l][j];
        s -= 0.5 * std::log(2 * 3.141592653589793 * var_[l][j]) + t * t / (2 * var_[l][j]);
      }
      out[l] = s;
    }
    return out;
  }

 protected:
  std::size_t predict_index(std::span<const double> f) const override { return argmax(log_posterior(f)); }

 private:
  std::vector<double> log_prior_;
  std::vector<std::vector<double>> mean_, var_;
};

// k nearest neighbours on z-scored features (constant features keep scale 1).
class Knn : public Classifier {
 public:
  Knn(const Dataset& d, const ClassifierSpec& spec) : Classifier({}, 0) {
    detail::validate_training_set(d);
    if (spec.k < 1 || spec.k % 2 == 0) throw Error("learn", ErrorCode::InvalidArgument, "k must be odd and >= 1");
    auto enc = detail::encode_labels(d);
    labels_ = std::move(enc.labels);
    width_ = d.width();
    y_ = std::move(enc.y);
    k_ = std::min<std::size_t>(static_cast<std::size_t>(spec.k), d.size());
    const double n = static_cast<double>(d.size());
    center_.assign(width_, 0.0);
    scale_.assign(width_, 1.0);
    for (std::size_t j = 0; j < width_; ++j) {
      double mean = 0, sq = 0;
      for (const auto& row : d.x) mean += row[j];
      mean /= n;
      for (const auto& row : d.x) sq += (row[j] - mean) * (row[j] - mean);
      const double sd = std::sqrt(sq / n);
      center_[j] = mean;
      scale_[j] = sd > 0 ? sd : 1.0;
    }
    x_.reserve(d.size());
    for (const auto& row : d.x) x_.push_back(standardize(row));
  }

 protected:
  std::size_t predict_index(std::span<const double> f) const override {
    const auto q = standardize(f);
    std::vector<std::pair<double, std::size_t>> dist(x_.size());
    for (std::size_t i = 0; i < x_.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < width_; ++j) s += (x_[i][j] - q[j]) * (x_[i][j] - q[j]);
      dist[i] = {s, i};
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<double> votes(labels_.size(), 0.0);
    for (std::size_t i = 0; i < k_; ++i) votes[y_[dist[i].second]] += 1;
    return argmax(votes);
  }

 private:
  std::vector<double> standardize(std::span<const double> f) const {
    std::vector<double> out(width_);
    for (std::size_t j = 0; j < width_; ++j) out[j] = (f[j] - center_[j]) / scale_[j];
    return out;
  }

  std::vector<std::vector<double>> x_;
  std::vector<std::size_t> y_;
  std::vector<double> center_, scale_;
  std::size_t k_ = 1;
};

inline std::unique_ptr<Classifier> train(const ClassifierSpec& spec, const Dataset& d) {
  switch (spec.algorithm) {
    case Algorithm::RandomForest: return std::make_unique<RandomForest>(d, spec);
    case Algorithm::NaiveBayes: return std::make_unique<NaiveBayes>(d, spec);
    case Algorithm::Knn: return std::make_unique<Knn>(d, spec);
  }
  throw Error("learn", ErrorCode::InvalidArgument, "unknown algorithm");
}

struct ConfusionCounts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp, fp += o.fp, tn += o.tn, fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
  double precision = 0, recall = 0, f1 = 0;
};

// Degenerate denominators give 0 rather than NaN.
inline Metrics metrics(const ConfusionCounts& c) {
  Metrics m;
  if (c.tp + c.fp > 0) m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0) m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  // 2PR/(P+R) reduced to counts; one rounding instead of three.
  if (c.tp > 0) m.f1 = static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  return m;
}

// Stratified assignment of rows to folds. Each class is shuffled and dealt
// round-robin; the dealing position carries over between classes so fold
// sizes stay within one of each other.
inline std::vector<std::vector<std::size_t>> stratified_folds(const Dataset& d, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw Error("learn", ErrorCode::InvalidArgument, "need at least 2 folds");
  const auto counts = d.class_counts();
  for (const auto& [label, n] : counts)
    if (n < folds)
      throw Error("learn", ErrorCode::TooFewPerClass,
                  "class '" + label + "' has " + std::to_string(n) + " rows, fewer than " + std::to_string(folds) +
                      " folds");
  std::vector<std::vector<std::size_t>> out(folds);
  std::size_t offset = 0;
  std::uint64_t stream = 0;
  for (const auto& [label, n] : counts) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.y[i] == label) idx.push_back(i);
    Rng rng(derive_seed(seed, stream++));
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) out[(offset + j) % folds].push_back(idx[j]);
    offset += idx.size();
  }
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

struct EvaluationReport {
  std::string task;
  std::string algorithm;
  std::size_t folds = 0;
  std::string positive_class;
  std::vector<ConfusionCounts> per_fold;
  ConfusionCounts pooled;
  Metrics metrics;
};

using Trainer = std::function<std::unique_ptr<Classifier>(const Dataset&, std::uint64_t seed)>;

inline EvaluationReport cross_validate(const Trainer& trainer, const Dataset& d, std::size_t folds,
                                       const std::string& positive_class, std::uint64_t seed) {
  if (d.size() == 0) throw Error("learn", ErrorCode::EmptyDataset, "dataset is empty");
  check_rectangular(d, "learn");
  const auto labels = d.labels();
  if (std::find(labels.begin(), labels.end(), positive_class) == labels.end())
    throw Error("learn", ErrorCode::UnknownLabel, "positive class '" + positive_class + "' does not occur");

  EvaluationReport rep;
  rep.folds = folds;
  rep.positive_class = positive_class;
  const auto parts = stratified_folds(d, folds, derive_seed(seed, 0xf01d));
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds; ++g)
      if (g != f) train_idx.insert(train_idx.end(), parts[g].begin(), parts[g].end());
    std::sort(train_idx.begin(), train_idx.end());
    const auto model = trainer(d.subset(train_idx), derive_seed(seed, f + 1));
    ConfusionCounts c;
    for (std::size_t i : parts[f]) {
      const bool actual = d.y[i] == positive_class;
      const bool predicted = model->predict(d.x[i]) == positive_class;
      if (actual && predicted) ++c.tp;
      else if (!actual && predicted) ++c.fp;
      else if (actual) ++c.fn;
      else ++c.tn;
    }
    rep.per_fold.push_back(c);
    rep.pooled += c;
  }
  rep.metrics = metrics(rep.pooled);
  return rep;
}

inline EvaluationReport cross_validate(const ClassifierSpec& spec, const Dataset& d, std::size_t folds,
                                       const std::string& positive_class) {
  auto rep = cross_validate(
      [&](const Dataset& train_set, std::uint64_t s) {
        ClassifierSpec fold_spec = spec;
        fold_spec.seed = s;
        return train(fold_spec, train_set);
      },
      d, folds, positive_class, spec.seed);
  rep.algorithm = std::string(to_string(spec.algorithm));
  return rep;
}

inline nlohmann::ordered_json to_json(const EvaluationReport& r, const std::string& provenance = {}) {
  nlohmann::ordered_json j;
  j["task"] = r.task;
  j["algorithm"] = r.algorithm;
  j["folds"] = r.folds;
  j["positive_class"] = r.positive_class;
  j["precision"] = r.metrics.precision;
  j["recall"] = r.metrics.recall;
  j["f1"] = r.metrics.f1;
  auto& pf = j["per_fold"] = nlohmann::ordered_json::array();
  for (const auto& c : r.per_fold) pf.push_back({{"tp", c.tp}, {"fp", c.fp}, {"tn", c.tn}, {"fn", c.fn}});
  if (!provenance.empty()) j["provenance"] = provenance;
  return j;
}

}  // namespace kbq
