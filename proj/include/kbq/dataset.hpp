#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "kbq/error.hpp"

namespace kbq {

// Feature rows with one string label each.
struct Dataset {
  std::vector<std::vector<double>> x;
  std::vector<std::string> y;

  std::size_t size() const noexcept { return y.size(); }
  std::size_t width() const noexcept { return x.empty() ? 0 : x.front().size(); }

  void add(std::vector<double> features, std::string label) {
    x.push_back(std::move(features));
    y.push_back(std::move(label));
  }

  // Sorted distinct labels.
  std::vector<std::string> labels() const {
    std::vector<std::string> out(y.begin(), y.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  std::map<std::string, std::size_t> class_counts() const {
    std::map<std::string, std::size_t> out;
    for (const auto& l : y) ++out[l];
    return out;
  }

  Dataset subset(const std::vector<std::size_t>& idx) const {
    Dataset d;
    d.x.reserve(idx.size());
    d.y.reserve(idx.size());
    for (std::size_t i : idx) d.add(x[i], y[i]);
    return d;
  }
};

inline void check_rectangular(const Dataset& d, std::string_view module) {
  if (d.x.size() != d.y.size())
    throw Error(std::string(module), ErrorCode::RaggedFeatures, "feature and label counts differ");
  for (std::size_t i = 0; i < d.x.size(); ++i)
    if (d.x[i].size() != d.x.front().size())
      throw Error(std::string(module), ErrorCode::RaggedFeatures,
                  "row " + std::to_string(i) + " has " + std::to_string(d.x[i].size()) + " features, expected " +
                      std::to_string(d.x.front().size()));
}

}  // namespace kbq
