#pragma once

#include <cstdint>
#include <map>

namespace kbq {

// cardinality -> number of subjects with exactly that many values.
using CardinalityHistogram = std::map<std::uint64_t, std::uint64_t>;

// lexical length -> number of literals.
using LengthHistogram = std::map<std::uint64_t, std::uint64_t>;

template <typename Hist>
std::uint64_t histogram_mass(const Hist& h) {
  std::uint64_t n = 0;
  for (const auto& [k, c] : h) n += c;
  return n;
}

}  // namespace kbq
