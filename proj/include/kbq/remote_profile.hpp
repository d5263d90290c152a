#pragma once

#include <algorithm>
#include <atomic>
#include <future>
#include <string>
#include <vector>

#include "kbq/profiler.hpp"
#include "kbq/sparql.hpp"

namespace kbq {

namespace detail {

inline Counts counts_row(const std::map<std::string, Term>& row) {
  auto total = row.find("total");
  auto distinct = row.find("distinct");
  if (total == row.end() || distinct == row.end())
    throw Error("acquisition", ErrorCode::MissingBinding, "aggregate row lacks ?total or ?distinct");
  return {literal_to_count(total->second, "total"), literal_to_count(distinct->second, "distinct")};
}

inline PropertyStats remote_property_stats(const SparqlClient& client, const std::string& cls, const std::string& prop) {
  PropertyStats ps;
  ps.property = prop;
  ps.freq = client.freq(cls, prop);
  ps.cardinality_hist = client.cardinality_histogram(cls, prop);
  for (const auto& [card, n] : ps.cardinality_hist)
    if (card > 0) ps.distinct_subjects += n;

  for (const auto& row : client.select(query::node_kinds(cls, prop)).rows) {
    auto kind = row.find("kind");
    if (kind == row.end()) throw Error("acquisition", ErrorCode::MissingBinding, "node kind row lacks ?kind");
    const Counts c = counts_row(row);
    const std::string& k = kind->second.value();
    if (k == "IRI") ps.node_kinds.iri_total = c.total, ps.node_kinds.iri_distinct = c.distinct;
    else if (k == "Literal") ps.node_kinds.literal_total = c.total, ps.node_kinds.literal_distinct = c.distinct;
    else if (k == "BlankNode") ps.node_kinds.blank_total = c.total, ps.node_kinds.blank_distinct = c.distinct;
    else throw Error("acquisition", ErrorCode::MalformedResult, "unexpected node kind '" + k + "'");
  }
  for (const auto& row : client.select(query::datatypes(cls, prop)).rows) {
    auto dt = row.find("datatype");
    ps.datatype_hist[dt == row.end() ? vocab::xsd_string : dt->second.value()] = counts_row(row);
  }
  for (const auto& row : client.select(query::object_classes(cls, prop)).rows) {
    auto c = row.find("class");
    if (c == row.end()) ps.object_class_unknown = counts_row(row);
    else ps.object_class_hist[c->second.value()] = counts_row(row);
  }
  for (const auto& row : client.select(query::string_lengths(cls, prop)).rows) {
    auto len = row.find("length");
    auto cnt = row.find("count");
    if (len == row.end() || cnt == row.end())
      throw Error("acquisition", ErrorCode::MissingBinding, "length row lacks ?length or ?count");
    ps.string_length_hist[literal_to_count(len->second, "length")] = literal_to_count(cnt->second, "count");
  }
  return ps;
}

}  // namespace detail

// Profiles one class through SPARQL queries. Per-property queries run
// concurrently, bounded by the client's in-flight limit.
inline ClassProfile profile_class_remote(const SparqlClient& client, const std::string& cls, std::string release,
                                         ProfileOptions opts = {}) {
  ClassProfile cp;
  cp.class_iri = cls;
  cp.release = std::move(release);
  cp.entity_count = client.count(cls);
  cp.type_assertions = client.count_all(cls);
  if (cp.entity_count == 0) return cp;

  std::vector<std::string> props;
  for (const auto& row : client.select(query::properties(cls)).rows) {
    auto p = row.find("p");
    if (p == row.end() || !p->second.is_iri()) throw Error("acquisition", ErrorCode::MalformedResult, "bad ?p binding");
    if (!opts.include_type && p->second.value() == vocab::rdf_type) continue;
    props.push_back(p->second.value());
  }
  std::vector<PropertyStats> stats(props.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < props.size(); i = next++) stats[i] = detail::remote_property_stats(client, cls, props[i]);
  };
  std::vector<std::future<void>> workers;
  const std::size_t n_workers = std::min<std::size_t>(props.size(), static_cast<std::size_t>(client.max_in_flight()));
  for (std::size_t w = 0; w < n_workers; ++w) workers.push_back(std::async(std::launch::async, worker));
  for (auto& w : workers) w.wait();
  for (auto& w : workers) w.get();
  for (auto& ps : stats) cp.properties.emplace(ps.property, std::move(ps));
  cp.np = cp.properties.size();
  return cp;
}

}  // namespace kbq
