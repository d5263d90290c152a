#pragma once

#include <algorithm>
#include <array>
#include <string>
#include <string_view>
#include <utility>

namespace kbq {

struct Prefix {
  std::string_view name;
  std::string_view ns;
};

inline constexpr std::array<Prefix, 19> known_prefixes{{
    {"dbo", "http://dbpedia.org/ontology/"},
    {"dbp", "http://dbpedia.org/property/"},
    {"dbr", "http://dbpedia.org/resource/"},
    {"dc", "http://purl.org/dc/elements/1.1/"},
    {"dcterms", "http://purl.org/dc/terms/"},
    {"dt", "http://dbpedia.org/datatype/"},
    {"dul", "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"},
    {"ex", "http://example.org/"},
    {"foaf", "http://xmlns.com/foaf/0.1/"},
    {"geo", "http://www.w3.org/2003/01/geo/wgs84_pos#"},
    {"lode", "http://linkedevents.org/ontology/"},
    {"owl", "http://www.w3.org/2002/07/owl#"},
    {"prov", "http://www.w3.org/ns/prov#"},
    {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
    {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
    {"schema", "http://schema.org/"},
    {"sh", "http://www.w3.org/ns/shacl#"},
    {"skos", "http://www.w3.org/2004/02/skos/core#"},
    {"xsd", "http://www.w3.org/2001/XMLSchema#"},
}};

inline const Prefix* find_prefix(std::string_view name) {
  for (const auto& p : known_prefixes)
    if (p.name == name) return &p;
  return nullptr;
}

namespace detail {

inline bool is_simple_local(std::string_view s) {
  if (s.empty() || s.front() == '-' || s.front() == '.' || s.back() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-' ||
           c == '.';
  });
}

}  // namespace detail

// Longest known namespace whose remainder is a plain local name, if any.
inline const Prefix* prefix_for(std::string_view iri) {
  const Prefix* best = nullptr;
  for (const auto& p : known_prefixes) {
    if (iri.size() > p.ns.size() && iri.substr(0, p.ns.size()) == p.ns &&
        detail::is_simple_local(iri.substr(p.ns.size())) && (!best || p.ns.size() > best->ns.size()))
      best = &p;
  }
  return best;
}

// "dbo:Person" for known namespaces, "<iri>" otherwise.
inline std::string compact_iri(std::string_view iri) {
  if (const Prefix* p = prefix_for(iri)) return std::string(p->name) + ":" + std::string(iri.substr(p->ns.size()));
  return "<" + std::string(iri) + ">";
}

// Accepts "<iri>", a prefixed name with a known prefix, or a bare IRI.
inline std::string expand_iri(std::string_view s) {
  if (s.size() >= 2 && s.front() == '<' && s.back() == '>') return std::string(s.substr(1, s.size() - 2));
  auto colon = s.find(':');
  if (colon != std::string_view::npos)
    if (const Prefix* p = find_prefix(s.substr(0, colon))) return std::string(p->ns) + std::string(s.substr(colon + 1));
  return std::string(s);
}

}  // namespace kbq
