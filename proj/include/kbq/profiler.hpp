#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "kbq/error.hpp"
#include "kbq/histogram.hpp"
#include "kbq/snapshot.hpp"

namespace kbq {

struct Counts {
  std::uint64_t total = 0;
  std::uint64_t distinct = 0;
  friend bool operator==(const Counts&, const Counts&) = default;
};

struct NodeKindCounts {
  std::uint64_t iri_total = 0, iri_distinct = 0;
  std::uint64_t literal_total = 0, literal_distinct = 0;
  std::uint64_t blank_total = 0, blank_distinct = 0;
  friend bool operator==(const NodeKindCounts&, const NodeKindCounts&) = default;
};

// Statistics of one property over the instances of one class.
struct PropertyStats {
  std::string property;
  std::uint64_t freq = 0;
  std::uint64_t distinct_subjects = 0;
  CardinalityHistogram cardinality_hist;  // includes the zero bucket
  NodeKindCounts node_kinds;
  std::map<std::string, Counts> datatype_hist;
  // Classes of IRI and blank-node objects. An object with several types
  // counts once under each; untyped objects go to object_class_unknown.
  std::map<std::string, Counts> object_class_hist;
  Counts object_class_unknown;
  LengthHistogram string_length_hist;  // xsd:string and rdf:langString only

  friend bool operator==(const PropertyStats&, const PropertyStats&) = default;
};

struct ClassProfile {
  std::string class_iri;
  std::string release;
  std::uint64_t entity_count = 0;     // distinct typed subjects
  std::uint64_t type_assertions = 0;  // rdf:type triples, duplicates included
  std::uint64_t np = 0;
  std::map<std::string, PropertyStats> properties;

  friend bool operator==(const ClassProfile&, const ClassProfile&) = default;
};

struct KBProfile {
  std::string release;
  std::map<std::string, ClassProfile> classes;

  const ClassProfile* find(const std::string& cls) const {
    auto it = classes.find(cls);
    return it == classes.end() ? nullptr : &it->second;
  }
  friend bool operator==(const KBProfile&, const KBProfile&) = default;
};

struct ProfileOptions {
  bool include_type = false;
};

inline bool is_string_datatype(const std::string& dt) { return dt == vocab::xsd_string || dt == vocab::rdf_lang_string; }

inline ClassProfile profile_class(const Snapshot& snap, const std::string& class_iri, ProfileOptions opts = {}) {
  ClassProfile cp;
  cp.class_iri = class_iri;
  cp.release = snap.release_id();
  auto cls = snap.find(Term::iri(class_iri));
  if (!cls) return cp;

  const auto subjects = snap.subjects_of_type(*cls);
  cp.entity_count = subjects.size();
  cp.type_assertions = snap.type_assertions(*cls);
  const std::optional<TermId> type_pred = snap.rdf_type_id();

  struct Accumulator {
    PropertyStats stats;
    std::unordered_set<TermId> iri_objects, literal_objects, blank_objects;
    std::map<std::string, std::unordered_set<TermId>> datatype_objects;
    std::map<TermId, std::unordered_set<TermId>> class_objects;
    std::unordered_set<TermId> unknown_objects;
  };
  std::unordered_map<TermId, Accumulator> acc;
  std::unordered_map<TermId, std::uint64_t> per_subject;

  for (TermId subject : subjects) {
    per_subject.clear();
    for (std::size_t idx : snap.by_subject(subject)) {
      const EncodedTriple& t = snap.triples()[idx];
      if (!opts.include_type && type_pred && t.p == *type_pred) continue;
      ++per_subject[t.p];
      Accumulator& a = acc[t.p];
      PropertyStats& ps = a.stats;
      ++ps.freq;
      const Term& obj = snap.term(t.o);
      switch (obj.kind()) {
        case TermKind::Literal: {
          ++ps.node_kinds.literal_total;
          a.literal_objects.insert(t.o);
          ++ps.datatype_hist[obj.datatype()].total;
          a.datatype_objects[obj.datatype()].insert(t.o);
          if (is_string_datatype(obj.datatype())) ++ps.string_length_hist[utf8_length(obj.value())];
          continue;
        }
        case TermKind::IRI:
          ++ps.node_kinds.iri_total;
          a.iri_objects.insert(t.o);
          break;
        case TermKind::BlankNode:
          ++ps.node_kinds.blank_total;
          a.blank_objects.insert(t.o);
          break;
      }
      const auto types = snap.types_of(t.o);
      if (types.empty()) {
        ++ps.object_class_unknown.total;
        a.unknown_objects.insert(t.o);
      }
      for (TermId c : types) {
        ++ps.object_class_hist[snap.term(c).value()].total;
        a.class_objects[c].insert(t.o);
      }
    }
    for (const auto& [p, n] : per_subject) {
      PropertyStats& ps = acc[p].stats;
      ++ps.cardinality_hist[n];
      ++ps.distinct_subjects;
    }
  }

  for (auto& [p, a] : acc) {
    PropertyStats& ps = a.stats;
    ps.property = snap.term(p).value();
    if (cp.entity_count > ps.distinct_subjects) ps.cardinality_hist[0] = cp.entity_count - ps.distinct_subjects;
    ps.node_kinds.iri_distinct = a.iri_objects.size();
    ps.node_kinds.literal_distinct = a.literal_objects.size();
    ps.node_kinds.blank_distinct = a.blank_objects.size();
    for (auto& [dt, objs] : a.datatype_objects) ps.datatype_hist[dt].distinct = objs.size();
    for (auto& [c, objs] : a.class_objects) ps.object_class_hist[snap.term(c).value()].distinct = objs.size();
    ps.object_class_unknown.distinct = a.unknown_objects.size();
    cp.properties.emplace(ps.property, std::move(ps));
  }
  cp.np = cp.properties.size();
  return cp;
}

// Profiles the given classes, or every typed class when the list is empty.
inline KBProfile profile_snapshot(const Snapshot& snap, std::vector<std::string> classes = {}, ProfileOptions opts = {}) {
  KBProfile kb;
  kb.release = snap.release_id();
  if (classes.empty()) classes = snap.classes();
  for (const auto& c : classes) kb.classes.emplace(c, profile_class(snap, c, opts));
  return kb;
}

// Classes with at least one instance in every release, sorted by IRI.
inline std::vector<std::string> schema_consistent_classes(const std::vector<KBProfile>& profiles) {
  if (profiles.size() < 2)
    throw Error("profiler", ErrorCode::InsufficientReleases,
                "schema consistency needs at least 2 releases, got " + std::to_string(profiles.size()));
  std::vector<std::string> out;
  for (const auto& [cls, cp] : profiles.front().classes) {
    bool everywhere = true;
    for (const auto& kb : profiles) {
      const ClassProfile* p = kb.find(cls);
      if (!p || p->entity_count == 0) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) out.push_back(cls);
  }
  return out;
}

// Properties of the class present with freq > 0 in every compared release,
// sorted by IRI. Properties that never occur are dropped as well.
inline std::vector<std::string> filter_properties(const std::vector<KBProfile>& profiles, const std::string& cls) {
  std::vector<const ClassProfile*> cps;
  for (const auto& kb : profiles) {
    const ClassProfile* p = kb.find(cls);
    if (!p) throw Error("profiler", ErrorCode::UnknownClass, "class <" + cls + "> missing from release " + kb.release);
    cps.push_back(p);
  }
  std::vector<std::string> out;
  if (cps.empty()) return out;
  for (const auto& [prop, ps] : cps.front()->properties) {
    bool common = true;
    for (const ClassProfile* p : cps) {
      auto it = p->properties.find(prop);
      if (it == p->properties.end() || it->second.freq == 0) {
        common = false;
        break;
      }
    }
    if (common) out.push_back(prop);
  }
  return out;
}

// JSON interchange. Histograms are objects with keys in ascending numeric
// (or IRI) order.
namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson counts_json(const Counts& c) { return ojson{{"total", c.total}, {"distinct", c.distinct}}; }

template <typename Hist>
ojson numeric_hist_json(const Hist& h) {
  ojson o = ojson::object();
  for (const auto& [k, v] : h) o[std::to_string(k)] = v;
  return o;
}

inline ojson counts_map_json(const std::map<std::string, Counts>& m) {
  ojson o = ojson::object();
  for (const auto& [k, v] : m) o[k] = counts_json(v);
  return o;
}

inline Counts counts_from(const nlohmann::json& j) {
  return {j.at("total").get<std::uint64_t>(), j.at("distinct").get<std::uint64_t>()};
}

template <typename Hist>
Hist numeric_hist_from(const nlohmann::json& j) {
  Hist h;
  for (const auto& [k, v] : j.items()) h[std::stoull(k)] = v.template get<std::uint64_t>();
  return h;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const PropertyStats& ps) {
  using detail::ojson;
  const auto& nk = ps.node_kinds;
  return ojson{{"property", ps.property},
               {"freq", ps.freq},
               {"distinct_subjects", ps.distinct_subjects},
               {"cardinality_hist", detail::numeric_hist_json(ps.cardinality_hist)},
               {"node_kind_counts",
                {{"iri_total", nk.iri_total},
                 {"iri_distinct", nk.iri_distinct},
                 {"literal_total", nk.literal_total},
                 {"literal_distinct", nk.literal_distinct},
                 {"blank_total", nk.blank_total},
                 {"blank_distinct", nk.blank_distinct}}},
               {"datatype_hist", detail::counts_map_json(ps.datatype_hist)},
               {"object_class_hist", detail::counts_map_json(ps.object_class_hist)},
               {"object_class_unknown", detail::counts_json(ps.object_class_unknown)},
               {"string_length_hist", detail::numeric_hist_json(ps.string_length_hist)}};
}

inline nlohmann::ordered_json to_json(const ClassProfile& cp) {
  detail::ojson props = detail::ojson::object();
  for (const auto& [k, ps] : cp.properties) props[k] = to_json(ps);
  return detail::ojson{{"class", cp.class_iri},
                       {"release", cp.release},
                       {"entity_count", cp.entity_count},
                       {"type_assertions", cp.type_assertions},
                       {"np", cp.np},
                       {"properties", props}};
}

inline nlohmann::ordered_json to_json(const KBProfile& kb) {
  detail::ojson classes = detail::ojson::object();
  for (const auto& [k, cp] : kb.classes) classes[k] = to_json(cp);
  return detail::ojson{{"release", kb.release}, {"classes", classes}};
}

inline PropertyStats property_stats_from_json(const nlohmann::json& j) {
  PropertyStats ps;
  ps.property = j.at("property").get<std::string>();
  ps.freq = j.at("freq").get<std::uint64_t>();
  ps.distinct_subjects = j.at("distinct_subjects").get<std::uint64_t>();
  ps.cardinality_hist = detail::numeric_hist_from<CardinalityHistogram>(j.at("cardinality_hist"));
  const auto& nk = j.at("node_kind_counts");
  ps.node_kinds = {nk.at("iri_total").get<std::uint64_t>(),     nk.at("iri_distinct").get<std::uint64_t>(),
                   nk.at("literal_total").get<std::uint64_t>(), nk.at("literal_distinct").get<std::uint64_t>(),
                   nk.at("blank_total").get<std::uint64_t>(),   nk.at("blank_distinct").get<std::uint64_t>()};
  for (const auto& [k, v] : j.at("datatype_hist").items()) ps.datatype_hist[k] = detail::counts_from(v);
  for (const auto& [k, v] : j.at("object_class_hist").items()) ps.object_class_hist[k] = detail::counts_from(v);
  ps.object_class_unknown = detail::counts_from(j.at("object_class_unknown"));
  ps.string_length_hist = detail::numeric_hist_from<LengthHistogram>(j.at("string_length_hist"));
  return ps;
}

inline ClassProfile class_profile_from_json(const nlohmann::json& j) {
  ClassProfile cp;
  cp.class_iri = j.at("class").get<std::string>();
  cp.release = j.at("release").get<std::string>();
  cp.entity_count = j.at("entity_count").get<std::uint64_t>();
  cp.type_assertions = j.value("type_assertions", cp.entity_count);
  cp.np = j.at("np").get<std::uint64_t>();
  for (const auto& [k, v] : j.at("properties").items()) cp.properties.emplace(k, property_stats_from_json(v));
  return cp;
}

inline KBProfile kb_profile_from_json(const nlohmann::json& j) {
  KBProfile kb;
  try {
    kb.release = j.at("release").get<std::string>();
    for (const auto& [k, v] : j.at("classes").items()) kb.classes.emplace(k, class_profile_from_json(v));
  } catch (const nlohmann::json::exception& e) {
    throw Error("profiler", ErrorCode::Io, std::string("malformed profile: ") + e.what());
  }
  return kb;
}

inline std::filesystem::path profile_path(const std::filesystem::path& dir, const std::string& release) {
  return dir / ("profile-" + release + ".json");
}

inline void save_profile(const KBProfile& kb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("profiler", ErrorCode::Io, "cannot write " + path.string());
  out << to_json(kb).dump(1) << '\n';
}

inline KBProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("profiler", ErrorCode::MissingProfile, "no profile at " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("profiler", ErrorCode::Io, "cannot parse " + path.string() + ": " + e.what());
  }
  return kb_profile_from_json(j);
}

}  // namespace kbq
