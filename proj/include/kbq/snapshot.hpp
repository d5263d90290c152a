#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kbq/error.hpp"
#include "kbq/histogram.hpp"
#include "kbq/ntriples.hpp"
#include "kbq/rdf.hpp"

namespace kbq {

using TermId = std::uint32_t;

struct EncodedTriple {
  TermId s, p, o;
};

// Immutable, indexed view of one release. Terms are interned; triples keep
// dump order (duplicates included) and are indexed by predicate, by subject,
// and by rdf:type class.
class Snapshot {
 public:
  Snapshot() = default;
  explicit Snapshot(std::string release_id) : release_id_(std::move(release_id)) {}

  const std::string& release_id() const noexcept { return release_id_; }
  std::size_t size() const noexcept { return triples_.size(); }
  std::span<const EncodedTriple> triples() const noexcept { return triples_; }

  const Term& term(TermId id) const { return terms_[id]; }
  std::size_t term_count() const noexcept { return terms_.size(); }

  std::optional<TermId> find(const Term& t) const {
    auto it = ids_.find(t);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  Triple decode(const EncodedTriple& t) const { return Triple{terms_[t.s], terms_[t.p], terms_[t.o]}; }

  // Indices into triples() with the given predicate / subject.
  std::span<const std::size_t> by_predicate(TermId p) const { return lookup(by_predicate_, p); }
  std::span<const std::size_t> by_subject(TermId s) const { return lookup(by_subject_, s); }
  std::span<const std::size_t> by_predicate(const Term& p) const {
    auto id = find(p);
    return id ? by_predicate(*id) : std::span<const std::size_t>{};
  }
  std::span<const std::size_t> by_subject(const Term& s) const {
    auto id = find(s);
    return id ? by_subject(*id) : std::span<const std::size_t>{};
  }

  // Distinct subjects typed with the class, ascending by id.
  std::span<const TermId> subjects_of_type(TermId cls) const { return lookup(by_type_, cls); }
  std::span<const TermId> subjects_of_type(const std::string& class_iri) const {
    auto id = find(Term::iri(class_iri));
    return id ? subjects_of_type(*id) : std::span<const TermId>{};
  }

  // Classes asserted for a term via rdf:type, ascending by id.
  std::span<const TermId> types_of(TermId subject) const { return lookup(types_of_, subject); }

  // Number of rdf:type triples for the class, duplicates included.
  std::size_t type_assertions(TermId cls) const {
    auto it = type_assertions_.find(cls);
    return it == type_assertions_.end() ? 0 : it->second;
  }

  std::optional<TermId> rdf_type_id() const { return rdf_type_; }

  // Classes with at least one instance, sorted by IRI.
  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& [cls, subjects] : by_type_)
      if (terms_[cls].is_iri()) out.push_back(terms_[cls].value());
    std::sort(out.begin(), out.end());
    return out;
  }

  class Builder;

 private:
  template <typename Map>
  static auto lookup(const Map& m, TermId key) -> std::span<const typename Map::mapped_type::value_type> {
    auto it = m.find(key);
    if (it == m.end()) return {};
    return it->second;
  }

  std::string release_id_;
  std::vector<Term> terms_;
  std::unordered_map<Term, TermId, TermHash> ids_;
  std::vector<EncodedTriple> triples_;
  std::unordered_map<TermId, std::vector<std::size_t>> by_predicate_;
  std::unordered_map<TermId, std::vector<std::size_t>> by_subject_;
  std::unordered_map<TermId, std::vector<TermId>> by_type_;
  std::unordered_map<TermId, std::vector<TermId>> types_of_;
  std::unordered_map<TermId, std::size_t> type_assertions_;
  std::optional<TermId> rdf_type_;
};

class Snapshot::Builder {
 public:
  explicit Builder(std::string release_id = {}) : snap_(std::move(release_id)) {}

  void add(const Triple& t) {
    const EncodedTriple e{intern(t.subject), intern(t.predicate), intern(t.object)};
    const std::size_t idx = snap_.triples_.size();
    snap_.triples_.push_back(e);
    snap_.by_predicate_[e.p].push_back(idx);
    snap_.by_subject_[e.s].push_back(idx);
    if (t.predicate.value() == vocab::rdf_type && t.object.is_iri()) {
      snap_.by_type_[e.o].push_back(e.s);
      snap_.types_of_[e.s].push_back(e.o);
      ++snap_.type_assertions_[e.o];
      snap_.rdf_type_ = e.p;
    }
  }

  Snapshot build() && {
    for (auto* m : {&snap_.by_type_, &snap_.types_of_}) {
      for (auto& [k, v] : *m) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
    }
    return std::move(snap_);
  }

 private:
  TermId intern(const Term& t) {
    auto [it, inserted] = snap_.ids_.try_emplace(t, static_cast<TermId>(snap_.terms_.size()));
    if (inserted) snap_.terms_.push_back(t);
    return it->second;
  }

  Snapshot snap_;
};

inline Snapshot load_snapshot(std::istream& in, std::string release_id = {}, ParseMode mode = ParseMode::Lenient,
                              std::vector<MalformedLine>* errors = nullptr) {
  Snapshot::Builder b(std::move(release_id));
  NTriplesReader reader(in, mode);
  while (auto st = reader.next()) b.add(st->triple);
  if (errors) *errors = reader.errors();
  return std::move(b).build();
}

inline Snapshot load_dump(const std::filesystem::path& path, std::string release_id = {},
                          ParseMode mode = ParseMode::Lenient, std::vector<MalformedLine>* errors = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("acquisition", ErrorCode::Io, "cannot open dump " + path.string());
  return load_snapshot(in, std::move(release_id), mode, errors);
}

// The four measurement elements evaluated directly on a snapshot. These
// follow the SPARQL templates' semantics, so they must agree with the
// endpoint path for the same data.

inline std::uint64_t count_entities(const Snapshot& s, const std::string& class_iri) {
  return s.subjects_of_type(class_iri).size();
}

inline std::uint64_t property_frequency(const Snapshot& s, const std::string& class_iri, const std::string& property_iri) {
  auto cls = s.find(Term::iri(class_iri));
  if (!cls) return 0;
  std::uint64_t n = 0;
  for (TermId subject : s.subjects_of_type(*cls))
    for (std::size_t idx : s.by_subject(subject))
      if (s.term(s.triples()[idx].p).value() == property_iri) ++n;
  return n;
}

// Distinct predicates used by instances of the class, rdf:type included.
inline std::uint64_t predicate_count(const Snapshot& s, const std::string& class_iri) {
  auto cls = s.find(Term::iri(class_iri));
  if (!cls) return 0;
  std::vector<TermId> preds;
  for (TermId subject : s.subjects_of_type(*cls))
    for (std::size_t idx : s.by_subject(subject)) preds.push_back(s.triples()[idx].p);
  std::sort(preds.begin(), preds.end());
  return static_cast<std::uint64_t>(std::unique(preds.begin(), preds.end()) - preds.begin());
}

// Per-subject value counts of the property over instances of the class,
// including the zero bucket.
inline CardinalityHistogram cardinality_histogram(const Snapshot& s, const std::string& class_iri,
                                                  const std::string& property_iri) {
  CardinalityHistogram hist;
  auto cls = s.find(Term::iri(class_iri));
  if (!cls) return hist;
  auto prop = s.find(Term::iri(property_iri));
  for (TermId subject : s.subjects_of_type(*cls)) {
    std::uint64_t card = 0;
    if (prop)
      for (std::size_t idx : s.by_subject(subject))
        if (s.triples()[idx].p == *prop) ++card;
    ++hist[card];
  }
  return hist;
}

}  // namespace kbq
