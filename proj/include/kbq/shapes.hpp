#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kbq/error.hpp"
#include "kbq/features.hpp"
#include "kbq/prefixes.hpp"
#include "kbq/profiler.hpp"
#include "kbq/rdf.hpp"

namespace kbq {

struct ConstraintSet {
  std::string class_iri;
  std::string property;
  std::optional<int> min_count;
  std::optional<int> max_count;
  std::optional<TermKind> node_kind;
  std::optional<std::string> datatype;
  std::vector<std::string> class_disjunction;
  std::optional<std::uint64_t> min_length, max_length;

  bool empty() const {
    return !min_count && !max_count && !node_kind && !datatype && class_disjunction.empty() && !min_length &&
           !max_length;
  }
  friend bool operator==(const ConstraintSet&, const ConstraintSet&) = default;
};

// One node shape per target class; property constraints keyed by property IRI.
struct ShapeDocument {
  std::map<std::string, std::map<std::string, ConstraintSet>> shapes;

  void add(ConstraintSet c) {
    auto& shape = shapes[c.class_iri];
    std::string p = c.property;
    shape.insert_or_assign(std::move(p), std::move(c));
  }
  void add_class(const std::string& cls) { shapes[cls]; }
  friend bool operator==(const ShapeDocument&, const ShapeDocument&) = default;
};

// What is known about one property when inducing its constraints.
struct PropertyEvidence {
  std::string property;
  std::string min_label = "MIN0";   // MIN0, MIN1, MIN1+
  std::string max_label = "MAX1+";  // MAX1, MAX1+
  std::optional<TermKind> node_kind;               // predicted; falls back to node_kinds
  std::optional<NodeKindCounts> node_kinds;
  std::optional<std::map<std::string, Counts>> datatype_hist;
  // Classes in presentation order; ties in coverage keep this order.
  std::optional<std::vector<std::pair<std::string, Counts>>> object_classes;
  std::uint64_t object_total = 0;  // denominator for class coverage
  std::optional<StringLengthSummary> lengths;
};

struct InduceOptions {
  // When set, every class covering at least this share of objects is kept;
  // otherwise only the classes tied at the highest coverage.
  std::optional<double> class_threshold;
};

namespace detail {

inline std::optional<TermKind> majority_kind(const NodeKindCounts& nk) {
  if (nk.iri_total == 0 && nk.literal_total == 0 && nk.blank_total == 0) return std::nullopt;
  if (nk.blank_total > nk.iri_total && nk.blank_total > nk.literal_total) return TermKind::BlankNode;
  return nk.iri_total >= nk.literal_total ? TermKind::IRI : TermKind::Literal;
}

}  // namespace detail

inline std::optional<ConstraintSet> induce_property(const std::string& cls, const PropertyEvidence& ev,
                                                    const InduceOptions& opts = {}) {
  ConstraintSet c;
  c.class_iri = cls;
  c.property = ev.property;
  if (ev.min_label == "MIN1" || ev.min_label == "MIN1+") c.min_count = 1;
  else if (ev.min_label != "MIN0")
    throw Error("shapes", ErrorCode::UnknownLabel, "min label '" + ev.min_label + "' for <" + ev.property + ">");
  if (ev.max_label == "MAX1") c.max_count = 1;
  else if (ev.max_label != "MAX1+")
    throw Error("shapes", ErrorCode::UnknownLabel, "max label '" + ev.max_label + "' for <" + ev.property + ">");

  c.node_kind = ev.node_kind;
  if (!c.node_kind && ev.node_kinds) c.node_kind = detail::majority_kind(*ev.node_kinds);

  if (c.node_kind == TermKind::Literal) {
    if (!ev.datatype_hist || ev.datatype_hist->empty())
      throw Error("shapes", ErrorCode::InconsistentInputs, "literal property <" + ev.property + "> has no datatypes");
    auto best = ev.datatype_hist->begin();
    for (auto it = ev.datatype_hist->begin(); it != ev.datatype_hist->end(); ++it)
      if (it->second.total > best->second.total) best = it;
    c.datatype = best->first;
    if (is_string_datatype(best->first) && ev.lengths) {
      c.min_length = ev.lengths->q1;
      c.max_length = ev.lengths->q3;
    }
  } else if (c.node_kind == TermKind::IRI) {
    if (!ev.object_classes)
      throw Error("shapes", ErrorCode::InconsistentInputs, "IRI property <" + ev.property + "> lacks object classes");
    const auto& oc = *ev.object_classes;
    if (opts.class_threshold) {
      if (ev.object_total == 0)
        throw Error("shapes", ErrorCode::InconsistentInputs, "class threshold needs an object total");
      std::vector<std::pair<std::string, Counts>> kept;
      for (const auto& e : oc)
        if (static_cast<double>(e.second.total) / static_cast<double>(ev.object_total) >= *opts.class_threshold)
          kept.push_back(e);
      std::stable_sort(kept.begin(), kept.end(),
                       [](const auto& a, const auto& b) { return a.second.total > b.second.total; });
      for (const auto& e : kept) c.class_disjunction.push_back(e.first);
    } else {
      std::uint64_t top = 0;
      for (const auto& e : oc) top = std::max(top, e.second.total);
      if (top > 0)
        for (const auto& e : oc)
          if (static_cast<double>(top - e.second.total) <= 1e-9 * static_cast<double>(top))
            c.class_disjunction.push_back(e.first);
    }
  }

  if (c.empty()) return std::nullopt;
  return c;
}

inline std::vector<ConstraintSet> induce_constraints(const std::string& cls, const std::vector<PropertyEvidence>& props,
                                                     const InduceOptions& opts = {}) {
  std::vector<ConstraintSet> out;
  for (const auto& ev : props)
    if (auto c = induce_property(cls, ev, opts)) out.push_back(std::move(*c));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.property < b.property; });
  return out;
}

// Evidence straight from a profile, with observed cardinality labels.
inline PropertyEvidence evidence_from_stats(const PropertyStats& ps) {
  PropertyEvidence ev;
  ev.property = ps.property;
  if (!ps.cardinality_hist.empty()) {
    const auto labels = observed_cardinality_labels(ps.cardinality_hist);
    ev.min_label = labels.min;
    ev.max_label = labels.max;
  }
  ev.node_kinds = ps.node_kinds;
  ev.datatype_hist = ps.datatype_hist;
  ev.object_classes.emplace(ps.object_class_hist.begin(), ps.object_class_hist.end());
  ev.object_total = ps.node_kinds.iri_total + ps.node_kinds.blank_total;
  std::uint64_t mass = 0;
  for (const auto& [len, n] : ps.string_length_hist) mass += n;
  if (mass > 0) ev.lengths = string_quartiles(ps.string_length_hist);
  return ev;
}

namespace detail {

inline std::string local_name(const std::string& iri) {
  std::string_view s = iri;
  if (auto cut = s.find_last_of("/#:"); cut != std::string_view::npos) s = s.substr(cut + 1);
  std::string out;
  for (char c : s)
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') out += c;
  if (out.empty() || std::isdigit(static_cast<unsigned char>(out.front()))) out = "C" + out;
  return out;
}

inline std::map<std::string, std::string> shape_names(const ShapeDocument& doc) {
  std::map<std::string, std::vector<std::string>> by_local;
  for (const auto& [cls, props] : doc.shapes) by_local[local_name(cls)].push_back(cls);
  std::map<std::string, std::string> out;
  for (const auto& [local, classes] : by_local) {
    if (classes.size() == 1) {
      out[classes.front()] = "ex:" + local + "Shape";
      continue;
    }
    for (std::size_t i = 0; i < classes.size(); ++i) {
      std::string tag;
      if (const Prefix* p = prefix_for(classes[i])) {
        tag = std::string(p->name);
        tag[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(tag[0])));
      } else {
        tag = "N" + std::to_string(i + 1);
      }
      out[classes[i]] = "ex:" + tag + local + "Shape";
    }
  }
  return out;
}

inline std::string_view kind_term(TermKind k) {
  switch (k) {
    case TermKind::IRI: return "sh:IRI";
    case TermKind::Literal: return "sh:Literal";
    case TermKind::BlankNode: return "sh:BlankNode";
  }
  return "sh:IRI";
}

}  // namespace detail

// Turtle in the layout of hand-written SHACL examples: one facet per line,
// one-space indentation per bracket level.
inline std::string emit_shacl(const ShapeDocument& doc) {
  std::set<std::string> used{"sh", "xsd"};
  auto note = [&](const std::string& iri) {
    if (const Prefix* p = prefix_for(iri)) used.insert(std::string(p->name));
  };
  if (!doc.shapes.empty()) used.insert("ex");
  for (const auto& [cls, props] : doc.shapes) {
    note(cls);
    for (const auto& [p, c] : props) {
      note(p);
      if (c.datatype) note(*c.datatype);
      for (const auto& k : c.class_disjunction) note(k);
    }
  }

  std::ostringstream os;
  auto prefix_line = [&](std::string_view name) {
    os << "@prefix " << name << ": <" << find_prefix(name)->ns << "> .\n";
  };
  prefix_line("sh");
  prefix_line("xsd");
  for (const auto& name : used)
    if (name != "sh" && name != "xsd") prefix_line(name);

  const auto names = detail::shape_names(doc);
  for (const auto& [cls, props] : doc.shapes) {
    os << "\n" << names.at(cls) << " a sh:NodeShape;\n";
    os << " sh:targetClass " << compact_iri(cls);
    std::vector<const ConstraintSet*> emitted;
    for (const auto& [p, c] : props)
      if (!c.empty()) emitted.push_back(&c);
    for (const ConstraintSet* c : emitted) {
      os << ";\n sh:property [sh:path " << compact_iri(c->property);
      if (c->min_count) os << ";\n  sh:minCount " << *c->min_count;
      if (c->max_count) os << ";\n  sh:maxCount " << *c->max_count;
      if (c->node_kind) os << ";\n  sh:nodeKind " << detail::kind_term(*c->node_kind);
      if (c->datatype) os << ";\n  sh:datatype " << compact_iri(*c->datatype);
      if (!c->class_disjunction.empty()) {
        os << ";\n  sh:or (";
        for (const auto& k : c->class_disjunction) os << " [sh:class " << compact_iri(k) << "]";
        os << " )";
      }
      if (c->min_length) os << ";\n  sh:minLength " << *c->min_length;
      if (c->max_length) os << ";\n  sh:maxLength " << *c->max_length;
      os << "]";
    }
    os << " .\n";
  }
  return os.str();
}

namespace detail {

// Tokenizer for the Turtle subset produced by emit_shacl.
class ShaclLexer {
 public:
  explicit ShaclLexer(std::string_view text) : s_(text) {}

  std::optional<std::string> next() {
    skip();
    if (i_ >= s_.size()) return std::nullopt;
    const char c = s_[i_];
    if (c == '<') {
      const auto end = s_.find('>', i_);
      if (end == std::string_view::npos) fail("unterminated IRI");
      std::string tok(s_.substr(i_, end - i_ + 1));
      i_ = end + 1;
      return tok;
    }
    if (c == ';' || c == '[' || c == ']' || c == '(' || c == ')' || c == ',') {
      ++i_;
      return std::string(1, c);
    }
    if (c == '.' && (i_ + 1 >= s_.size() || std::isspace(static_cast<unsigned char>(s_[i_ + 1])))) {
      ++i_;
      return std::string(".");
    }
    std::size_t j = i_;
    while (j < s_.size() && !std::isspace(static_cast<unsigned char>(s_[j])) && std::string_view(";[]()<,").find(s_[j]) == std::string_view::npos) {
      if (s_[j] == '.' && (j + 1 >= s_.size() || std::isspace(static_cast<unsigned char>(s_[j + 1])))) break;
      ++j;
    }
    std::string tok(s_.substr(i_, j - i_));
    i_ = j;
    return tok;
  }

  std::string expect() {
    auto t = next();
    if (!t) fail("unexpected end of input");
    return *t;
  }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    for (std::size_t k = 0; k < i_ && k < s_.size(); ++k) line += s_[k] == '\n';
    throw Error("shapes", ErrorCode::ShapeSyntax, "line " + std::to_string(line) + ": " + what);
  }

 private:
  void skip() {
    while (i_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
      else if (s_[i_] == '#')
        while (i_ < s_.size() && s_[i_] != '\n') ++i_;
      else break;
    }
  }

  std::string_view s_;
  std::size_t i_ = 0;
};

}  // namespace detail

// Reads back the SHACL subset that emit_shacl writes.
inline ShapeDocument parse_shacl(std::string_view text) {
  detail::ShaclLexer lex(text);
  std::map<std::string, std::string> ns;
  auto resolve = [&](const std::string& tok) -> std::string {
    if (tok.size() >= 2 && tok.front() == '<') return tok.substr(1, tok.size() - 2);
    const auto colon = tok.find(':');
    if (colon == std::string::npos) lex.fail("expected IRI, got '" + tok + "'");
    auto it = ns.find(tok.substr(0, colon));
    if (it == ns.end()) lex.fail("undeclared prefix in '" + tok + "'");
    return it->second + tok.substr(colon + 1);
  };
  auto number = [&](const std::string& tok) -> std::uint64_t {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; }))
      lex.fail("expected integer, got '" + tok + "'");
    return std::stoull(tok);
  };
  const std::string sh = std::string(find_prefix("sh")->ns);

  ShapeDocument doc;
  while (auto tok = lex.next()) {
    if (*tok == "@prefix") {
      std::string name = lex.expect();
      if (name.empty() || name.back() != ':') lex.fail("bad prefix name '" + name + "'");
      name.pop_back();
      const std::string iri = lex.expect();
      if (iri.size() < 2 || iri.front() != '<') lex.fail("prefix needs an IRI");
      ns[name] = iri.substr(1, iri.size() - 2);
      if (lex.expect() != ".") lex.fail("prefix line must end with '.'");
      continue;
    }
    // Node shape: <name> a sh:NodeShape; sh:targetClass C; sh:property [...] ... .
    resolve(*tok);
    if (lex.expect() != "a" || resolve(lex.expect()) != sh + "NodeShape") lex.fail("expected 'a sh:NodeShape'");
    std::optional<std::string> target;
    std::vector<ConstraintSet> props;
    std::string sep = lex.expect();
    while (sep == ";") {
      const std::string pred = resolve(lex.expect());
      if (pred == sh + "targetClass") {
        target = resolve(lex.expect());
      } else if (pred == sh + "property") {
        if (lex.expect() != "[") lex.fail("expected '['");
        ConstraintSet c;
        std::string t = ";";
        bool first = true;
        while (t == ";") {
          const std::string facet = resolve(lex.expect());
          if (first && facet != sh + "path") lex.fail("property shape must start with sh:path");
          first = false;
          if (facet == sh + "path") c.property = resolve(lex.expect());
          else if (facet == sh + "minCount") c.min_count = static_cast<int>(number(lex.expect()));
          else if (facet == sh + "maxCount") c.max_count = static_cast<int>(number(lex.expect()));
          else if (facet == sh + "nodeKind") {
            const std::string k = resolve(lex.expect());
            if (k == sh + "IRI") c.node_kind = TermKind::IRI;
            else if (k == sh + "Literal") c.node_kind = TermKind::Literal;
            else if (k == sh + "BlankNode") c.node_kind = TermKind::BlankNode;
            else lex.fail("unknown node kind <" + k + ">");
          } else if (facet == sh + "datatype") c.datatype = resolve(lex.expect());
          else if (facet == sh + "minLength") c.min_length = number(lex.expect());
          else if (facet == sh + "maxLength") c.max_length = number(lex.expect());
          else if (facet == sh + "or") {
            if (lex.expect() != "(") lex.fail("expected '('");
            for (std::string m = lex.expect(); m != ")"; m = lex.expect()) {
              if (m != "[" || resolve(lex.expect()) != sh + "class") lex.fail("expected '[sh:class'");
              c.class_disjunction.push_back(resolve(lex.expect()));
              if (lex.expect() != "]") lex.fail("expected ']'");
            }
          } else lex.fail("unsupported facet <" + facet + ">");
          t = lex.expect();
        }
        if (t != "]") lex.fail("expected ']' after property shape");
        props.push_back(std::move(c));
      } else {
        lex.fail("unsupported predicate <" + pred + ">");
      }
      sep = lex.expect();
    }
    if (sep != ".") lex.fail("expected '.' after node shape");
    if (!target) lex.fail("node shape without sh:targetClass");
    doc.add_class(*target);
    for (auto& c : props) {
      c.class_iri = *target;
      doc.add(std::move(c));
    }
  }
  return doc;
}

}  // namespace kbq
