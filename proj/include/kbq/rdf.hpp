#pragma once

#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace kbq {

namespace vocab {
inline constexpr std::string_view rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view xsd = "http://www.w3.org/2001/XMLSchema#";
inline constexpr std::string_view sh = "http://www.w3.org/ns/shacl#";
inline const std::string rdf_type = std::string(rdf) + "type";
inline const std::string rdf_lang_string = std::string(rdf) + "langString";
inline const std::string xsd_string = std::string(xsd) + "string";
}  // namespace vocab

enum class TermKind : std::uint8_t { IRI, Literal, BlankNode };

constexpr std::string_view to_string(TermKind k) {
  switch (k) {
    case TermKind::IRI: return "IRI";
    case TermKind::Literal: return "Literal";
    case TermKind::BlankNode: return "BlankNode";
  }
  return "?";
}

namespace detail {

inline bool is_iri_forbidden(unsigned char c) {
  return c <= 0x20 || c == '<' || c == '>' || c == '"' || c == '{' || c == '}' || c == '|' || c == '^' ||
         c == '`' || c == '\\';
}

// scheme ":" ... per RFC 3987 absolute IRI.
inline bool has_scheme(std::string_view iri) {
  if (iri.empty() || !std::isalpha(static_cast<unsigned char>(iri[0]))) return false;
  for (std::size_t i = 1; i < iri.size(); ++i) {
    char c = iri[i];
    if (c == ':') return true;
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') return false;
  }
  return false;
}

inline bool is_lang_tag(std::string_view tag) {
  if (tag.empty()) return false;
  std::size_t i = 0;
  std::size_t seg = 0;
  bool first = true;
  for (; i <= tag.size(); ++i) {
    if (i == tag.size() || tag[i] == '-') {
      if (seg == 0) return false;
      seg = 0;
      first = false;
      continue;
    }
    unsigned char c = static_cast<unsigned char>(tag[i]);
    if (first ? !std::isalpha(c) : !std::isalnum(c)) return false;
    ++seg;
  }
  return true;
}

inline bool is_blank_label(std::string_view label) {
  if (label.empty() || label.back() == '.') return false;
  for (std::size_t i = 0; i < label.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(label[i]);
    if (c >= 0x80 || std::isalnum(c) || c == '_') continue;
    if (i > 0 && (c == '-' || c == '.')) continue;
    return false;
  }
  return true;
}

inline void check_iri(std::string_view iri) {
  if (iri.empty()) throw std::invalid_argument("empty IRI");
  for (unsigned char c : iri)
    if (is_iri_forbidden(c)) throw std::invalid_argument("IRI contains forbidden character: " + std::string(iri));
  if (!has_scheme(iri)) throw std::invalid_argument("IRI is not absolute: " + std::string(iri));
}

}  // namespace detail

// An RDF term. Exactly one kind's fields are populated: `value` holds the IRI,
// the literal's lexical form, or the blank node label.
class Term {
 public:
  Term() = default;

  static Term iri(std::string iri) {
    detail::check_iri(iri);
    return Term(TermKind::IRI, std::move(iri), {}, {});
  }

  static Term literal(std::string lexical, std::string datatype = vocab::xsd_string) {
    if (datatype.empty()) datatype = vocab::xsd_string;
    if (datatype == vocab::rdf_lang_string) throw std::invalid_argument("rdf:langString literal needs a language tag");
    detail::check_iri(datatype);
    return Term(TermKind::Literal, std::move(lexical), std::move(datatype), {});
  }

  static Term lang_literal(std::string lexical, std::string language) {
    if (!detail::is_lang_tag(language)) throw std::invalid_argument("invalid language tag: " + language);
    return Term(TermKind::Literal, std::move(lexical), vocab::rdf_lang_string, std::move(language));
  }

  static Term blank(std::string label) {
    if (!detail::is_blank_label(label)) throw std::invalid_argument("invalid blank node label: " + label);
    return Term(TermKind::BlankNode, std::move(label), {}, {});
  }

  TermKind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == TermKind::IRI; }
  bool is_literal() const noexcept { return kind_ == TermKind::Literal; }
  bool is_blank() const noexcept { return kind_ == TermKind::BlankNode; }

  // IRI string, lexical form, or blank node label depending on kind().
  const std::string& value() const noexcept { return value_; }
  const std::string& datatype() const noexcept { return datatype_; }
  const std::string& language() const noexcept { return language_; }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  Term(TermKind k, std::string v, std::string dt, std::string lang)
      : kind_(k), value_(std::move(v)), datatype_(std::move(dt)), language_(std::move(lang)) {}

  TermKind kind_ = TermKind::IRI;
  std::string value_;
  std::string datatype_;
  std::string language_;
};

inline TermKind term_kind(const Term& t) noexcept { return t.kind(); }

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  // Checks the statement invariants: IRI predicate, non-literal subject.
  static Triple make(Term s, Term p, Term o) {
    if (s.is_literal()) throw std::invalid_argument("literal subject");
    if (!p.is_iri()) throw std::invalid_argument("predicate must be an IRI");
    return Triple{std::move(s), std::move(p), std::move(o)};
  }

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept {
    std::size_t h = std::hash<std::string>{}(t.value());
    h ^= std::hash<std::string>{}(t.datatype()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<std::string>{}(t.language()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h ^ static_cast<std::size_t>(t.kind());
  }
};

// Number of Unicode scalar values in a UTF-8 string.
inline std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

namespace detail {

inline void write_escaped_lexical(std::string& out, std::string_view lex) {
  static constexpr char hex[] = "0123456789ABCDEF";
  for (unsigned char c : lex) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default:
        if (c < 0x20 || c == 0x7F) {
          out += "\\u00";
          out += hex[c >> 4];
          out += hex[c & 0xF];
        } else {
          out += static_cast<char>(c);
        }
    }
  }
}

}  // namespace detail

inline std::string to_ntriples(const Term& t) {
  std::string out;
  switch (t.kind()) {
    case TermKind::IRI:
      out.reserve(t.value().size() + 2);
      out += '<';
      out += t.value();
      out += '>';
      break;
    case TermKind::BlankNode:
      out += "_:";
      out += t.value();
      break;
    case TermKind::Literal:
      out += '"';
      detail::write_escaped_lexical(out, t.value());
      out += '"';
      if (!t.language().empty()) {
        out += '@';
        out += t.language();
      } else if (t.datatype() != vocab::xsd_string) {
        out += "^^<";
        out += t.datatype();
        out += '>';
      }
      break;
  }
  return out;
}

// One N-Triples statement, newline-terminated. xsd:string literals are
// written without a datatype, the canonical N-Triples form.
inline std::string serialize_ntriple(const Triple& t) {
  std::string out = to_ntriples(t.subject);
  out += ' ';
  out += to_ntriples(t.predicate);
  out += ' ';
  out += to_ntriples(t.object);
  out += " .\n";
  return out;
}

}  // namespace kbq

template <>
struct std::hash<kbq::Term> : kbq::TermHash {};
