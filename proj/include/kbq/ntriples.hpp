#pragma once

#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kbq/error.hpp"
#include "kbq/rdf.hpp"

namespace kbq {

enum class ParseMode { Strict, Lenient };

namespace detail {

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : s_(line), lineno_(lineno) {}

  // nullopt for blank and comment-only lines.
  std::optional<Triple> parse() {
    skip_ws();
    if (eof() || peek() == '#') return std::nullopt;

    Term subject;
    if (peek() == '<') {
      subject = Term::iri(read_iri());
    } else if (starts_with("_:")) {
      subject = read_blank();
    } else {
      fail("expected subject IRI or blank node");
    }
    skip_ws();

    if (eof() || peek() != '<') fail(eof() || peek() == '.' ? "missing predicate" : "predicate must be an IRI");
    Term predicate = Term::iri(read_iri());
    skip_ws();

    Term object;
    if (eof() || peek() == '.') fail("missing object");
    if (peek() == '<') {
      object = Term::iri(read_iri());
    } else if (starts_with("_:")) {
      object = read_blank();
    } else if (peek() == '"') {
      object = read_literal();
    } else {
      fail("invalid object term");
    }

    skip_ws();
    if (eof() || peek() != '.') fail("missing terminating '.'");
    ++pos_;
    skip_ws();
    if (!eof() && peek() != '#') fail("unexpected content after '.'");
    return Triple{std::move(subject), std::move(predicate), std::move(object)};
  }

 private:
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }
  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }

  [[noreturn]] void fail(const std::string& reason) const { throw MalformedLine(lineno_, reason); }

  std::uint32_t read_hex(std::size_t digits) {
    if (pos_ + digits > s_.size()) fail("truncated unicode escape");
    std::uint32_t cp = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      char c = s_[pos_++];
      cp <<= 4;
      if (c >= '0' && c <= '9') cp |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') cp |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') cp |= static_cast<std::uint32_t>(c - 'A' + 10);
      else fail("invalid hex digit in unicode escape");
    }
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) fail("unicode escape is not a scalar value");
    return cp;
  }

  // Consumes "\u" or "\U" (backslash already consumed) and appends UTF-8.
  bool read_uchar(std::string& out) {
    if (eof()) return false;
    char c = peek();
    if (c == 'u') {
      ++pos_;
      append_utf8(out, read_hex(4));
      return true;
    }
    if (c == 'U') {
      ++pos_;
      append_utf8(out, read_hex(8));
      return true;
    }
    return false;
  }

  std::string read_iri() {
    ++pos_;  // '<'
    std::string iri;
    while (true) {
      if (eof()) fail("unterminated IRI");
      char c = s_[pos_++];
      if (c == '>') break;
      if (c == '\\') {
        if (!read_uchar(iri)) fail("invalid escape in IRI");
        continue;
      }
      if (detail::is_iri_forbidden(static_cast<unsigned char>(c))) fail("invalid character in IRI");
      iri += c;
    }
    if (iri.empty()) fail("empty IRI");
    if (!detail::has_scheme(iri)) fail("relative IRI <" + iri + ">");
    for (unsigned char c : iri)
      if (detail::is_iri_forbidden(c)) fail("escaped IRI contains a forbidden character");
    return iri;
  }

  Term read_blank() {
    pos_ += 2;
    std::size_t start = pos_;
    while (!eof()) {
      unsigned char c = static_cast<unsigned char>(peek());
      if (c >= 0x80 || std::isalnum(c) || c == '_' || c == '-' || c == '.') ++pos_;
      else break;
    }
    // A label never ends with '.'; give trailing dots back to the statement.
    while (pos_ > start && s_[pos_ - 1] == '.') --pos_;
    std::string label(s_.substr(start, pos_ - start));
    if (!detail::is_blank_label(label)) fail("invalid blank node label");
    return Term::blank(std::move(label));
  }

  Term read_literal() {
    ++pos_;  // '"'
    std::string lex;
    while (true) {
      if (eof()) fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c == '\n' || c == '\r') fail("raw line break in literal");
      if (c != '\\') {
        lex += c;
        continue;
      }
      if (eof()) fail("dangling escape in literal");
      char e = peek();
      switch (e) {
        case 't': lex += '\t'; ++pos_; break;
        case 'b': lex += '\b'; ++pos_; break;
        case 'n': lex += '\n'; ++pos_; break;
        case 'r': lex += '\r'; ++pos_; break;
        case 'f': lex += '\f'; ++pos_; break;
        case '"': lex += '"'; ++pos_; break;
        case '\'': lex += '\''; ++pos_; break;
        case '\\': lex += '\\'; ++pos_; break;
        default:
          if (!read_uchar(lex)) fail("invalid escape in literal");
      }
    }
    if (!eof() && peek() == '@') {
      ++pos_;
      std::size_t start = pos_;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) ++pos_;
      std::string lang(s_.substr(start, pos_ - start));
      if (!detail::is_lang_tag(lang)) fail("invalid language tag");
      return Term::lang_literal(std::move(lex), std::move(lang));
    }
    if (starts_with("^^")) {
      pos_ += 2;
      if (eof() || peek() != '<') fail("datatype must be an IRI");
      std::string dt = read_iri();
      if (dt == vocab::rdf_lang_string) fail("rdf:langString literal without language tag");
      return Term::literal(std::move(lex), std::move(dt));
    }
    return Term::literal(std::move(lex));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t lineno_;
};

}  // namespace detail

// Parses one N-Triples line. Returns nullopt for blank/comment lines; throws
// MalformedLine on syntax errors.
inline std::optional<Triple> parse_ntriple_line(std::string_view line, std::size_t lineno = 1) {
  return detail::LineParser(line, lineno).parse();
}

struct Statement {
  std::size_t line = 0;
  Triple triple;
};

// Streaming N-Triples reader. Holds one line at a time, so memory use is
// bounded by the longest line. Strict mode throws MalformedLine at the first
// bad line; lenient mode records it in errors() and moves on.
class NTriplesReader {
 public:
  explicit NTriplesReader(std::istream& in, ParseMode mode = ParseMode::Strict) : in_(in), mode_(mode) {}

  std::optional<Statement> next() {
    while (std::getline(in_, buf_)) {
      ++line_;
      try {
        if (auto t = parse_ntriple_line(buf_, line_)) {
          ++triples_;
          return Statement{line_, std::move(*t)};
        }
      } catch (const MalformedLine& e) {
        if (mode_ == ParseMode::Strict) throw;
        errors_.push_back(e);
      }
    }
    if (in_.bad()) throw Error("rdf-core", ErrorCode::Io, "stream read failure after line " + std::to_string(line_));
    return std::nullopt;
  }

  std::size_t lines_read() const noexcept { return line_; }
  std::size_t triple_count() const noexcept { return triples_; }
  const std::vector<MalformedLine>& errors() const noexcept { return errors_; }
  std::size_t line_capacity() const noexcept { return buf_.capacity(); }

  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = Statement;
    using difference_type = std::ptrdiff_t;
    using pointer = const Statement*;
    using reference = const Statement&;

    iterator() = default;
    explicit iterator(NTriplesReader* r) : r_(r) { ++*this; }

    reference operator*() const { return *cur_; }
    pointer operator->() const { return &*cur_; }
    iterator& operator++() {
      cur_ = r_->next();
      if (!cur_) r_ = nullptr;
      return *this;
    }
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.r_ == b.r_; }

   private:
    NTriplesReader* r_ = nullptr;
    std::optional<Statement> cur_;
  };

  iterator begin() { return iterator(this); }
  iterator end() { return iterator(); }

 private:
  std::istream& in_;
  ParseMode mode_;
  std::string buf_;
  std::size_t line_ = 0;
  std::size_t triples_ = 0;
  std::vector<MalformedLine> errors_;
};

}  // namespace kbq
