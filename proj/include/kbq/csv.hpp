#pragma once

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kbq/error.hpp"

namespace kbq::csv {

using Row = std::vector<std::string>;

// Shortest representation that round-trips; "inf" for infinities.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

inline double parse_double(std::string_view s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw Error("csv", ErrorCode::InvalidArgument, "not a number: '" + std::string(s) + "'");
  return v;
}

inline std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// RFC 4180 writer (CRLF record terminator).
class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void comment(std::string_view text) { os_ << "# " << text << "\r\n"; }

  void row(const Row& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) os_ << ',';
      os_ << quote(fields[i]);
    }
    os_ << "\r\n";
  }

 private:
  std::ostream& os_;
};

// Reads RFC 4180 records. Lines beginning with '#' outside a quoted field are
// provenance comments and are skipped. Accepts CRLF or LF terminators.
class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  bool next(Row& out) {
    out.clear();
    int c = is_.peek();
    while (c == '#' || c == '\r' || c == '\n') {
      std::string skip;
      std::getline(is_, skip);
      c = is_.peek();
    }
    if (c == std::char_traits<char>::eof()) return false;

    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    while (true) {
      c = is_.get();
      if (c == std::char_traits<char>::eof()) {
        out.push_back(std::move(field));
        return true;
      }
      char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (is_.peek() == '"') {
            is_.get();
            field += '"';
          } else {
            quoted = false;
          }
        } else {
          field += ch;
        }
        continue;
      }
      if (ch == '"' && field.empty() && !was_quoted) {
        quoted = true;
        was_quoted = true;
      } else if (ch == ',') {
        out.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (ch == '\r') {
        if (is_.peek() == '\n') is_.get();
        out.push_back(std::move(field));
        return true;
      } else if (ch == '\n') {
        out.push_back(std::move(field));
        return true;
      } else {
        field += ch;
      }
    }
  }

 private:
  std::istream& is_;
};

// Maps header names to column indices; throws MissingColumn for absent names.
class Header {
 public:
  Header() = default;
  explicit Header(Row names) : names_(std::move(names)) {}

  std::size_t index(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return i;
    throw Error("csv", ErrorCode::MissingColumn, "missing column '" + std::string(name) + "'");
  }

  bool has(std::string_view name) const {
    for (const auto& n : names_)
      if (n == name) return true;
    return false;
  }

  const Row& names() const { return names_; }

 private:
  Row names_;
};

}  // namespace kbq::csv
