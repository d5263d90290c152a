#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "kbq/error.hpp"
#include "kbq/histogram.hpp"
#include "kbq/rdf.hpp"

namespace kbq {

// Query templates. The first three are the measurement-element queries;
// the fourth is the cardinality star query bound to one property.
namespace query {

inline std::string substitute(std::string text, std::string_view placeholder, const std::string& iri) {
  const std::string bracketed = "<" + iri + ">";
  for (std::size_t pos = text.find(placeholder); pos != std::string::npos;
       pos = text.find(placeholder, pos + bracketed.size()))
    text.replace(pos, placeholder.size(), bracketed);
  return text;
}

inline std::string count(const std::string& cls) {
  return substitute("SELECT COUNT(DISTINCT ?s) AS ?COUNT\nWHERE {  ?s a <C> . }", "<C>", cls);
}

// Non-distinct variant: counts rdf:type assertions.
inline std::string count_all(const std::string& cls) {
  return substitute("SELECT COUNT(?s) AS ?COUNT\nWHERE {  ?s a <C> . }", "<C>", cls);
}

inline std::string freq(const std::string& cls, const std::string& property) {
  return substitute(substitute("SELECT COUNT(*) AS ?FREQ\nWHERE {  \n    ?s <p> ?o.\n    ?s a <C>.\n}", "<C>", cls),
                    "<p>", property);
}

inline std::string np(const std::string& cls) {
  return substitute("SELECT COUNT(DISTINCT ?p) AS ?NP\nWHERE {  \n    ?s ?p ?o.\n    ?s a <C>.\n}", "<C>", cls);
}

inline std::string cardinality(const std::string& cls, const std::string& property) {
  return substitute(substitute("SELECT ?card (COUNT (?s) as ?count )\n"
                               "WHERE {\n"
                               "  SELECT ?s (COUNT (?o) as ?card) \n"
                               "  WHERE {\n"
                               "     ?s a <C> ;\n"
                               "     <p> ?o\n"
                               "   } GROUP BY ?s\n"
                               "} GROUP BY ?card ORDER BY DESC(?count)",
                               "<C>", cls),
                    "<p>", property);
}

// Profile helper queries (SPARQL 1.1) used when profiling from an endpoint.
inline std::string properties(const std::string& cls) {
  return substitute("SELECT DISTINCT ?p\nWHERE {\n    ?s ?p ?o.\n    ?s a <C>.\n} ORDER BY ?p", "<C>", cls);
}

inline std::string node_kinds(const std::string& cls, const std::string& property) {
  return substitute(substitute("SELECT ?kind (COUNT(?o) AS ?total) (COUNT(DISTINCT ?o) AS ?distinct)\n"
                               "WHERE {\n"
                               "    ?s a <C> ;\n"
                               "       <p> ?o .\n"
                               "    BIND(IF(isIRI(?o), \"IRI\", IF(isBlank(?o), \"BlankNode\", \"Literal\")) AS ?kind)\n"
                               "} GROUP BY ?kind",
                               "<C>", cls),
                    "<p>", property);
}

inline std::string datatypes(const std::string& cls, const std::string& property) {
  return substitute(substitute("SELECT ?datatype (COUNT(?o) AS ?total) (COUNT(DISTINCT ?o) AS ?distinct)\n"
                               "WHERE {\n"
                               "    ?s a <C> ;\n"
                               "       <p> ?o .\n"
                               "    FILTER(isLiteral(?o))\n"
                               "    BIND(DATATYPE(?o) AS ?datatype)\n"
                               "} GROUP BY ?datatype",
                               "<C>", cls),
                    "<p>", property);
}

inline std::string object_classes(const std::string& cls, const std::string& property) {
  return substitute(substitute("SELECT ?class (COUNT(?o) AS ?total) (COUNT(DISTINCT ?o) AS ?distinct)\n"
                               "WHERE {\n"
                               "    ?s a <C> ;\n"
                               "       <p> ?o .\n"
                               "    FILTER(!isLiteral(?o))\n"
                               "    OPTIONAL { ?o a ?class }\n"
                               "} GROUP BY ?class",
                               "<C>", cls),
                    "<p>", property);
}

inline std::string string_lengths(const std::string& cls, const std::string& property) {
  return substitute(
      substitute("SELECT ?length (COUNT(?o) AS ?count)\n"
                 "WHERE {\n"
                 "    ?s a <C> ;\n"
                 "       <p> ?o .\n"
                 "    FILTER(isLiteral(?o) && (DATATYPE(?o) = <http://www.w3.org/2001/XMLSchema#string> || "
                 "DATATYPE(?o) = <http://www.w3.org/1999/02/22-rdf-syntax-ns#langString>))\n"
                 "    BIND(STRLEN(STR(?o)) AS ?length)\n"
                 "} GROUP BY ?length",
                 "<C>", cls),
      "<p>", property);
}

}  // namespace query

// Decoded application/sparql-results+json.
struct SparqlResultSet {
  std::vector<std::string> variables;
  std::vector<std::map<std::string, Term>> rows;
};

inline SparqlResultSet parse_sparql_json(std::string_view body) {
  auto malformed = [](const std::string& why) { return Error("acquisition", ErrorCode::MalformedResult, why); };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw malformed(std::string("result is not JSON: ") + e.what());
  }
  SparqlResultSet rs;
  try {
    for (const auto& v : j.at("head").at("vars")) rs.variables.push_back(v.get<std::string>());
    for (const auto& b : j.at("results").at("bindings")) {
      std::map<std::string, Term> row;
      for (const auto& [var, val] : b.items()) {
        if (std::find(rs.variables.begin(), rs.variables.end(), var) == rs.variables.end())
          throw malformed("binding for undeclared variable ?" + var);
        const std::string type = val.at("type").get<std::string>();
        const std::string value = val.at("value").get<std::string>();
        try {
          if (type == "uri") {
            row.emplace(var, Term::iri(value));
          } else if (type == "bnode") {
            row.emplace(var, Term::blank(value));
          } else if (type == "literal" || type == "typed-literal") {
            if (val.contains("xml:lang")) row.emplace(var, Term::lang_literal(value, val.at("xml:lang").get<std::string>()));
            else if (val.contains("datatype")) row.emplace(var, Term::literal(value, val.at("datatype").get<std::string>()));
            else row.emplace(var, Term::literal(value));
          } else {
            throw malformed("unknown binding type '" + type + "'");
          }
        } catch (const std::invalid_argument& e) {
          throw malformed(std::string("invalid term in binding: ") + e.what());
        }
      }
      rs.rows.push_back(std::move(row));
    }
  } catch (const nlohmann::json::exception& e) {
    throw malformed(std::string("unexpected result structure: ") + e.what());
  }
  return rs;
}

inline std::uint64_t literal_to_count(const Term& t, std::string_view var) {
  if (!t.is_literal() || t.value().empty())
    throw Error("acquisition", ErrorCode::MalformedResult, "?" + std::string(var) + " is not an integer literal");
  std::uint64_t n = 0;
  auto [p, ec] = std::from_chars(t.value().data(), t.value().data() + t.value().size(), n);
  if (ec != std::errc() || p != t.value().data() + t.value().size())
    throw Error("acquisition", ErrorCode::MalformedResult,
                "?" + std::string(var) + " is not a non-negative integer: '" + t.value() + "'");
  return n;
}

// Reads the single integer binding of a one-row aggregate result.
inline std::uint64_t single_count(const SparqlResultSet& rs, const std::string& var) {
  if (rs.rows.empty()) throw Error("acquisition", ErrorCode::MissingBinding, "empty result for ?" + var);
  auto it = rs.rows.front().find(var);
  if (it == rs.rows.front().end()) {
    // Some stores rename unparenthesised aggregates; accept a lone binding.
    if (rs.rows.front().size() == 1) return literal_to_count(rs.rows.front().begin()->second, var);
    throw Error("acquisition", ErrorCode::MissingBinding, "no binding for ?" + var);
  }
  return literal_to_count(it->second, var);
}

struct ClientOptions {
  int max_in_flight = 4;
  // Retries after the first attempt, on 5xx and transport failures.
  int retries = 3;
  std::chrono::milliseconds base_delay{1000};
  std::chrono::milliseconds timeout{60000};
  std::size_t post_threshold = 2048;
  std::optional<std::string> bearer_token;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

  static ClientOptions from_env() {
    ClientOptions o;
    if (const char* tok = std::getenv("KBQ_SPARQL_TOKEN"); tok && *tok) o.bearer_token = tok;
    return o;
  }
};

namespace detail {

inline std::string form_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xF];
    }
  }
  return out;
}

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw Error("acquisition", ErrorCode::InvalidArgument, "endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace detail

// SPARQL 1.1 Protocol client. GET with a `query` parameter, POST
// form-encoded above post_threshold bytes. Safe to share across threads; at
// most max_in_flight requests run at once.
class SparqlClient {
 public:
  explicit SparqlClient(std::string endpoint, ClientOptions options = ClientOptions::from_env())
      : endpoint_(std::move(endpoint)),
        url_(detail::split_url(endpoint_)),
        options_(std::move(options)),
        slots_(std::make_unique<std::counting_semaphore<256>>(std::clamp(options_.max_in_flight, 1, 256))) {}

  const std::string& endpoint() const noexcept { return endpoint_; }
  int max_in_flight() const noexcept { return std::max(options_.max_in_flight, 1); }

  SparqlResultSet select(const std::string& sparql) const { return parse_sparql_json(fetch(sparql)); }

  // Raw response body; retries per ClientOptions.
  std::string fetch(const std::string& sparql) const {
    for (int attempt = 0;; ++attempt) {
      Outcome r = attempt_once(sparql);
      if (r.status == 200) return std::move(r.body);
      const bool retryable = r.status == 0 || r.status >= 500;
      if (!retryable || attempt >= options_.retries) {
        if (r.status == 0)
          throw EndpointError(0, r.timeout,
                              endpoint_ + ": " + (r.timeout ? std::string("timeout") : "transport error") + " (" +
                                  r.transport + ") after " + std::to_string(attempt + 1) + " attempt(s)");
        throw EndpointError(r.status, false,
                            endpoint_ + ": HTTP status " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
      }
      options_.sleep(options_.base_delay * (1LL << attempt));
    }
  }

  std::uint64_t count(const std::string& cls) const { return single_count(select(query::count(cls)), "COUNT"); }
  std::uint64_t count_all(const std::string& cls) const { return single_count(select(query::count_all(cls)), "COUNT"); }
  std::uint64_t freq(const std::string& cls, const std::string& property) const {
    return single_count(select(query::freq(cls, property)), "FREQ");
  }
  std::uint64_t np(const std::string& cls) const { return single_count(select(query::np(cls)), "NP"); }

  // Histogram over cardinalities; the zero bucket is count(C) minus the
  // number of subjects with at least one value. Empty buckets are omitted.
  CardinalityHistogram cardinality_histogram(const std::string& cls, const std::string& property) const {
    const std::uint64_t total = count(cls);
    const SparqlResultSet rs = select(query::cardinality(cls, property));
    CardinalityHistogram hist;
    std::uint64_t with_values = 0;
    for (const auto& row : rs.rows) {
      auto card = row.find("card");
      auto cnt = row.find("count");
      if (card == row.end() || cnt == row.end())
        throw Error("acquisition", ErrorCode::MissingBinding, "cardinality row lacks ?card or ?count");
      const std::uint64_t c = literal_to_count(card->second, "card");
      const std::uint64_t n = literal_to_count(cnt->second, "count");
      if (c == 0) throw Error("acquisition", ErrorCode::MalformedResult, "cardinality query returned ?card = 0");
      if (n > 0) hist[c] += n;
      with_values += n;
    }
    if (with_values > total)
      throw Error("acquisition", ErrorCode::NegativeZeroBucket,
                  std::to_string(with_values) + " subjects with values exceed count " + std::to_string(total));
    if (total - with_values > 0) hist[0] = total - with_values;
    return hist;
  }

 private:
  struct Outcome {
    int status = 0;
    bool timeout = false;
    std::string transport;
    std::string body;
  };

  Outcome attempt_once(const std::string& sparql) const {
    slots_->acquire();
    struct Release {
      std::counting_semaphore<256>* s;
      ~Release() { s->release(); }
    } release{slots_.get()};

    httplib::Client cli(url_.origin);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    httplib::Headers headers{{"Accept", "application/sparql-results+json"}};
    if (options_.bearer_token) headers.emplace("Authorization", "Bearer " + *options_.bearer_token);

    httplib::Result res = sparql.size() > options_.post_threshold
                              ? cli.Post(url_.path, headers, "query=" + detail::form_encode(sparql),
                                         "application/x-www-form-urlencoded")
                              : cli.Get(url_.path + (url_.path.find('?') == std::string::npos ? "?" : "&") +
                                            "query=" + detail::form_encode(sparql),
                                        headers);
    Outcome o;
    if (!res) {
      const httplib::Error err = res.error();
      o.timeout = err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout;
      o.transport = httplib::to_string(err);
      return o;
    }
    o.status = res->status;
    o.body = std::move(res->body);
    return o;
  }

  std::string endpoint_;
  detail::ParsedUrl url_;
  ClientOptions options_;
  std::unique_ptr<std::counting_semaphore<256>> slots_;
};

// Free-function forms of the measurement elements over an endpoint.
inline std::uint64_t fetch_count(const SparqlClient& c, const std::string& cls) { return c.count(cls); }
inline std::uint64_t fetch_freq(const SparqlClient& c, const std::string& cls, const std::string& p) {
  return c.freq(cls, p);
}
inline std::uint64_t fetch_np(const SparqlClient& c, const std::string& cls) { return c.np(cls); }
inline CardinalityHistogram fetch_cardinality_histogram(const SparqlClient& c, const std::string& cls,
                                                        const std::string& p) {
  return c.cardinality_histogram(cls, p);
}

}  // namespace kbq
