#pragma once

// Shared fixtures: a seeded RDF corpus generator, a nested-loop profile
// oracle, and an in-process SPARQL endpoint.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "kbq/cli.hpp"
#include "kbq/kbq.hpp"

namespace kbq::testing {

inline const std::string ex = "http://example.org/";

struct CorpusSpec {
  std::size_t triples = 1000;
  std::size_t subjects = 200;
  std::size_t classes = 4;
  std::size_t properties = 8;
  std::uint64_t seed = 1;
};

// Random but valid triples: typed subjects, IRI / literal / blank objects,
// several datatypes, language tags, escapes and non-ASCII text.
inline std::vector<Triple> generate_corpus(const CorpusSpec& spec) {
  Rng rng(spec.seed);
  std::vector<Triple> out;
  out.reserve(spec.triples);
  auto subject = [&](std::size_t i) {
    return i % 11 == 10 ? Term::blank("b" + std::to_string(i)) : Term::iri(ex + "s/" + std::to_string(i));
  };
  const Term type = Term::iri(vocab::rdf_type);
  for (std::size_t i = 0; i < spec.subjects && out.size() < spec.triples; ++i) {
    out.push_back({subject(i), type, Term::iri(ex + "C" + std::to_string(rng.below(spec.classes)))});
    if (rng.below(4) == 0)
      out.push_back({subject(i), type, Term::iri(ex + "C" + std::to_string(rng.below(spec.classes)))});
  }
  static const char* lexicals[] = {"plain", "with \"quote\"", "tab\there", "back\\slash", "line\nbreak",
                                   "caf\xC3\xA9", "\xF0\x9F\x98\x80 emoji", "", "x"};
  static const char* langs[] = {"en", "de", "en-GB"};
  static const char* datatypes[] = {"http://www.w3.org/2001/XMLSchema#date", "http://www.w3.org/2001/XMLSchema#integer",
                                    "http://dbpedia.org/datatype/second"};
  while (out.size() < spec.triples) {
    const Term s = subject(rng.below(spec.subjects));
    const Term p = Term::iri(ex + "p" + std::to_string(rng.below(spec.properties)));
    Term o;
    switch (rng.below(6)) {
      case 0:
      case 1: o = Term::iri(ex + "s/" + std::to_string(rng.below(spec.subjects + 20))); break;
      case 2: o = Term::literal(lexicals[rng.below(std::size(lexicals))]); break;
      case 3: o = Term::lang_literal(lexicals[rng.below(std::size(lexicals))], langs[rng.below(std::size(langs))]); break;
      case 4: o = Term::literal(std::to_string(rng.below(50)), datatypes[rng.below(std::size(datatypes))]); break;
      default: o = Term::blank("b" + std::to_string(rng.below(spec.subjects))); break;
    }
    out.push_back({s, p, std::move(o)});
  }
  return out;
}

inline std::string to_document(const std::vector<Triple>& ts) {
  std::string s;
  for (const auto& t : ts) s += serialize_ntriple(t);
  return s;
}

inline Snapshot snapshot_of(const std::vector<Triple>& ts, std::string release = "r") {
  Snapshot::Builder b(std::move(release));
  for (const auto& t : ts) b.add(t);
  return std::move(b).build();
}

// Profile recomputed by nested loops over the raw triple list.
inline ClassProfile oracle_profile(const std::vector<Triple>& ts, const std::string& cls, const std::string& release) {
  ClassProfile cp;
  cp.class_iri = cls;
  cp.release = release;
  std::set<Term> members;
  for (const auto& t : ts)
    if (t.predicate.value() == vocab::rdf_type && t.object == Term::iri(cls)) {
      members.insert(t.subject);
      ++cp.type_assertions;
    }
  cp.entity_count = members.size();

  // rdf:type lookup table from one scan; everything else is a plain loop.
  std::map<Term, std::set<std::string>> types;
  for (const auto& t : ts)
    if (t.predicate.value() == vocab::rdf_type && t.object.is_iri()) types[t.subject].insert(t.object.value());
  auto classes_of = [&](const Term& o) {
    auto it = types.find(o);
    return it == types.end() ? std::set<std::string>{} : it->second;
  };

  std::set<std::string> props;
  for (const auto& t : ts)
    if (members.count(t.subject) && t.predicate.value() != vocab::rdf_type) props.insert(t.predicate.value());

  for (const auto& p : props) {
    PropertyStats ps;
    ps.property = p;
    std::vector<Term> objects;
    std::map<Term, std::uint64_t> per_subject;
    for (const auto& m : members) per_subject[m] = 0;
    for (const auto& t : ts)
      if (members.count(t.subject) && t.predicate.value() == p) {
        objects.push_back(t.object);
        ++per_subject[t.subject];
      }
    ps.freq = objects.size();
    for (const auto& [s, n] : per_subject) {
      ++ps.cardinality_hist[n];
      if (n > 0) ++ps.distinct_subjects;
    }
    std::map<TermKind, std::set<Term>> distinct_by_kind;
    std::map<std::string, std::set<Term>> dt_distinct, cls_distinct;
    std::set<Term> unknown_distinct;
    for (const auto& o : objects) {
      distinct_by_kind[o.kind()].insert(o);
      switch (o.kind()) {
        case TermKind::IRI: ++ps.node_kinds.iri_total; break;
        case TermKind::Literal: ++ps.node_kinds.literal_total; break;
        case TermKind::BlankNode: ++ps.node_kinds.blank_total; break;
      }
      if (o.is_literal()) {
        ++ps.datatype_hist[o.datatype()].total;
        dt_distinct[o.datatype()].insert(o);
        if (is_string_datatype(o.datatype())) ++ps.string_length_hist[utf8_length(o.value())];
      } else {
        const auto cs = classes_of(o);
        if (cs.empty()) {
          ++ps.object_class_unknown.total;
          unknown_distinct.insert(o);
        }
        for (const auto& c : cs) {
          ++ps.object_class_hist[c].total;
          cls_distinct[c].insert(o);
        }
      }
    }
    ps.node_kinds.iri_distinct = distinct_by_kind[TermKind::IRI].size();
    ps.node_kinds.literal_distinct = distinct_by_kind[TermKind::Literal].size();
    ps.node_kinds.blank_distinct = distinct_by_kind[TermKind::BlankNode].size();
    for (auto& [dt, c] : ps.datatype_hist) c.distinct = dt_distinct[dt].size();
    for (auto& [c, n] : ps.object_class_hist) n.distinct = cls_distinct[c].size();
    ps.object_class_unknown.distinct = unknown_distinct.size();
    cp.properties.emplace(p, std::move(ps));
  }
  cp.np = cp.properties.size();
  return cp;
}

// SPARQL JSON for a table of bindings. Cells are (type, value, datatype).
struct Cell {
  std::string type = "literal";
  std::string value;
  std::string datatype = "http://www.w3.org/2001/XMLSchema#integer";
};

inline std::string sparql_json(const std::vector<std::string>& vars,
                               const std::vector<std::map<std::string, Cell>>& rows) {
  nlohmann::json j;
  j["head"]["vars"] = vars;
  j["results"]["bindings"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json b = nlohmann::json::object();
    for (const auto& [var, c] : r) {
      nlohmann::json v{{"type", c.type}, {"value", c.value}};
      if (c.type == "literal" && !c.datatype.empty()) v["datatype"] = c.datatype;
      b[var] = v;
    }
    j["results"]["bindings"].push_back(b);
  }
  return j.dump();
}

inline std::string count_json(const std::string& var, std::uint64_t n) {
  return sparql_json({var}, {{{var, Cell{"literal", std::to_string(n)}}}});
}

struct RecordedRequest {
  std::string method;
  std::string query;
  std::string accept;
  std::string authorization;
  std::string content_type;
};

// Local HTTP server on an ephemeral port. The handler maps a SPARQL query
// text to (status, body).
class MockEndpoint {
 public:
  using Handler = std::function<std::pair<int, std::string>(const std::string& query)>;

  explicit MockEndpoint(Handler h) : handler_(std::move(h)) {
    auto serve = [this](const httplib::Request& req, httplib::Response& res) {
      RecordedRequest r;
      r.method = req.method;
      r.accept = req.get_header_value("Accept");
      r.authorization = req.get_header_value("Authorization");
      r.content_type = req.get_header_value("Content-Type");
      r.query = req.get_param_value("query");
      {
        std::lock_guard lock(mu_);
        requests_.push_back(r);
        times_.push_back(std::chrono::steady_clock::now());
      }
      auto [status, body] = handler_(r.query);
      res.status = status;
      res.set_content(body, status == 200 ? "application/sparql-results+json" : "text/plain");
    };
    server_.Get("/sparql", serve);
    server_.Post("/sparql", serve);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockEndpoint() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/sparql"; }

  std::vector<RecordedRequest> requests() const {
    std::lock_guard lock(mu_);
    return requests_;
  }
  std::vector<std::chrono::steady_clock::time_point> times() const {
    std::lock_guard lock(mu_);
    return times_;
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mu_;
  std::vector<RecordedRequest> requests_;
  std::vector<std::chrono::steady_clock::time_point> times_;
};

// Answers every query the profiler issues by matching the exact query text
// against the templates instantiated for the snapshot's classes and
// properties, and evaluating it with the nested-loop oracle.
inline MockEndpoint::Handler oracle_handler(const std::vector<Triple>& ts) {
  auto shared = std::make_shared<std::vector<Triple>>(ts);
  return [shared](const std::string& q) -> std::pair<int, std::string> {
    const auto& ts = *shared;
    std::set<std::string> classes, props;
    for (const auto& t : ts) {
      props.insert(t.predicate.value());
      if (t.predicate.value() == vocab::rdf_type && t.object.is_iri()) classes.insert(t.object.value());
    }
    auto lit = [](std::uint64_t n) { return Cell{"literal", std::to_string(n)}; };
    for (const auto& c : classes) {
      const ClassProfile cp = oracle_profile(ts, c, "mock");
      if (q == query::count(c)) return {200, count_json("COUNT", cp.entity_count)};
      if (q == query::count_all(c)) return {200, count_json("COUNT", cp.type_assertions)};
      if (q == query::np(c)) {
        std::set<Term> members;
        for (const auto& t : ts)
          if (t.predicate.value() == vocab::rdf_type && t.object == Term::iri(c)) members.insert(t.subject);
        std::set<std::string> ps;
        for (const auto& t : ts)
          if (members.count(t.subject)) ps.insert(t.predicate.value());
        return {200, count_json("NP", ps.size())};
      }
      if (q == query::properties(c)) {
        std::vector<std::map<std::string, Cell>> rows;
        std::set<std::string> ps;
        for (const auto& [p, s] : cp.properties) ps.insert(p);
        ps.insert(vocab::rdf_type);
        for (const auto& p : ps) rows.push_back({{"p", Cell{"uri", p, ""}}});
        return {200, sparql_json({"p"}, rows)};
      }
      for (const auto& p : props) {
        auto it = cp.properties.find(p);
        const PropertyStats empty;
        const PropertyStats& ps = it == cp.properties.end() ? empty : it->second;
        if (q == query::freq(c, p)) return {200, count_json("FREQ", ps.freq)};
        if (q == query::cardinality(c, p)) {
          std::vector<std::map<std::string, Cell>> rows;
          for (const auto& [card, n] : ps.cardinality_hist)
            if (card > 0) rows.push_back({{"card", lit(card)}, {"count", lit(n)}});
          return {200, sparql_json({"card", "count"}, rows)};
        }
        if (q == query::node_kinds(c, p)) {
          std::vector<std::map<std::string, Cell>> rows;
          const auto& nk = ps.node_kinds;
          auto add = [&](const char* k, std::uint64_t t, std::uint64_t d) {
            if (t) rows.push_back({{"kind", Cell{"literal", k, ""}}, {"total", lit(t)}, {"distinct", lit(d)}});
          };
          add("IRI", nk.iri_total, nk.iri_distinct);
          add("Literal", nk.literal_total, nk.literal_distinct);
          add("BlankNode", nk.blank_total, nk.blank_distinct);
          return {200, sparql_json({"kind", "total", "distinct"}, rows)};
        }
        if (q == query::datatypes(c, p)) {
          std::vector<std::map<std::string, Cell>> rows;
          for (const auto& [dt, n] : ps.datatype_hist)
            rows.push_back({{"datatype", Cell{"uri", dt, ""}}, {"total", lit(n.total)}, {"distinct", lit(n.distinct)}});
          return {200, sparql_json({"datatype", "total", "distinct"}, rows)};
        }
        if (q == query::object_classes(c, p)) {
          std::vector<std::map<std::string, Cell>> rows;
          for (const auto& [k, n] : ps.object_class_hist)
            rows.push_back({{"class", Cell{"uri", k, ""}}, {"total", lit(n.total)}, {"distinct", lit(n.distinct)}});
          if (ps.object_class_unknown.total)
            rows.push_back({{"total", lit(ps.object_class_unknown.total)},
                            {"distinct", lit(ps.object_class_unknown.distinct)}});
          return {200, sparql_json({"class", "total", "distinct"}, rows)};
        }
        if (q == query::string_lengths(c, p)) {
          std::vector<std::map<std::string, Cell>> rows;
          for (const auto& [len, n] : ps.string_length_hist) rows.push_back({{"length", lit(len)}, {"count", lit(n)}});
          return {200, sparql_json({"length", "count"}, rows)};
        }
      }
    }
    return {400, "unrecognised query"};
  };
}

// Two Gaussian clusters with unit variance whose means differ by `separation`
// on every feature. Labels "neg" / "pos"; `positives` rows are positive.
inline Dataset gaussian_clusters(std::size_t rows, std::size_t positives, std::size_t width, double separation,
                                 std::uint64_t seed) {
  Rng rng(seed);
  Dataset d;
  for (std::size_t i = 0; i < rows; ++i) {
    const bool pos = i < positives;
    std::vector<double> x(width);
    for (auto& v : x) v = rng.normal() + (pos ? separation : 0.0);
    d.add(std::move(x), pos ? "pos" : "neg");
  }
  return d;
}

// Evidence for dbo:Person gathered from DBpedia statistics.
namespace person {

inline const std::string dbo = "http://dbpedia.org/ontology/";
inline const std::string dbp = "http://dbpedia.org/property/";
inline const std::string schema = "http://schema.org/";
inline const std::string xsd = "http://www.w3.org/2001/XMLSchema#";

// birthPlace objects of dbo:Person, most frequent class first.
inline PropertyEvidence birth_place() {
  PropertyEvidence ev;
  ev.property = dbp + "birthPlace";
  ev.node_kinds = NodeKindCounts{89355, 21845, 44639, 20405, 0, 0};
  ev.object_classes = std::vector<std::pair<std::string, Counts>>{
      {schema + "Place", {71748, 16502}},       {dbo + "Place", {71748, 16502}},
      {dbo + "PopulatedPlace", {71542, 16353}}, {dbo + "Settlement", {41216, 14184}},
      {schema + "Product", {2, 2}},             {dbo + "Broadcaster", {2, 2}}};
  ev.object_total = 89355;
  return ev;
}

inline PropertyEvidence death_date() {
  PropertyEvidence ev;
  ev.property = dbp + "deathDate";
  const auto labels = observed_cardinality_labels({{0, 1355038}, {1, 404069}, {2, 8165}});
  ev.min_label = labels.min;
  ev.max_label = labels.max;
  ev.node_kinds = NodeKindCounts{127, 111, 65272, 32449, 0, 0};
  ev.datatype_hist = std::map<std::string, Counts>{{xsd + "date", {39761, 26726}},
                                                   {xsd + "integer", {13543, 1758}},
                                                   {vocab::rdf_lang_string, {6388, 3512}},
                                                   {xsd + "gMonthDay", {5446, 366}},
                                                   {"http://dbpedia.org/datatype/second", {113, 66}},
                                                   {xsd + "double", {20, 20}},
                                                   {"http://dbpedia.org/datatype/hour", {1, 1}}};
  return ev;
}

inline PropertyEvidence title() {
  PropertyEvidence ev;
  ev.property = dbo + "title";
  ev.node_kinds = NodeKindCounts{0, 0, 36, 30, 0, 0};
  ev.datatype_hist = std::map<std::string, Counts>{{xsd + "string", {36, 30}}};
  ev.lengths = string_quartiles({{16, 20}, {13, 7}, {15, 5}, {20, 4}});
  return ev;
}

}  // namespace person

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kbq-test-" + name + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI in-process.
struct CliResult {
  int code = 0;
  std::string out, err;
};

inline CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kbq");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace kbq::testing
