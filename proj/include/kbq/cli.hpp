#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kbq/annotations.hpp"
#include "kbq/csv.hpp"
#include "kbq/error.hpp"
#include "kbq/evolution.hpp"
#include "kbq/features.hpp"
#include "kbq/learn.hpp"
#include "kbq/prefixes.hpp"
#include "kbq/profiler.hpp"
#include "kbq/registry.hpp"
#include "kbq/remote_profile.hpp"
#include "kbq/shapes.hpp"
#include "kbq/smote.hpp"
#include "kbq/snapshot.hpp"
#include "kbq/sparql.hpp"

namespace kbq::cli {

inline constexpr std::string_view version = "0.1.0";
inline constexpr std::uint64_t default_seed = 20160909;

namespace fs = std::filesystem;

struct RunConfig {
  fs::path registry = "releases.json";
  fs::path out = ".";
  std::uint64_t seed = default_seed;
  CompletenessMode mode = CompletenessMode::Normalized;
  bool strict = false;
  std::optional<double> class_threshold;
  int retry_delay_ms = 1000;

  Strictness strictness() const { return strict ? Strictness::Strict : Strictness::Weak; }
  std::string provenance() const {
    return "kbq " + std::string(version) + " seed=" + std::to_string(seed) + " mode=" + std::string(to_string(mode));
  }
};

// Exclusive claim on an output directory for the lifetime of the object.
class OutputLock {
 public:
  explicit OutputLock(const fs::path& dir) : path_(dir / ".kbq.lock") {
    fs::create_directories(dir);
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
      throw Error("cli", ErrorCode::Io, "output directory " + dir.string() + " is locked by another run (" +
                                            path_.string() + ")");
    std::fclose(f);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;
  ~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }

 private:
  fs::path path_;
};

inline std::string file_stem_for(const std::string& iri) {
  std::string s = compact_iri(iri);
  if (!s.empty() && s.front() == '<') s = iri.substr(iri.find_last_of("/#") + 1);
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

inline std::string local_part(const std::string& iri) {
  std::string s = compact_iri(iri);
  if (auto colon = s.find(':'); colon != std::string::npos && s.front() != '<') s = s.substr(colon + 1);
  else s = iri.substr(iri.find_last_of("/#") + 1);
  return s;
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cli", ErrorCode::Io, "cannot write " + path.string());
  f << content;
}

inline fs::path resolve_dump(const RunConfig& cfg, const std::string& p) {
  fs::path path(p);
  if (path.is_relative()) path = cfg.registry.parent_path() / path;
  return path;
}

inline ClientOptions client_options(const RunConfig& cfg) {
  ClientOptions o = ClientOptions::from_env();
  o.base_delay = std::chrono::milliseconds(cfg.retry_delay_ms);
  return o;
}

// ---- commands ----

inline void cmd_register(const RunConfig& cfg, const std::string& id, const std::string& date,
                         const std::string& dump, const std::string& endpoint, std::ostream& out) {
  if (dump.empty() == endpoint.empty())
    throw Error("cli", ErrorCode::InvalidArgument, "register needs exactly one of --dump or --endpoint");
  ReleaseSource src = dump.empty() ? ReleaseSource{EndpointSource{endpoint}} : ReleaseSource{DumpSource{dump}};
  auto reg = register_release(load_registry(cfg.registry), {id, Date::parse(date), std::move(src)});
  save_registry(reg, cfg.registry);
  out << "registered " << id << " (" << reg.size() << " releases)\n";
}

inline KBProfile profile_release(const RunConfig& cfg, const ReleaseDescriptor& rel,
                                 const std::vector<std::string>& classes, const ProfileOptions& opts,
                                 std::ostream& err) {
  if (const auto* dump = std::get_if<DumpSource>(&rel.source)) {
    std::vector<MalformedLine> errors;
    const Snapshot snap = load_dump(resolve_dump(cfg, dump->path), rel.id, ParseMode::Lenient, &errors);
    for (const auto& e : errors) err << "kbq: warning: " << rel.id << ": " << e.what() << "\n";
    return profile_snapshot(snap, classes, opts);
  }
  if (classes.empty())
    throw Error("cli", ErrorCode::InvalidArgument,
                "endpoint release '" + rel.id + "' needs an explicit --class list");
  SparqlClient client(std::get<EndpointSource>(rel.source).url, client_options(cfg));
  KBProfile kb;
  kb.release = rel.id;
  for (const auto& c : classes) kb.classes.emplace(c, profile_class_remote(client, c, rel.id, opts));
  return kb;
}

inline void cmd_profile(const RunConfig& cfg, std::vector<std::string> releases, bool all,
                        const std::vector<std::string>& classes_in, bool include_type, std::ostream& out,
                        std::ostream& err) {
  const auto reg = load_registry(cfg.registry);
  if (all) {
    releases.clear();
    for (const auto& r : reg) releases.push_back(r.id);
  }
  if (releases.empty()) throw Error("cli", ErrorCode::InvalidArgument, "name a release or pass --all");
  std::vector<std::string> classes;
  for (const auto& c : classes_in) classes.push_back(expand_iri(c));
  OutputLock lock(cfg.out);
  for (const auto& id : releases) {
    const KBProfile kb = profile_release(cfg, reg.at(id), classes, ProfileOptions{include_type}, err);
    const fs::path path = profile_path(cfg.out, id);
    save_profile(kb, path);
    out << path.string() << "\n";
  }
}

inline ClassCompletenessReport cmd_completeness(const RunConfig& cfg, const std::string& cls_in,
                                                const std::string& prev, const std::string& cur, std::ostream& out) {
  const std::string cls = expand_iri(cls_in);
  const KBProfile p = load_profile(profile_path(cfg.out, prev));
  const KBProfile c = load_profile(profile_path(cfg.out, cur));
  const auto consistent = schema_consistent_classes({p, c});
  if (std::find(consistent.begin(), consistent.end(), cls) == consistent.end())
    throw Error("cli", ErrorCode::UnknownClass, "class <" + cls + "> is not present in both releases");
  auto rep = completeness_report(p, c, cls, cfg.mode, cfg.strictness());

  std::ostringstream csv_text;
  write_completeness_csv(csv_text, rep, cfg.provenance());
  OutputLock lock(cfg.out);
  const fs::path path = cfg.out / ("completeness-" + file_stem_for(cls) + "-" + prev + "-" + cur + ".csv");
  write_file(path, csv_text.str());
  out << "class_completeness=" << csv::format_double(rep.class_completeness) << "\n";
  return rep;
}

inline std::vector<CountSeries> read_series_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", ErrorCode::Io, "cannot open series " + path.string());
  csv::Reader r(in);
  csv::Row row;
  if (!r.next(row)) throw Error("cli", ErrorCode::MissingColumn, "series file has no header");
  const csv::Header h(row);
  const std::size_t ci = h.index("class"), ri = h.index("release"), di = h.index("date"), ni = h.index("count");
  std::map<std::string, CountSeries> by_class;
  std::vector<std::string> order;
  while (r.next(row)) {
    const std::string cls = expand_iri(row.at(ci));
    auto [it, fresh] = by_class.try_emplace(cls, CountSeries{cls, {}});
    if (fresh) order.push_back(cls);
    it->second.points.push_back({row.at(ri), Date::parse(row.at(di)), std::stoull(row.at(ni))});
  }
  std::vector<CountSeries> out;
  for (const auto& c : order) {
    auto s = by_class.at(c);
    std::stable_sort(s.points.begin(), s.points.end(),
                     [](const CountPoint& a, const CountPoint& b) { return a.date < b.date; });
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<std::pair<std::string, GrowthResult>> cmd_growth(const RunConfig& cfg,
                                                                    const std::vector<std::string>& classes_in,
                                                                    const std::string& series_path,
                                                                    std::ostream& out) {
  std::vector<CountSeries> series;
  if (!series_path.empty()) {
    series = read_series_csv(series_path);
    if (!classes_in.empty()) {
      std::set<std::string> want;
      for (const auto& c : classes_in) want.insert(expand_iri(c));
      std::erase_if(series, [&](const CountSeries& s) { return !want.count(s.class_iri); });
    }
  } else {
    if (classes_in.empty()) throw Error("cli", ErrorCode::InvalidArgument, "growth needs a class or --series");
    const auto reg = load_registry(cfg.registry);
    std::vector<KBProfile> profiles;
    for (const auto& r : reg) profiles.push_back(load_profile(profile_path(cfg.out, r.id)));
    for (const auto& c : classes_in) {
      CountSeries s{expand_iri(c), {}};
      for (std::size_t i = 0; i < reg.size(); ++i) {
        const ClassProfile* cp = profiles[i].find(s.class_iri);
        s.points.push_back({reg.releases()[i].id, reg.releases()[i].date, cp ? cp->entity_count : 0});
      }
      series.push_back(std::move(s));
    }
  }
  if (series.empty()) throw Error("cli", ErrorCode::InvalidArgument, "no series selected");

  std::vector<std::pair<std::string, GrowthResult>> results;
  for (const auto& s : series) results.emplace_back(s.class_iri, growth_analysis(s));

  std::ostringstream text;
  csv::Writer w(text);
  w.comment(cfg.provenance());
  write_growth_csv_header(w);
  for (const auto& [cls, g] : results) write_growth_csv_row(w, cls, g);
  OutputLock lock(cfg.out);
  write_file(cfg.out / "growth.csv", text.str());
  out << text.str();
  return results;
}

// Subjects typed with the class that carry the property in one release.
inline std::set<std::string> subjects_with(const Snapshot& s, const std::string& cls, const std::string& prop) {
  std::set<std::string> out;
  const auto p = s.find(Term::iri(prop));
  if (!p) return out;
  for (TermId subj : s.subjects_of_type(cls))
    for (std::size_t idx : s.by_subject(subj))
      if (s.triples()[idx].p == *p) {
        out.insert(to_ntriples(s.term(subj)));
        break;
      }
  return out;
}

inline std::vector<std::string> cmd_diff_subjects(const RunConfig& cfg, const std::string& cls_in,
                                                  const std::string& prop_in, const std::string& prev,
                                                  const std::string& cur, std::ostream& out) {
  const std::string cls = expand_iri(cls_in), prop = expand_iri(prop_in);
  const auto reg = load_registry(cfg.registry);
  std::vector<std::set<std::string>> sets;
  for (const auto& id : {prev, cur}) {
    const auto& rel = reg.at(id);
    const auto* dump = std::get_if<DumpSource>(&rel.source);
    if (!dump)
      throw Error("cli", ErrorCode::EndpointOnlyRelease, "release '" + id + "' has no dump; subject sets need one");
    sets.push_back(subjects_with(load_dump(resolve_dump(cfg, dump->path), id), cls, prop));
  }
  std::vector<std::string> missing;
  std::set_difference(sets[0].begin(), sets[0].end(), sets[1].begin(), sets[1].end(), std::back_inserter(missing));

  std::ostringstream text;
  csv::Writer w(text);
  w.comment(cfg.provenance());
  w.row({"subject"});
  for (const auto& s : missing) {
    // Store IRIs bare and keep blank nodes in _: form.
    w.row({s.front() == '<' ? s.substr(1, s.size() - 2) : s});
  }
  OutputLock lock(cfg.out);
  write_file(cfg.out / ("missing-" + file_stem_for(cls) + "-" + file_stem_for(prop) + "-" + prev + "-" + cur + ".csv"),
             text.str());
  out << text.str();
  return missing;
}

struct FeatureTables {
  std::vector<TrainingExample> cardinality;  // 30 features per property
  std::vector<TrainingExample> range;        // node-kind features per property
};

inline FeatureTables extract_features(const ClassProfile& cp) {
  FeatureTables t;
  for (const auto& [p, ps] : cp.properties) {
    if (histogram_mass(ps.cardinality_hist) >= 2 && !ps.cardinality_hist.empty())
      t.cardinality.push_back({cp.class_iri, p, cardinality_features(ps.cardinality_hist).as_vector(), {}});
    if (ps.freq > 0 && ps.node_kinds.iri_total + ps.node_kinds.literal_total + ps.node_kinds.blank_total > 0)
      t.range.push_back({cp.class_iri, p, range_features(ps), {}});
  }
  return t;
}

inline std::string feature_csv(const std::vector<TrainingExample>& rows, const std::vector<std::string>& names,
                               const std::string& provenance) {
  std::ostringstream os;
  csv::Writer w(os);
  w.comment(provenance);
  csv::Row header{"class", "property"};
  header.insert(header.end(), names.begin(), names.end());
  w.row(header);
  for (const auto& r : rows) {
    csv::Row row{r.class_iri, r.property};
    for (double v : r.features) row.push_back(csv::format_double(v));
    w.row(row);
  }
  return os.str();
}

inline std::vector<std::string> cardinality_feature_names() {
  std::vector<std::string> n;
  for (int i = 1; i <= 30; ++i) n.push_back("p" + std::to_string(i));
  return n;
}

inline std::vector<std::string> range_feature_column_names() {
  return {range_feature_names.begin(), range_feature_names.end()};
}

inline std::vector<TrainingExample> read_feature_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cli", ErrorCode::Io, "cannot open features " + path.string());
  csv::Reader r(in);
  csv::Row row;
  if (!r.next(row)) throw Error("cli", ErrorCode::MissingColumn, "feature file has no header");
  const csv::Header h(row);
  const std::size_t ci = h.index("class"), pi = h.index("property");
  std::vector<TrainingExample> out;
  while (r.next(row)) {
    TrainingExample ex{expand_iri(row.at(ci)), expand_iri(row.at(pi)), {}, {}};
    for (std::size_t i = 0; i < row.size(); ++i)
      if (i != ci && i != pi) ex.features.push_back(csv::parse_double(row[i]));
    out.push_back(std::move(ex));
  }
  return out;
}

inline FeatureTables cmd_features(const RunConfig& cfg, const std::string& release, const std::string& cls_in,
                                  std::ostream& out) {
  const std::string cls = expand_iri(cls_in);
  const KBProfile kb = load_profile(profile_path(cfg.out, release));
  const ClassProfile* cp = kb.find(cls);
  if (!cp) throw Error("cli", ErrorCode::UnknownClass, "class <" + cls + "> not profiled in " + release);
  FeatureTables t = extract_features(*cp);
  OutputLock lock(cfg.out);
  const std::string stem = file_stem_for(cls) + "-" + release;
  const fs::path card = cfg.out / ("features-cardinality-" + stem + ".csv");
  const fs::path range = cfg.out / ("features-range-" + stem + ".csv");
  write_file(card, feature_csv(t.cardinality, cardinality_feature_names(), cfg.provenance()));
  write_file(range, feature_csv(t.range, range_feature_column_names(), cfg.provenance()));
  out << card.string() << "\n" << range.string() << "\n";
  return t;
}

struct TrainOptions {
  Task task = Task::MinCard;
  ClassifierSpec spec;
  std::size_t folds = 10;
  std::optional<std::string> positive_class;
  bool smote = false;
  SmoteParams smote_params;
};

// Labeled rows for a task: annotations joined to feature rows on (class, property).
inline Dataset labeled_dataset(const std::vector<TrainingExample>& features, const std::vector<Annotation>& ann,
                               Task task) {
  std::map<std::pair<std::string, std::string>, const TrainingExample*> index;
  for (const auto& f : features) index[{f.class_iri, f.property}] = &f;
  Dataset d;
  for (const auto& a : ann) {
    if (a.task != task) continue;
    auto it = index.find({expand_iri(a.class_iri), expand_iri(a.property)});
    if (it == index.end()) continue;
    d.add(it->second->features, training_label(task, a.label));
  }
  return d;
}

// Cross-validates; SMOTE, when enabled, rebalances each training fold only.
inline EvaluationReport evaluate(const Dataset& d, const TrainOptions& opts, const std::string& provenance_task) {
  check_rectangular(d, "learn");
  if (d.size() == 0) throw Error("learn", ErrorCode::EmptyDataset, "no annotated rows for the task");
  const std::string positive = opts.positive_class ? *opts.positive_class : minority_label(d);
  EvaluationReport rep;
  if (opts.smote) {
    rep = cross_validate(
        [&](const Dataset& train_set, std::uint64_t s) {
          ClassifierSpec spec = opts.spec;
          spec.seed = s;
          SmoteParams sp = opts.smote_params;
          sp.seed = derive_seed(s, 0x5307e);
          return train(spec, smote(train_set, sp));
        },
        d, opts.folds, positive, opts.spec.seed);
    rep.algorithm = std::string(to_string(opts.spec.algorithm));
  } else {
    rep = cross_validate(opts.spec, d, opts.folds, positive);
  }
  rep.task = provenance_task;
  return rep;
}

inline EvaluationReport cmd_train(const RunConfig& cfg, const fs::path& features_path, const fs::path& ann_path,
                                  TrainOptions opts, std::ostream& out) {
  opts.spec.seed = derive_seed(cfg.seed, 1);
  opts.smote_params.seed = derive_seed(cfg.seed, 2);
  const Dataset d = labeled_dataset(read_feature_csv(features_path), load_annotations(ann_path), opts.task);
  auto rep = evaluate(d, opts, std::string(to_string(opts.task)));
  const std::string json = to_json(rep, cfg.provenance()).dump(2) + "\n";
  OutputLock lock(cfg.out);
  write_file(cfg.out / ("evaluation-" + std::string(to_string(opts.task)) + "-" + rep.algorithm + ".json"), json);
  out << json;
  return rep;
}

struct InduceResult {
  FeatureTables features;
  std::vector<EvaluationReport> evaluations;
  ShapeDocument shapes;
  std::string turtle;
};

inline InduceResult cmd_induce(const RunConfig& cfg, const std::string& cls_in, const std::string& release,
                               const std::string& ann_path, bool emit_shapes, TrainOptions topts, std::ostream& out) {
  const std::string cls = expand_iri(cls_in);
  const KBProfile kb = load_profile(profile_path(cfg.out, release));
  const ClassProfile* cp = kb.find(cls);
  if (!cp) throw Error("cli", ErrorCode::UnknownClass, "class <" + cls + "> not profiled in " + release);

  InduceResult res;
  res.features = extract_features(*cp);

  std::map<std::string, PropertyEvidence> evidence;
  for (const auto& [p, ps] : cp->properties) evidence.emplace(p, evidence_from_stats(ps));

  std::vector<std::string> written;
  OutputLock lock(cfg.out);
  const std::string stem = file_stem_for(cls) + "-" + release;
  const fs::path card_path = cfg.out / ("features-cardinality-" + stem + ".csv");
  const fs::path range_path = cfg.out / ("features-range-" + stem + ".csv");
  write_file(card_path, feature_csv(res.features.cardinality, cardinality_feature_names(), cfg.provenance()));
  write_file(range_path, feature_csv(res.features.range, range_feature_column_names(), cfg.provenance()));
  written.push_back(card_path.string());
  written.push_back(range_path.string());

  if (!ann_path.empty()) {
    const auto ann = load_annotations(ann_path);
    std::uint64_t stage = 0;
    for (Task task : {Task::MinCard, Task::MaxCard, Task::Range}) {
      const auto& rows = task == Task::Range ? res.features.range : res.features.cardinality;
      const Dataset d = labeled_dataset(rows, ann, task);
      ++stage;
      if (d.size() == 0) continue;
      TrainOptions o = topts;
      o.task = task;
      o.spec.seed = derive_seed(cfg.seed, 10 + stage);
      o.smote_params.seed = derive_seed(cfg.seed, 20 + stage);
      auto rep = evaluate(d, o, std::string(to_string(task)));
      const fs::path eval_path = cfg.out / ("evaluation-" + stem + "-" + std::string(to_string(task)) + ".json");
      write_file(eval_path, to_json(rep, cfg.provenance()).dump(2) + "\n");
      written.push_back(eval_path.string());
      res.evaluations.push_back(rep);

      // Predict every profiled property with a model fit on all labeled rows.
      const auto model = train(o.spec, d);
      for (const auto& row : rows) {
        auto& ev = evidence.at(row.property);
        const std::string label = model->predict(row.features);
        if (task == Task::MinCard) ev.min_label = label;
        else if (task == Task::MaxCard) ev.max_label = label;
        else ev.node_kind = label == "IRI" ? TermKind::IRI : TermKind::Literal;
      }
    }
  }

  if (emit_shapes) {
    std::vector<PropertyEvidence> evs;
    for (auto& [p, ev] : evidence) evs.push_back(ev);
    InduceOptions iopts;
    iopts.class_threshold = cfg.class_threshold;
    res.shapes.add_class(cls);
    for (auto& c : induce_constraints(cls, evs, iopts)) res.shapes.add(std::move(c));
    res.turtle = emit_shacl(res.shapes);
    const fs::path ttl = cfg.out / (local_part(cls) + ".shapes.ttl");
    write_file(ttl, res.turtle);
    written.push_back(ttl.string());
  }
  for (const auto& w : written) out << w << "\n";
  return res;
}

// ---- entry point ----

// Parses argv and runs one command. Exit codes: 0 success, 1 usage error,
// 2 runtime or data error.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"kbq: knowledge base quality profiling, evolution analysis and SHACL induction", "kbq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));

  RunConfig cfg;
  std::string mode = "normalized";
  std::string registry = cfg.registry.string(), out_dir = cfg.out.string();
  app.add_option("--registry", registry, "release registry JSON")->capture_default_str();
  app.add_option("--out", out_dir, "output directory (profiles are read from here too)")->capture_default_str();
  app.add_option("--seed", cfg.seed, "seed for every random stage")->capture_default_str();
  app.add_option("--mode", mode, "completeness mode")->check(CLI::IsMember({"raw", "normalized"}))->capture_default_str();
  app.add_flag("--strict", cfg.strict, "strict completeness comparison (> instead of >=)");
  app.add_option("--class-threshold", cfg.class_threshold, "keep object classes covering at least this share")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--retry-delay-ms", cfg.retry_delay_ms, "base backoff for endpoint retries")->capture_default_str();

  std::string id, date, dump, endpoint;
  auto* reg_cmd = app.add_subcommand("register", "add a release to the registry");
  reg_cmd->add_option("id", id)->required();
  reg_cmd->add_option("date", date, "YYYY-MM-DD")->required();
  reg_cmd->add_option("--dump", dump, "N-Triples dump path");
  reg_cmd->add_option("--endpoint", endpoint, "SPARQL endpoint URL");

  std::vector<std::string> releases, classes;
  bool all = false, include_type = false;
  auto* prof_cmd = app.add_subcommand("profile", "profile releases into profile-<release>.json");
  prof_cmd->add_option("release", releases);
  prof_cmd->add_flag("--all", all);
  prof_cmd->add_option("--class", classes, "restrict to these classes");
  prof_cmd->add_flag("--include-type", include_type, "profile rdf:type as a property");

  std::string cls, prev, cur, prop;
  auto* comp_cmd = app.add_subcommand("completeness", "property completeness between two releases");
  comp_cmd->add_option("class", cls)->required();
  comp_cmd->add_option("prev", prev)->required();
  comp_cmd->add_option("cur", cur)->required();

  std::vector<std::string> growth_classes;
  std::string series;
  auto* growth_cmd = app.add_subcommand("growth", "regression check of the newest entity count");
  growth_cmd->add_option("class", growth_classes);
  growth_cmd->add_option("--series", series, "CSV with class,release,date,count");

  auto* diff_cmd = app.add_subcommand("diff-subjects", "subjects that lost a property between releases");
  diff_cmd->add_option("class", cls)->required();
  diff_cmd->add_option("property", prop)->required();
  diff_cmd->add_option("prev", prev)->required();
  diff_cmd->add_option("cur", cur)->required();

  std::string release;
  auto* feat_cmd = app.add_subcommand("features", "feature matrices for one class");
  feat_cmd->add_option("release", release)->required();
  feat_cmd->add_option("class", cls)->required();

  TrainOptions topts;
  std::string task = "min_card", algorithm = "random_forest", features_path, ann_path;
  std::string positive;
  auto add_learning_options = [&](CLI::App* cmd) {
    cmd->add_option("--algorithm", algorithm)
        ->check(CLI::IsMember({"random_forest", "rf", "naive_bayes", "nb", "knn"}))
        ->capture_default_str();
    cmd->add_option("--folds", topts.folds)->capture_default_str();
    cmd->add_option("--positive", positive, "positive class (default: minority)");
    cmd->add_option("--trees", topts.spec.trees)->capture_default_str();
    cmd->add_option("--max-depth", topts.spec.max_depth, "0 = unlimited")->capture_default_str();
    cmd->add_option("--mtry", topts.spec.features_per_split, "0 = ceil(sqrt(d))")->capture_default_str();
    cmd->add_option("--k", topts.spec.k, "neighbours for knn")->capture_default_str();
    cmd->add_flag("--smote", topts.smote, "rebalance training folds");
    cmd->add_option("--perc-over", topts.smote_params.perc_over)->capture_default_str();
    cmd->add_option("--perc-under", topts.smote_params.perc_under)->capture_default_str();
    cmd->add_option("--smote-k", topts.smote_params.k)->capture_default_str();
  };
  auto* train_cmd = app.add_subcommand("train", "cross-validate a classifier on annotated features");
  train_cmd->add_option("--features", features_path)->required();
  train_cmd->add_option("--annotations", ann_path)->required();
  train_cmd->add_option("--task", task)->check(CLI::IsMember({"min_card", "max_card", "range"}))->capture_default_str();
  add_learning_options(train_cmd);

  bool emit_shapes = false;
  auto* induce_cmd = app.add_subcommand("induce", "features, optional classifiers, and SHACL shapes for a class");
  induce_cmd->add_option("class", cls)->required();
  induce_cmd->add_option("--release", release)->required();
  induce_cmd->add_option("--annotations", ann_path);
  induce_cmd->add_flag("--emit-shapes", emit_shapes);
  add_learning_options(induce_cmd);

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    cfg.registry = registry;
    cfg.out = out_dir;
    cfg.mode = mode == "raw" ? CompletenessMode::Raw : CompletenessMode::Normalized;
    topts.spec.algorithm = parse_algorithm(algorithm);
    topts.task = parse_task(task);
    if (!positive.empty()) topts.positive_class = positive;

    if (*reg_cmd) cmd_register(cfg, id, date, dump, endpoint, out);
    else if (*prof_cmd) cmd_profile(cfg, releases, all, classes, include_type, out, err);
    else if (*comp_cmd) cmd_completeness(cfg, cls, prev, cur, out);
    else if (*growth_cmd) cmd_growth(cfg, growth_classes, series, out);
    else if (*diff_cmd) cmd_diff_subjects(cfg, cls, prop, prev, cur, out);
    else if (*feat_cmd) cmd_features(cfg, release, cls, out);
    else if (*train_cmd) cmd_train(cfg, features_path, ann_path, topts, out);
    else if (*induce_cmd) cmd_induce(cfg, cls, release, ann_path, emit_shapes, topts, out);
  } catch (const std::exception& e) {
    err << "kbq: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace kbq::cli
