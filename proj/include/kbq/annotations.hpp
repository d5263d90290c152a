#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "kbq/csv.hpp"
#include "kbq/error.hpp"

namespace kbq {

enum class Task { MinCard, MaxCard, Range };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::MinCard: return "min_card";
    case Task::MaxCard: return "max_card";
    case Task::Range: return "range";
  }
  return "?";
}

inline Task parse_task(std::string_view s) {
  if (s == "min_card") return Task::MinCard;
  if (s == "max_card") return Task::MaxCard;
  if (s == "range") return Task::Range;
  throw Error("features", ErrorCode::InvalidArgument, "unknown task '" + std::string(s) + "'");
}

// Labels an annotator may write for a task.
inline std::vector<std::string_view> annotation_labels(Task t) {
  switch (t) {
    case Task::MinCard: return {"MIN0", "MIN1", "MIN1+"};
    case Task::MaxCard: return {"MAX1", "MAX1+"};
    case Task::Range: return {"IRI", "LIT"};
  }
  return {};
}

// Classifiers are binary per task; MIN1 is trained as MIN1+.
inline std::string training_label(Task t, const std::string& label) {
  if (t == Task::MinCard && label == "MIN1") return "MIN1+";
  return label;
}

struct Annotation {
  std::string class_iri;
  std::string property;
  Task task = Task::MinCard;
  std::string label;
  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// A labeled feature row for one class-property pair.
struct TrainingExample {
  std::string class_iri;
  std::string property;
  std::vector<double> features;
  std::string label;
};

inline std::vector<Annotation> read_annotations(std::istream& in) {
  csv::Reader reader(in);
  csv::Row row;
  if (!reader.next(row)) throw Error("features", ErrorCode::MissingColumn, "annotation file has no header");
  const csv::Header h(row);
  const std::size_t ci = h.index("class"), pi = h.index("property"), ti = h.index("task"), li = h.index("label");
  const std::size_t width = std::max({ci, pi, ti, li}) + 1;

  std::vector<Annotation> out;
  std::size_t line = 1;
  while (reader.next(row)) {
    ++line;
    if (row.size() < width)
      throw Error("features", ErrorCode::MissingColumn, "row " + std::to_string(line) + " has too few fields");
    Annotation a{row[ci], row[pi], parse_task(row[ti]), row[li]};
    const auto allowed = annotation_labels(a.task);
    if (std::find(allowed.begin(), allowed.end(), a.label) == allowed.end())
      throw Error("features", ErrorCode::UnknownLabel,
                  "row " + std::to_string(line) + ": label '" + a.label + "' is not valid for task " +
                      std::string(to_string(a.task)));
    out.push_back(std::move(a));
  }
  return out;
}

inline void write_annotations(std::ostream& out, const std::vector<Annotation>& rows) {
  csv::Writer w(out);
  w.row({"class", "property", "task", "label"});
  for (const auto& a : rows) w.row({a.class_iri, a.property, std::string(to_string(a.task)), a.label});
}

inline std::vector<Annotation> load_annotations(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("features", ErrorCode::Io, "cannot open annotations " + path.string());
  return read_annotations(in);
}

inline void save_annotations(const std::filesystem::path& path, const std::vector<Annotation>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("features", ErrorCode::Io, "cannot write annotations " + path.string());
  write_annotations(out, rows);
}

}  // namespace kbq
