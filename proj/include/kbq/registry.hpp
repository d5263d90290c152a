#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "kbq/error.hpp"

namespace kbq {

// Calendar date, parsed from and printed as ISO-8601 YYYY-MM-DD.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}

  static Date parse(std::string_view s) {
    auto bad = [&] { return Error("acquisition", ErrorCode::UnparseableDate, "not an ISO-8601 date: '" + std::string(s) + "'"); };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
    int y = 0;
    unsigned m = 0, d = 0;
    auto num = [&](std::string_view part, auto& out) {
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
      if (ec != std::errc() || p != part.data() + part.size()) throw bad();
    };
    num(s.substr(0, 4), y);
    num(s.substr(5, 2), m);
    num(s.substr(8, 2), d);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) throw bad();
    return Date(ymd);
  }

  std::string str() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd_.year()), static_cast<unsigned>(ymd_.month()),
                  static_cast<unsigned>(ymd_.day()));
    return buf;
  }

  // Whole days since 1970-01-01.
  long days() const { return std::chrono::sys_days(ymd_).time_since_epoch().count(); }

  Date plus_days(long n) const { return Date(std::chrono::year_month_day(std::chrono::sys_days(ymd_) + std::chrono::days(n))); }

  friend long operator-(const Date& a, const Date& b) { return a.days() - b.days(); }
  friend bool operator==(const Date&, const Date&) = default;
  friend auto operator<=>(const Date& a, const Date& b) { return a.days() <=> b.days(); }

 private:
  std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::January, std::chrono::day{1}};
};

struct DumpSource {
  std::string path;
  friend bool operator==(const DumpSource&, const DumpSource&) = default;
};
struct EndpointSource {
  std::string url;
  friend bool operator==(const EndpointSource&, const EndpointSource&) = default;
};
using ReleaseSource = std::variant<DumpSource, EndpointSource>;

struct ReleaseDescriptor {
  std::string id;
  Date date;
  ReleaseSource source;

  bool is_dump() const { return std::holds_alternative<DumpSource>(source); }
  friend bool operator==(const ReleaseDescriptor&, const ReleaseDescriptor&) = default;
};

// Releases ordered by strictly ascending date, unique ids. Single writer.
class ReleaseRegistry {
 public:
  const std::vector<ReleaseDescriptor>& releases() const noexcept { return releases_; }
  std::size_t size() const noexcept { return releases_.size(); }
  auto begin() const { return releases_.begin(); }
  auto end() const { return releases_.end(); }

  const ReleaseDescriptor* find(std::string_view id) const {
    for (const auto& r : releases_)
      if (r.id == id) return &r;
    return nullptr;
  }

  const ReleaseDescriptor& at(std::string_view id) const {
    if (auto* r = find(id)) return *r;
    throw Error("acquisition", ErrorCode::UnknownRelease, "no release '" + std::string(id) + "' in registry");
  }

  friend bool operator==(const ReleaseRegistry&, const ReleaseRegistry&) = default;

 private:
  friend ReleaseRegistry register_release(ReleaseRegistry reg, ReleaseDescriptor d);
  std::vector<ReleaseDescriptor> releases_;
};

inline ReleaseRegistry register_release(ReleaseRegistry reg, ReleaseDescriptor d) {
  if (d.id.empty()) throw Error("acquisition", ErrorCode::InvalidArgument, "release id must not be empty");
  if (reg.find(d.id)) throw Error("acquisition", ErrorCode::DuplicateRelease, "release '" + d.id + "' already registered");
  for (const auto& r : reg.releases_)
    if (r.date == d.date)
      throw Error("acquisition", ErrorCode::DuplicateRelease,
                  "release '" + r.id + "' already has date " + d.date.str() + "; dates must be strictly ascending");
  auto pos = std::upper_bound(reg.releases_.begin(), reg.releases_.end(), d.date,
                              [](const Date& date, const ReleaseDescriptor& r) { return date < r.date; });
  reg.releases_.insert(pos, std::move(d));
  return reg;
}

inline nlohmann::ordered_json registry_to_json(const ReleaseRegistry& reg) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reg) {
    nlohmann::ordered_json src;
    if (const auto* dump = std::get_if<DumpSource>(&r.source)) src["dump"] = dump->path;
    else src["endpoint"] = std::get<EndpointSource>(r.source).url;
    arr.push_back({{"id", r.id}, {"date", r.date.str()}, {"source", src}});
  }
  return {{"releases", arr}};
}

inline ReleaseRegistry registry_from_json(const nlohmann::json& j) {
  ReleaseRegistry reg;
  try {
    for (const auto& item : j.at("releases")) {
      const auto& src = item.at("source");
      ReleaseSource source;
      if (src.contains("dump")) source = DumpSource{src.at("dump").get<std::string>()};
      else if (src.contains("endpoint")) source = EndpointSource{src.at("endpoint").get<std::string>()};
      else throw Error("acquisition", ErrorCode::InvalidArgument, "release source needs 'dump' or 'endpoint'");
      reg = register_release(std::move(reg), ReleaseDescriptor{item.at("id").get<std::string>(),
                                                               Date::parse(item.at("date").get<std::string>()),
                                                               std::move(source)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("acquisition", ErrorCode::Io, std::string("malformed registry: ") + e.what());
  }
  return reg;
}

inline ReleaseRegistry load_registry(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return {};
  std::ifstream in(path);
  if (!in) throw Error("acquisition", ErrorCode::Io, "cannot open registry " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("acquisition", ErrorCode::Io, "cannot parse registry " + path.string() + ": " + e.what());
  }
  return registry_from_json(j);
}

inline void save_registry(const ReleaseRegistry& reg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("acquisition", ErrorCode::Io, "cannot write registry " + path.string());
  out << registry_to_json(reg).dump(2) << '\n';
}

}  // namespace kbq
