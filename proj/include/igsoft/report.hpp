#pragma once

// Run reports (JSON) and plot-ready tables (CSV).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace igsoft {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr int kCsvSchemaVersion = 1;

enum class CheckKind { at_most, at_least, relative };

inline const char* to_string(CheckKind k)
{
  switch (k) {
    case CheckKind::at_most: return "at_most";
    case CheckKind::at_least: return "at_least";
    default: return "relative";
  }
}

/// One pass/fail comparison.
///   at_most:  measured <= tolerance
///   at_least: measured >= tolerance
///   relative: |measured / expected - 1| <= tolerance
struct Check
{
  std::string name;
  CheckKind kind = CheckKind::at_most;
  double measured = 0.0;
  double expected = none();
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;

  static Check at_most(std::string name, double measured, double bound, std::string detail = {})
  {
    return {std::move(name), CheckKind::at_most, measured, none(), bound, measured <= bound, std::move(detail)};
  }

  static Check at_least(std::string name, double measured, double bound, std::string detail = {})
  {
    return {std::move(name), CheckKind::at_least, measured, none(), bound, measured >= bound, std::move(detail)};
  }

  static Check relative(std::string name, double measured, double expected, double tol, std::string detail = {})
  {
    const bool ok = std::abs(measured / expected - 1.0) <= tol;
    return {std::move(name), CheckKind::relative, measured, expected, tol, ok, std::move(detail)};
  }

  /// A quantity that could not be computed.
  static Check failed(std::string name, std::string why)
  {
    return {std::move(name), CheckKind::at_most, none(), none(), 0.0, false, std::move(why)};
  }

  /// `expected` of bound checks; serialized as null.
  static double none() { return std::numeric_limits<double>::quiet_NaN(); }
};

struct RunReport
{
  int schema_version = kReportSchemaVersion;
  std::string command;
  std::vector<Check> checks;
  /// Named scalar results in insertion order.
  std::vector<std::pair<std::string, double>> values;
  std::vector<std::string> notes;
  bool aborted = false;
  std::string abort_reason;

  bool passed() const
  {
    if (aborted) return false;
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  void add(Check c) { checks.push_back(std::move(c)); }
  void value(std::string name, double v) { values.emplace_back(std::move(name), v); }

  void abort(std::string why)
  {
    if (!aborted) abort_reason = std::move(why);
    aborted = true;
  }

  /// Appends another report's entries.
  void merge(const RunReport& o)
  {
    checks.insert(checks.end(), o.checks.begin(), o.checks.end());
    values.insert(values.end(), o.values.begin(), o.values.end());
    notes.insert(notes.end(), o.notes.begin(), o.notes.end());
    if (o.aborted) abort(o.abort_reason);
  }
};

using Json = nlohmann::ordered_json;

namespace detail {

/// Non-finite numbers are written as null and read back as NaN.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number(const Json& j)
{
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline Json to_json(const RunReport& r)
{
  Json j;
  j["schema_version"] = r.schema_version;
  j["command"] = r.command;
  j["passed"] = r.passed();
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  Json checks = Json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"kind", to_string(c.kind)},
                      {"measured", detail::number(c.measured)},
                      {"expected", detail::number(c.expected)},
                      {"tolerance", detail::number(c.tolerance)},
                      {"passed", c.passed},
                      {"detail", c.detail}});
  j["checks"] = std::move(checks);
  Json values = Json::object();
  for (const auto& [k, v] : r.values) values[k] = detail::number(v);
  j["values"] = std::move(values);
  j["notes"] = r.notes;
  return j;
}

inline RunReport report_from_json(const Json& j)
{
  RunReport r;
  r.schema_version = j.at("schema_version").get<int>();
  if (r.schema_version != kReportSchemaVersion)
    throw std::runtime_error("report: unsupported schema_version " + std::to_string(r.schema_version));
  r.command = j.at("command").get<std::string>();
  r.aborted = j.at("aborted").get<bool>();
  r.abort_reason = j.at("abort_reason").get<std::string>();
  for (const auto& c : j.at("checks")) {
    Check k;
    k.name = c.at("name").get<std::string>();
    const auto kind = c.at("kind").get<std::string>();
    k.kind = kind == "at_least" ? CheckKind::at_least : kind == "relative" ? CheckKind::relative : CheckKind::at_most;
    k.measured = detail::number(c.at("measured"));
    k.expected = detail::number(c.at("expected"));
    k.tolerance = detail::number(c.at("tolerance"));
    k.passed = c.at("passed").get<bool>();
    k.detail = c.at("detail").get<std::string>();
    r.checks.push_back(std::move(k));
  }
  for (const auto& [k, v] : j.at("values").items()) r.values.emplace_back(k, detail::number(v));
  r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

inline std::string serialize(const RunReport& r) { return to_json(r).dump(2) + "\n"; }

inline RunReport parse_report(const std::string& text) { return report_from_json(Json::parse(text)); }

/// Plot-ready numeric table written as CSV with a schema comment line.
struct Table
{
  std::string artifact;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void row(std::vector<double> r)
  {
    if (r.size() != columns.size()) throw std::logic_error("Table::row: width mismatch in " + artifact);
    rows.push_back(std::move(r));
  }
};

/// %.17g round-trips every double; fixed formatting keeps reruns byte-identical.
inline std::string format_number(double v)
{
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const Table& t)
{
  out << "# igsoft-csv schema_version=" << kCsvSchemaVersion << " artifact=" << t.artifact << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << format_number(r[i]);
    out << "\n";
  }
}

inline std::string to_csv(const Table& t)
{
  std::ostringstream s;
  write_csv(s, t);
  return s.str();
}

}  // namespace igsoft
