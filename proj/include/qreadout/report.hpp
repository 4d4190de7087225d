#ifndef QREADOUT_REPORT_HPP
#define QREADOUT_REPORT_HPP

// Structured scenario output and its text serialisations.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "qreadout/qlinalg.hpp"

namespace qreadout {

using Json = nlohmann::ordered_json;

//! JSON number, with non-finite values spelled as strings ("inf", "-inf", "nan").
inline Json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

inline Json vector_json(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

//! {"re": [[...]], "im": [[...]]}, row-major.
inline Json matrix_json(const Matrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json rr = Json::array(), ri = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(number(m(r, c).real()));
      ri.push_back(number(m(r, c).imag()));
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return Json{{"re", std::move(re)}, {"im", std::move(im)}};
}

inline Matrix matrix_from_json(const Json& j) {
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  const auto rows = static_cast<Eigen::Index>(re.size());
  if (rows == 0 || im.size() != re.size()) throw ValidationError("matrix JSON has inconsistent shape");
  const auto cols = static_cast<Eigen::Index>(re.at(0).size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& rr = re.at(static_cast<std::size_t>(r));
    const auto& ri = im.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(rr.size()) != cols || ri.size() != rr.size())
      throw ValidationError("matrix JSON has ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = Complex(rr.at(static_cast<std::size_t>(c)).get<double>(), ri.at(static_cast<std::size_t>(c)).get<double>());
  }
  return m;
}

//! A plot-ready table.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;

  void add(std::vector<Json> row) {
    if (row.size() != columns.size()) throw DimensionError("series row width does not match its columns");
    rows.push_back(std::move(row));
  }
};

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RunReport {
  std::string scenario;
  std::uint64_t seed = 0;
  Json parameters = Json::object();
  Json results = Json::object();
  std::deque<Series> series;  // deque: add_series hands out stable references
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }

  Series& add_series(std::string name, std::vector<std::string> columns) {
    series.push_back({std::move(name), std::move(columns), {}});
    return series.back();
  }

  void check(std::string name, bool passed, std::string detail = {}) {
    checks.push_back({std::move(name), passed, std::move(detail)});
  }

  const Series& find_series(std::string_view name) const {
    for (const auto& s : series)
      if (s.name == name) return s;
    throw LabelError("no series named '" + std::string(name) + "'");
  }
};

//! Shortest round-trip decimal form, locale independent.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_float()) return format_double(v.get<double>());
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

inline std::string to_csv(const Series& s) {
  std::string out;
  for (std::size_t i = 0; i < s.columns.size(); ++i) out += (i ? "," : "") + csv_cell(s.columns[i]);
  out += '\n';
  for (const auto& row : s.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
    out += '\n';
  }
  return out;
}

//! One JSON object per line: header, results, checks, then every series row.
inline std::string to_jsonl(const RunReport& r) {
  std::string out;
  auto line = [&out](const Json& j) { out += j.dump() + '\n'; };
  line(Json{{"record", "header"}, {"scenario", r.scenario}, {"seed", r.seed}, {"parameters", r.parameters}});
  line(Json{{"record", "results"}, {"values", r.results}});
  for (const auto& c : r.checks)
    line(Json{{"record", "check"}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  for (const auto& s : r.series)
    for (const auto& row : s.rows) {
      Json values = Json::object();
      for (std::size_t i = 0; i < row.size(); ++i) values[s.columns[i]] = row[i];
      line(Json{{"record", "row"}, {"series", s.name}, {"values", std::move(values)}});
    }
  return out;
}

inline std::string to_summary(const RunReport& r) {
  std::string out = "scenario: " + r.scenario + "\nseed: " + std::to_string(r.seed) + "\n";
  out += "parameters: " + r.parameters.dump() + "\n\nresults:\n" + r.results.dump(2) + "\n\nchecks:\n";
  if (r.checks.empty()) out += "  (none)\n";
  for (const auto& c : r.checks)
    out += std::string(c.passed ? "  PASS " : "  FAIL ") + c.name + (c.detail.empty() ? "" : ": " + c.detail) + "\n";
  out += "\nseries:\n";
  for (const auto& s : r.series) out += "  " + s.name + " (" + std::to_string(s.rows.size()) + " rows)\n";
  out += std::string("\nstatus: ") + (r.passed() ? "ok" : "assertion failure") + "\n";
  return out;
}

}  // namespace qreadout

#endif  // QREADOUT_REPORT_HPP
