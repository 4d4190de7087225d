#ifndef QREADOUT_CLI_HPP
#define QREADOUT_CLI_HPP

// Command implementations behind the `qreadout` executable. Each returns a
// process exit status and writes human text to the given streams.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qreadout/invariants.hpp"
#include "qreadout/nosignalling.hpp"
#include "qreadout/scenarios.hpp"

namespace qreadout::cli {

namespace fs = std::filesystem;

enum Exit : int { ok = 0, verification_failed = 1, assertion_failed = 2, parse_error = 64, unknown_scenario = 65 };

inline constexpr int schema_version = 1;

enum class Format { csv, jsonl, both };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "jsonl") return Format::jsonl;
  if (s == "both") return Format::both;
  throw ParameterError("format must be csv, jsonl or both");
}

inline std::string format_name(Format f) {
  switch (f) {
    case Format::csv:
      return "csv";
    case Format::jsonl:
      return "jsonl";
    case Format::both:
      return "both";
  }
  return "both";
}

//! Problem in a scenario file, located by 1-based line and column.
class FileError : public Error {
 public:
  FileError(const std::string& origin, std::size_t line, std::size_t column, const std::string& message)
      : Error(origin + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

class UnknownScenario : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t offset) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

//! Position of the first occurrence of `"key"`, or 1:1 if absent.
inline std::pair<std::size_t, std::size_t> locate_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? std::pair<std::size_t, std::size_t>{1, 1} : line_column(text, pos);
}

}  // namespace detail

struct ScenarioFile {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  Json parameters = Json::object();
  std::optional<Format> format;
  std::optional<std::string> out;
};

//! Strict reader: unknown top-level keys, a wrong schema_version or a
//! malformed document all raise FileError with a position.
inline ScenarioFile parse_scenario_file(const std::string& text, const std::string& origin) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string what = e.what();
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw FileError(origin, line, column, what);
  }
  auto fail = [&](const std::string& key, const std::string& message) {
    const auto [line, column] = detail::locate_key(text, key);
    throw FileError(origin, line, column, message);
  };
  if (!doc.is_object()) throw FileError(origin, 1, 1, "scenario file must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (key != "schema_version" && key != "scenario" && key != "seed" && key != "parameters" && key != "output")
      fail(key, "unknown key '" + key + "'");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer())
    throw FileError(origin, 1, 1, "missing integer schema_version");
  if (doc["schema_version"].get<long long>() != schema_version)
    fail("schema_version", "unsupported schema_version " + doc["schema_version"].dump() + " (expected " +
                               std::to_string(schema_version) + ")");
  if (!doc.contains("scenario") || !doc["scenario"].is_string()) throw FileError(origin, 1, 1, "missing scenario name");

  ScenarioFile f;
  f.scenario = doc["scenario"].get<std::string>();
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed", "seed must be a non-negative integer");
    f.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("parameters")) {
    if (!doc["parameters"].is_object()) fail("parameters", "parameters must be an object");
    f.parameters = doc["parameters"];
  }
  if (doc.contains("output")) {
    const Json& o = doc["output"];
    if (!o.is_object()) fail("output", "output must be an object");
    for (const auto& [key, value] : o.items()) {
      if (key == "format") {
        if (!value.is_string()) fail(key, "output.format must be a string");
        try {
          f.format = parse_format(value.get<std::string>());
        } catch (const ParameterError& e) {
          fail(key, e.what());
        }
      } else if (key == "directory") {
        if (!value.is_string()) fail(key, "output.directory must be a string");
        f.out = value.get<std::string>();
      } else {
        fail(key, "unknown output key '" + key + "'");
      }
    }
  }
  return f;
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path.string(), 1, 1, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

//! summary.txt always; records.jsonl and one CSV per series as selected.
inline std::vector<fs::path> write_bundle(const RunReport& report, const fs::path& dir, Format format) {
  fs::create_directories(dir);
  std::vector<fs::path> written{dir / "summary.txt"};
  write_file(written.back(), to_summary(report));
  if (format != Format::csv) {
    written.push_back(dir / "records.jsonl");
    write_file(written.back(), to_jsonl(report));
  }
  if (format != Format::jsonl)
    for (const auto& s : report.series) {
      written.push_back(dir / (s.name + ".csv"));
      write_file(written.back(), to_csv(s));
    }
  return written;
}

inline Json parse_value(const std::string& raw) {
  try {
    return Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    return raw;
  }
}

//! "key=value" with the value read as JSON when it parses, else as a string.
inline std::pair<std::string, Json> parse_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ParameterError("expected key=value, got '" + text + "'");
  return {text.substr(0, eq), parse_value(text.substr(eq + 1))};
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<Format> format;
  std::optional<std::string> precision;
  std::vector<std::string> overrides;  // key=value
};

struct ResolvedRun {
  const ScenarioInfo* info = nullptr;
  std::uint64_t seed = 0;
  Json parameters;
  fs::path out;
  Format format = Format::both;
};

inline const ScenarioInfo& require_scenario(const std::string& name) {
  const ScenarioInfo* info = find_scenario(name);
  if (!info) throw UnknownScenario("unknown scenario '" + name + "'");
  return *info;
}

inline ResolvedRun resolve(const ScenarioFile& file, const RunOptions& opt) {
  ResolvedRun r;
  r.info = &require_scenario(file.scenario);
  r.seed = opt.seed.value_or(file.seed.value_or(0));
  r.parameters = file.parameters;
  for (const auto& o : opt.overrides) {
    auto [key, value] = parse_assignment(o);
    r.parameters[key] = value;
  }
  if (opt.precision) {
    if (!r.info->has_precision) throw ParameterError("scenario '" + r.info->name + "' has no precision parameter");
    r.parameters["precision"] = *opt.precision == "inf" ? Json("inf") : parse_value(*opt.precision);
  }
  r.out = opt.out.value_or(file.out.value_or("qreadout-out/" + r.info->name));
  r.format = opt.format.value_or(file.format.value_or(Format::both));
  return r;
}

//! Maps library exceptions onto exit codes and a one-line diagnostic.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const FileError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::parse_error;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::parse_error;
  } catch (const UnknownScenario& e) {
    err << "error: " << e.what() << "\n";
    return Exit::unknown_scenario;
  } catch (const Error& e) {
    err << "error: scenario failed: " << e.what() << "\n";
    return Exit::assertion_failed;
  }
}

//! Re-throws a ParameterError naming a 'key' as a FileError at that key.
template <class F>
auto locate_parameter_errors(const std::string& text, const std::string& origin, F&& body) {
  try {
    return body();
  } catch (const ParameterError& e) {
    const std::string what = e.what();
    const auto open = what.find('\'');
    const auto close = open == std::string::npos ? open : what.find('\'', open + 1);
    if (close == std::string::npos) throw;
    const std::string key = what.substr(open + 1, close - open - 1);
    if (text.find("\"" + key + "\"") == std::string::npos) throw;
    const auto [line, column] = detail::locate_key(text, key);
    throw FileError(origin, line, column, what);
  }
}

inline int cmd_run(const fs::path& path, const RunOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string text = read_file(path);
    const ScenarioFile file = parse_scenario_file(text, path.string());
    const ResolvedRun r = resolve(file, opt);
    const RunReport report = locate_parameter_errors(text, path.string(), [&] { return r.info->run(r.parameters, r.seed); });
    write_bundle(report, r.out, r.format);
    for (const auto& c : report.checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << "\n";
    out << report.scenario << " seed=" << report.seed << " -> " << r.out.string() << "\n";
    return report.passed() ? Exit::ok : Exit::assertion_failed;
  });
}

struct VerifyOptions {
  std::size_t family_size = 1000;
  std::size_t max_qubits = 4;
  std::size_t max_measurements = 3;
  std::uint64_t seed = 0;
  bool inject_fault = false;
  bool skip_invariants = false;
  std::optional<std::string> replay;
  std::optional<std::string> counterexample_out;
};

inline int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LocalStateOptions ls;
    ls.condition_on_spacelike = opt.inject_fault;
    if (opt.inject_fault) out << "fault injection: conditioning on spacelike collapses\n";

    if (opt.replay) {
      const std::string text = read_file(*opt.replay);
      Json doc;
      try {
        doc = Json::parse(text);
      } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = detail::line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw FileError(*opt.replay, line, column, "malformed counterexample");
      }
      const auto c = NoSignallingCase::from_json(doc.contains("case") ? doc["case"] : doc);
      const auto r = check_no_signalling_case(c, ls);
      out << "replay: " << r.comparisons << " comparisons, max trace distance " << format_double(r.max_distance) << "\n";
      if (r.max_distance <= 1e-10) return Exit::ok;
      out << "worst: measurement " << r.worst.measurement << ", query " << r.worst.query << ", " << r.worst.comparison
          << " " << r.worst.variants << "\n";
      return Exit::verification_failed;
    }

    bool ok = true;
    if (opt.family_size == 0) err << "warning: family size 0, no-signalling check is vacuous\n";
    const auto ns = verify_no_signalling(opt.family_size, opt.max_qubits, opt.max_measurements, opt.seed, ls);
    out << "no-signalling: " << ns.cases << " scenarios, " << ns.comparisons << " comparisons, max trace distance "
        << format_double(ns.max_distance) << (ns.passed() ? " (ok)" : " (FAIL)") << "\n";
    if (ns.worst_case && ns.max_distance > 0.0)
      out << "worst case: measurement " << ns.worst.measurement << ", query " << ns.worst.query << ", "
          << ns.worst.comparison << " " << ns.worst.variants << "\n";
    if (!ns.passed()) {
      ok = false;
      const std::string cx = ns.counterexample().dump(2);
      out << "counterexample:\n" << cx << "\n";
      if (opt.counterexample_out) {
        write_file(*opt.counterexample_out, cx + "\n");
        out << "counterexample written to " << *opt.counterexample_out << "\n";
      }
    }
    if (!opt.skip_invariants)
      for (const auto& inv : run_invariant_suite(opt.seed)) {
        out << (inv.passed ? "PASS " : "FAIL ") << inv.name << (inv.detail.empty() ? "" : ": " + inv.detail) << "\n";
        ok = ok && inv.passed;
      }
    return ok ? Exit::ok : Exit::verification_failed;
  });
}

struct SweepOptions {
  RunOptions run;
  std::vector<std::string> grid;  // key=v1,v2,...
  std::size_t jobs = 1;
};

struct GridAxis {
  std::string key;
  std::vector<Json> values;
};

inline std::vector<GridAxis> parse_grid(const std::vector<std::string>& specs, const ScenarioInfo& info) {
  const Json defaults = info.defaults();
  std::vector<GridAxis> axes;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw ParameterError("grid axis must be key=v1,v2,...: '" + spec + "'");
    GridAxis axis{spec.substr(0, eq), {}};
    if (!defaults.contains(axis.key))
      throw ParameterError("grid over unknown parameter '" + axis.key + "' for scenario " + info.name);
    for (const auto& a : axes)
      if (a.key == axis.key) throw ParameterError("grid axis '" + axis.key + "' given twice");
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) axis.values.push_back(parse_value(item));
    if (axis.values.empty()) throw ParameterError("grid axis '" + axis.key + "' has no values");
    axes.push_back(std::move(axis));
  }
  return axes;
}

//! Job 0 keeps the master seed so a one-point sweep reproduces `run`.
inline std::uint64_t job_seed(std::uint64_t master, std::size_t job) {
  return job == 0 ? master : derive_seed(master, job);
}

inline std::string aggregate_csv(const std::vector<GridAxis>& axes, const std::vector<std::vector<Json>>& points,
                                 const std::vector<RunReport>& reports) {
  std::vector<std::string> result_keys;
  for (const auto& r : reports)
    for (const auto& [key, value] : r.results.items())
      if (value.is_primitive() && std::find(result_keys.begin(), result_keys.end(), key) == result_keys.end())
        result_keys.push_back(key);
  Series agg{"aggregate", {"job", "seed"}, {}};
  for (const auto& a : axes) agg.columns.push_back(a.key);
  agg.columns.push_back("passed");
  for (const auto& k : result_keys) agg.columns.push_back(k);
  for (std::size_t j = 0; j < reports.size(); ++j) {
    std::vector<Json> row{j, reports[j].seed};
    for (const auto& v : points[j]) row.push_back(v);
    row.push_back(reports[j].passed());
    for (const auto& k : result_keys) {
      const auto it = reports[j].results.find(k);
      row.push_back(it != reports[j].results.end() && it->is_primitive() ? *it : Json(nullptr));
    }
    agg.add(std::move(row));
  }
  return to_csv(agg);
}

inline int cmd_sweep(const fs::path& path, const SweepOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioFile file = parse_scenario_file(read_file(path), path.string());
    const ResolvedRun base = resolve(file, opt.run);
    const auto axes = parse_grid(opt.grid, *base.info);

    std::vector<std::vector<Json>> points{{}};
    for (const auto& axis : axes) {
      std::vector<std::vector<Json>> next;
      for (const auto& p : points)
        for (const auto& v : axis.values) {
          auto q = p;
          q.push_back(v);
          next.push_back(std::move(q));
        }
      points = std::move(next);
    }
    std::vector<Json> params(points.size(), base.parameters);
    for (std::size_t j = 0; j < points.size(); ++j)
      for (std::size_t a = 0; a < axes.size(); ++a) params[j][axes[a].key] = points[j][a];

    std::vector<std::optional<RunReport>> reports(points.size());
    std::vector<std::string> failures(points.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t j = next++; j < points.size(); j = next++) {
        try {
          reports[j] = base.info->run(params[j], job_seed(base.seed, j));
        } catch (const ParameterError& e) {
          failures[j] = std::string("P") + e.what();
        } catch (const Error& e) {
          failures[j] = std::string("E") + e.what();
        }
      }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(opt.jobs, points.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (std::size_t j = 0; j < points.size(); ++j)
      if (!failures[j].empty()) {
        const std::string msg = "job " + std::to_string(j) + ": " + failures[j].substr(1);
        if (failures[j][0] == 'P') throw ParameterError(msg);
        throw Error(msg);
      }

    // Single writer: bundles and the aggregate are written in job order.
    std::vector<RunReport> done;
    bool passed = true;
    for (std::size_t j = 0; j < points.size(); ++j) {
      done.push_back(std::move(*reports[j]));
      write_bundle(done.back(), base.out / ("job_" + std::to_string(j)), base.format);
      passed = passed && done.back().passed();
    }
    fs::create_directories(base.out);
    write_file(base.out / "aggregate.csv", aggregate_csv(axes, points, done));
    out << base.info->name << ": " << points.size() << " jobs -> " << (base.out / "aggregate.csv").string() << "\n";
    return passed ? Exit::ok : Exit::assertion_failed;
  });
}

inline int cmd_list(std::ostream& out) {
  for (const auto& s : scenario_registry())
    out << s.name << "\n  " << s.description << "\n  defaults: " << s.defaults().dump() << "\n";
  return Exit::ok;
}

}  // namespace qreadout::cli

#endif  // QREADOUT_CLI_HPP
