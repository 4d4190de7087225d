#ifndef QREADOUT_NOSIGNALLING_HPP
#define QREADOUT_NOSIGNALLING_HPP

// Randomised search for signalling through local states: every collapse
// outside a query's past cone is swapped for another basis or dropped, and
// the query's local state must not move.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qreadout/readout.hpp"
#include "qreadout/report.hpp"

namespace qreadout {

struct NsQubit {
  std::string label;
  Vec3 position = Vec3::Zero();  // at t = 0
  Vec3 velocity = Vec3::Zero();
};

struct NsUnitary {
  double time = 0.0;
  std::string target;
  Matrix u;
};

//! Measurement in the basis given by the columns of `basis`, with an
//! alternative basis the distant experimenter could have chosen instead.
struct NsMeasurement {
  std::string tag;
  double time = 0.0;
  std::string target;
  Matrix basis;
  Matrix alternative;
  double mass = 1.0;
};

struct NsQuery {
  std::string target;
  double time = 0.0;
};

struct NoSignallingCase {
  std::vector<NsQubit> qubits;
  Matrix rho;
  std::vector<NsUnitary> unitaries;
  std::vector<NsMeasurement> measurements;
  std::vector<NsQuery> queries;
  double critical_mass = 0.5;

  EventLog log() const {
    std::vector<SubsystemPlacement> places;
    for (const auto& q : qubits) places.push_back({q.label, Worldline::uniform(q.position, q.velocity), 2});
    EventLog log(std::move(places));
    for (const auto& u : unitaries) log.add_unitary(u.time, {u.target}, u.u);
    for (const auto& m : measurements)
      log.add_measurement(m.time, m.target, basis_projectors(m.basis), m.tag, {m.mass, "apparatus"});
    return log;
  }

  DensityMatrix initial(const EventLog& log) const { return DensityMatrix(log.space(), rho); }
  CollapseModel model() const { return CollapseModel::mass_threshold(critical_mass); }

  SpacetimeEvent query_event(const EventLog& log, const NsQuery& q) const {
    return log.placement(q.target).worldline.event_at(q.time);
  }

  Json json() const {
    Json j{{"critical_mass", critical_mass}, {"rho", matrix_json(rho)}};
    Json qs = Json::array(), us = Json::array(), ms = Json::array(), qq = Json::array();
    auto v3 = [](const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); };
    for (const auto& q : qubits) qs.push_back({{"label", q.label}, {"position", v3(q.position)}, {"velocity", v3(q.velocity)}});
    for (const auto& u : unitaries) us.push_back({{"time", u.time}, {"target", u.target}, {"u", matrix_json(u.u)}});
    for (const auto& m : measurements)
      ms.push_back({{"tag", m.tag},
                    {"time", m.time},
                    {"target", m.target},
                    {"basis", matrix_json(m.basis)},
                    {"alternative", matrix_json(m.alternative)},
                    {"mass", m.mass}});
    for (const auto& q : queries) qq.push_back({{"target", q.target}, {"time", q.time}});
    j["qubits"] = qs;
    j["unitaries"] = us;
    j["measurements"] = ms;
    j["queries"] = qq;
    return j;
  }

  static NoSignallingCase from_json(const Json& j) {
    try {
      NoSignallingCase c;
      auto v3 = [](const Json& a) { return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()); };
      c.critical_mass = j.at("critical_mass").get<double>();
      c.rho = matrix_from_json(j.at("rho"));
      for (const auto& q : j.at("qubits"))
        c.qubits.push_back({q.at("label").get<std::string>(), v3(q.at("position")), v3(q.at("velocity"))});
      for (const auto& u : j.at("unitaries"))
        c.unitaries.push_back({u.at("time").get<double>(), u.at("target").get<std::string>(), matrix_from_json(u.at("u"))});
      for (const auto& m : j.at("measurements"))
        c.measurements.push_back({m.at("tag").get<std::string>(), m.at("time").get<double>(),
                                  m.at("target").get<std::string>(), matrix_from_json(m.at("basis")),
                                  matrix_from_json(m.at("alternative")), m.at("mass").get<double>()});
      for (const auto& q : j.at("queries")) c.queries.push_back({q.at("target").get<std::string>(), q.at("time").get<double>()});
      return c;
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(std::string("malformed no-signalling case: ") + e.what());
    }
  }
};

//! 2..max_qubits moving qubits, a random mixed state, local unitaries and
//! 1..max_measurements measurements, some below the collapse threshold.
inline NoSignallingCase random_no_signalling_case(Rng& rng, std::size_t max_qubits, std::size_t max_measurements) {
  if (max_qubits < 2 || max_qubits > 4) throw ParameterError("max_qubits must be between 2 and 4");
  if (max_measurements < 1) throw ParameterError("max_measurements must be at least 1");
  NoSignallingCase c;
  const std::size_t n = 2 + rng.index(max_qubits - 1);
  for (std::size_t k = 0; k < n; ++k) {
    Vec3 pos(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    Vec3 dir(rng.normal(), rng.normal(), rng.normal());
    const Vec3 vel = dir.normalized() * rng.uniform(0.0, 0.8);
    c.qubits.push_back({"q" + std::to_string(k), pos, vel});
  }
  std::vector<std::string> labels;
  for (const auto& q : c.qubits) labels.push_back(q.label);
  c.rho = random_density_matrix(HilbertSpace::qubits(labels), rng).matrix();
  const std::size_t nu = rng.index(3);
  for (std::size_t k = 0; k < nu; ++k) c.unitaries.push_back({rng.uniform(0, 10), labels[rng.index(n)], random_unitary(2, rng)});
  const std::size_t nm = 1 + rng.index(max_measurements);
  for (std::size_t k = 0; k < nm; ++k)
    c.measurements.push_back({"m" + std::to_string(k), rng.uniform(0, 10), labels[rng.index(n)], random_unitary(2, rng),
                              random_unitary(2, rng), rng.uniform() < 0.75 ? 1.0 : 0.1});
  for (const auto& l : labels)
    for (int k = 0; k < 3; ++k) c.queries.push_back({l, rng.uniform(0, 20)});
  return c;
}

struct NoSignallingFinding {
  double distance = 0.0;
  std::string measurement;
  std::size_t query = 0;
  std::string comparison;  // "averaged" or "branchwise"
  std::string variants;
};

struct NoSignallingCaseResult {
  double max_distance = 0.0;
  std::size_t comparisons = 0;
  NoSignallingFinding worst;
};

namespace detail {

struct NsVariant {
  std::string name;
  EventLog log;
  std::vector<Branch> branches;
};

inline void ns_record(NoSignallingCaseResult& r, double d, const NoSignallingFinding& f) {
  ++r.comparisons;
  if (d > r.max_distance) {
    r.max_distance = d;
    r.worst = f;
    r.worst.distance = d;
  }
}

}  // namespace detail

//! Largest trace distance between local states at queries spacelike to a
//! measurement, across that measurement's alternatives (original basis,
//! alternative basis, absent). Compared both outcome-averaged and branch by
//! branch, pairing branches with equal outcomes inside the query's past cone.
inline NoSignallingCaseResult check_no_signalling_case(const NoSignallingCase& c, const LocalStateOptions& options = {}) {
  const EventLog log = c.log();
  const DensityMatrix initial = c.initial(log);
  const CollapseModel model = c.model();
  constexpr double min_branch = 1e-9;
  NoSignallingCaseResult result;
  const HilbertSpace qubit = HilbertSpace::qubits({"q"});
  auto distance = [&](const Matrix& a, const Matrix& b) {
    return trace_distance(DensityMatrix::unchecked(qubit, a), DensityMatrix::unchecked(qubit, b));
  };

  for (const auto& m : c.measurements) {
    const SpacetimeEvent m_event = log.measurement(m.tag).event;
    std::vector<detail::NsVariant> variants{{"original", log, {}},
                                            {"alternative", log.with_projectors(m.tag, basis_projectors(m.alternative)), {}},
                                            {"absent", log.without(m.tag), {}}};
    for (auto& v : variants) v.branches = enumerate_branches(v.log, initial, model, min_branch);

    for (std::size_t qi = 0; qi < c.queries.size(); ++qi) {
      const SpacetimeEvent q_event = c.query_event(log, c.queries[qi]);
      if (!spacelike_separated(m_event, q_event)) continue;
      const LocalStateQuery query{q_event, c.queries[qi].target};

      std::vector<Matrix> averaged;
      std::vector<std::map<std::map<std::string, std::size_t>, Matrix>> by_signature;
      for (const auto& v : variants) {
        Matrix avg = Matrix::Zero(2, 2);
        double total = 0.0;
        std::map<std::map<std::string, std::size_t>, Matrix> groups;
        for (const auto& b : v.branches) {
          const Matrix local = local_state(b.trace, query, options).matrix();
          avg += b.probability * local;
          total += b.probability;
          std::map<std::string, std::size_t> signature;
          for (const auto& rec : b.trace.records())
            if (rec.collapsed && in_past_cone(v.log.measurement(rec.tag).event, q_event)) signature[rec.tag] = rec.outcome;
          auto [it, fresh] = groups.emplace(signature, local);
          if (!fresh)
            detail::ns_record(result, distance(it->second, local),
                              {0.0, m.tag, qi, "branchwise", v.name + "/" + v.name});
        }
        averaged.push_back(avg / total);
        by_signature.push_back(std::move(groups));
      }
      for (std::size_t a = 0; a < variants.size(); ++a)
        for (std::size_t b = a + 1; b < variants.size(); ++b) {
          const std::string pair = variants[a].name + "/" + variants[b].name;
          detail::ns_record(result, distance(averaged[a], averaged[b]), {0.0, m.tag, qi, "averaged", pair});
          for (const auto& [sig, state] : by_signature[a])
            if (auto it = by_signature[b].find(sig); it != by_signature[b].end())
              detail::ns_record(result, distance(state, it->second), {0.0, m.tag, qi, "branchwise", pair});
        }
    }
  }
  return result;
}

struct NoSignallingReport {
  std::size_t cases = 0;
  std::size_t comparisons = 0;
  double max_distance = 0.0;
  double tolerance = 1e-10;
  std::optional<NoSignallingCase> worst_case;
  NoSignallingFinding worst;

  bool passed() const { return max_distance <= tolerance; }

  //! Self-contained record that `verify --replay` can re-check.
  Json counterexample() const {
    if (!worst_case) return nullptr;
    return Json{{"distance", number(max_distance)},
                {"measurement", worst.measurement},
                {"query", worst.query},
                {"comparison", worst.comparison},
                {"variants", worst.variants},
                {"case", worst_case->json()}};
  }
};

inline NoSignallingReport verify_no_signalling(std::size_t family_size, std::size_t max_qubits,
                                               std::size_t max_measurements, std::uint64_t seed,
                                               const LocalStateOptions& options = {}) {
  NoSignallingReport report;
  const Rng family(seed, "no-signalling");
  for (std::size_t i = 0; i < family_size; ++i) {
    Rng rng = family.split(i);
    NoSignallingCase c = random_no_signalling_case(rng, max_qubits, max_measurements);
    const auto r = check_no_signalling_case(c, options);
    ++report.cases;
    report.comparisons += r.comparisons;
    if (r.max_distance > report.max_distance || !report.worst_case) {
      report.max_distance = r.max_distance;
      report.worst = r.worst;
      report.worst_case = std::move(c);
    }
  }
  return report;
}

}  // namespace qreadout

#endif  // QREADOUT_NOSIGNALLING_HPP
