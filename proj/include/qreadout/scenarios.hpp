#ifndef QREADOUT_SCENARIOS_HPP
#define QREADOUT_SCENARIOS_HPP

// Executable protocols. Each scenario takes a typed parameter struct and a
// seed and returns a RunReport; everything random is drawn from named
// streams of that seed.

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qreadout/gravity.hpp"
#include "qreadout/params.hpp"
#include "qreadout/readout.hpp"
#include "qreadout/report.hpp"

namespace qreadout {

namespace detail {

inline Vector bell_vector() {
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  return psi;
}

inline Json vec3_json(const Vec3& v) { return Json::array({number(v.x()), number(v.y()), number(v.z())}); }

inline Json event_json(const SpacetimeEvent& e) { return Json{{"t", number(e.t)}, {"x", vec3_json(e.x)}}; }

//! Smallest double t in (lo, hi] at which `changed(t)` holds, given
//! changed(lo) == false and changed(hi) == true and a single switch.
template <class Pred>
double bisect_transition(double lo, double hi, Pred changed) {
  while (true) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) return hi;
    (changed(mid) ? hi : lo) = mid;
  }
}

inline std::vector<Matrix> named_basis(const std::string& name) {
  if (name == "z" || name == "updown") return computational_projectors(2);
  if (name == "x" || name == "plusminus") return basis_projectors(gates::hadamard());
  throw ParameterError("unknown basis '" + name + "'");
}

inline double rho_distance_to(const Matrix& a, const Matrix& b) { return max_abs(a - b); }

inline void push_matrix_cells(std::vector<Json>& row, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(number(m(r, c).real()));
      row.push_back(number(m(r, c).imag()));
    }
}

inline std::vector<std::string> matrix_columns(const std::string& prefix, Eigen::Index dim) {
  std::vector<std::string> out;
  for (Eigen::Index r = 0; r < dim; ++r)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const std::string cell = prefix + std::to_string(r) + std::to_string(c);
      out.push_back(cell + "_re");
      out.push_back(cell + "_im");
    }
  return out;
}

inline Json precision_json(const PrecisionModel& p) {
  if (p.kind == PrecisionModel::Kind::Rounded) return p.epsilon;
  if (p.kind == PrecisionModel::Kind::Infinite) return "inf";
  throw ParameterError("scenario precision must be \"inf\" or a rounding step");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// signalling: Bell pair, R measured, state readouts at L over time.

struct SignallingParams {
  double d = 10.0;
  std::string basis = "z";
  double measure_time = 0.0;
  bool measure = true;
  double a0 = 1.0;
  double a1 = -1.0;
  PrecisionModel precision = PrecisionModel::infinite();

  static SignallingParams read(const Json& j) {
    ParamReader r(j);
    SignallingParams p;
    p.d = r.number("d", p.d);
    p.basis = r.get<std::string>("basis", p.basis);
    p.measure_time = r.number("measure_time", p.measure_time);
    p.measure = r.get<bool>("measure", p.measure);
    p.a0 = r.number("a0", p.a0);
    p.a1 = r.number("a1", p.a1);
    p.precision = r.precision();
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (!(d > 0.0)) throw ParameterError("d must be positive");
    detail::named_basis(basis);
  }

  Json json() const {
    return Json{{"d", d},   {"basis", basis}, {"measure_time", measure_time}, {"measure", measure},
                {"a0", a0}, {"a1", a1},       {"precision", detail::precision_json(precision)}};
  }
};

inline RunReport scenario_signalling(const SignallingParams& p, std::uint64_t seed) {
  p.validate();
  RunReport report{"signalling", seed, p.json(), Json::object(), {}, {}};
  EventLog log({{"L", Worldline::stationary(Vec3::Zero()), 2}, {"R", Worldline::stationary(Vec3(p.d, 0, 0)), 2}});
  const auto projectors = detail::named_basis(p.basis);
  if (p.measure) log.add_measurement(p.measure_time, "R", projectors, "r", {1.0, "apparatus"});
  const Trace trace = run(log, DensityMatrix::pure(log.space(), detail::bell_vector()), CollapseModel::always_on(), seed);

  const Observable a = Observable::diagonal({p.a0, p.a1});
  auto expect_dev = ReadoutDevice::expectation(a, p.precision, seed);
  auto state_dev = ReadoutDevice::state(p.precision, seed);
  auto srd_dev = ReadoutDevice::stochastic_eigenvalue(a, seed);
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  const double arrival = p.measure_time + p.d;
  auto at_l = [](double t) { return LocalStateQuery{{t, Vec3::Zero()}, "L"}; };

  std::optional<std::size_t> outcome;
  Matrix after = half;
  if (p.measure) {
    outcome = trace.outcome("r");
    after = projectors[*outcome].transpose();
  }

  auto columns = detail::matrix_columns("rho", 2);
  columns.insert(columns.begin(), "t");
  for (const char* c : {"expect", "srd", "conditioned"}) columns.emplace_back(c);
  Series& timeline = report.add_series("timeline", columns);

  double worst_before = 0.0, worst_after = 0.0, worst_expect = 0.0;
  for (int k = 0; k <= 20; ++k) {
    const double t = k == 15 ? arrival : p.measure_time + p.d * (k - 5) / 10.0;
    const Matrix exact = local_state(trace, at_l(t)).matrix();
    const bool conditioned = p.measure && t >= arrival;
    const Matrix shown = std::get<ClassicalDescription>(state_dev.read(trace, at_l(t))).entries;
    const double expectation = std::get<double>(expect_dev.read(trace, at_l(t)));
    const double sample = std::get<double>(srd_dev.read(trace, at_l(t)));
    std::vector<Json> row{t};
    detail::push_matrix_cells(row, shown);
    row.push_back(number(expectation));
    row.push_back(number(sample));
    row.push_back(conditioned);
    timeline.add(std::move(row));

    const double exact_expect = (a.matrix() * exact).trace().real();
    if (conditioned) {
      worst_after = std::max(worst_after, detail::rho_distance_to(exact, after));
      if (p.basis == "z") worst_expect = std::max(worst_expect, std::abs(exact_expect - (*outcome ? p.a1 : p.a0)));
    } else {
      worst_before = std::max(worst_before, detail::rho_distance_to(exact, half));
      worst_expect = std::max(worst_expect, std::abs(exact_expect - 0.5 * (p.a0 + p.a1)));
    }
  }

  Json transition = nullptr;
  if (p.measure) {
    const double lo = p.measure_time + p.d * -0.5;
    auto changed = [&](double t) { return detail::rho_distance_to(local_state(trace, at_l(t)).matrix(), half) > 1e-12; };
    const double found = changed(lo) ? lo : detail::bisect_transition(lo, p.measure_time + 2.0 * p.d, changed);
    transition = found;
    const double before = std::nextafter(found, -INFINITY);
    const bool exact = found - p.measure_time >= p.d && !(before - p.measure_time >= p.d);
    report.check("transition delay equals d", exact,
                 "transition at t=" + format_double(found) + ", delay " + format_double(found - p.measure_time));
    report.results["outcome"] = *outcome;
  } else {
    report.results["outcome"] = nullptr;
  }
  report.results["transition_time"] = transition;
  report.results["expected_transition_time"] = p.measure ? Json(arrival) : Json(nullptr);
  report.results["max_error_before"] = number(worst_before);
  report.results["max_error_after"] = number(worst_after);
  report.results["max_expectation_error"] = number(worst_expect);
  report.check("half identity before the light-cone arrival", worst_before <= 1e-12, format_double(worst_before));
  if (p.measure) report.check("outcome projector after arrival", worst_after <= 1e-12, format_double(worst_after));
  report.check("expectation readout matches the local state", worst_expect <= 1e-12, format_double(worst_expect));
  return report;
}

// ---------------------------------------------------------------------------
// probe: infer where a distant system collapsed from the readout transition.

struct ProbeParams {
  double d = 8.0;
  Vec3 velocity = Vec3::Zero();
  Vec3 region_center = Vec3(8, 0, 0);
  double region_radius = 0.5;
  double active_from = 3.0;
  double scan_step = 0.25;
  double horizon = 40.0;

  static ProbeParams read(const Json& j) {
    ParamReader r(j);
    ProbeParams p;
    p.d = r.number("d", p.d);
    p.velocity = r.vec3("velocity", p.velocity);
    p.region_center = r.vec3("region_center", p.region_center);
    p.region_radius = r.number("region_radius", p.region_radius);
    p.active_from = r.number("active_from", p.active_from);
    p.scan_step = r.number("scan_step", p.scan_step);
    p.horizon = r.number("horizon", p.horizon);
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (!(d > 0.0)) throw ParameterError("d must be positive");
    if (!(velocity.norm() < 1.0)) throw ParameterError("probe velocity must be below light speed");
    if (!(region_radius > 0.0)) throw ParameterError("region_radius must be positive");
    if (!(scan_step > 0.0)) throw ParameterError("scan_step must be positive");
    if (!(horizon > 0.0)) throw ParameterError("horizon must be positive");
  }

  Json json() const {
    return Json{{"d", d},
                {"velocity", detail::vec3_json(velocity)},
                {"region_center", detail::vec3_json(region_center)},
                {"region_radius", region_radius},
                {"active_from", active_from},
                {"scan_step", scan_step},
                {"horizon", horizon}};
  }
};

//! Ground truth of the probe experiment. The observer sees only readouts at
//! L and the probe's trajectory; reveal() is for the final comparison.
class HiddenEnvironment {
 public:
  HiddenEnvironment(const ProbeParams& p, std::uint64_t seed)
      : worldline_(Worldline::uniform(Vec3(p.d, 0, 0), p.velocity, 0.0, 0.0, p.horizon)),
        trace_(build(p, seed)) {}

  const Worldline& probe_worldline() const { return worldline_; }
  Vec3 observer_position() const { return Vec3::Zero(); }

  Matrix readout(double t) const { return rd_state(trace_, {{t, observer_position()}, "L"}).entries; }

  std::optional<SpacetimeEvent> reveal() const { return truth_; }

 private:
  Trace build(const ProbeParams& p, std::uint64_t seed) {
    EventLog log({{"L", Worldline::stationary(Vec3::Zero()), 2}, {"R", worldline_, 2}});
    if (const auto t = entry_time(p)) {
      truth_ = worldline_.event_at(*t);
      log.add_measurement(*t, "R", computational_projectors(2), "environment", {1.0, "environment"});
    }
    return run(log, DensityMatrix::pure(log.space(), detail::bell_vector()), CollapseModel::always_on(), seed);
  }

  //! First time in [max(0, active_from), horizon] at which R is inside the region.
  std::optional<double> entry_time(const ProbeParams& p) const {
    const double t0 = std::max(0.0, p.active_from);
    if (t0 > p.horizon) return std::nullopt;
    const Vec3 u = worldline_.position_at(t0) - p.region_center;
    const Vec3& v = p.velocity;
    const double r2 = p.region_radius * p.region_radius;
    if (u.squaredNorm() <= r2) return t0;
    const double a = v.squaredNorm();
    const double b = u.dot(v);
    const double c = u.squaredNorm() - r2;
    const double disc = b * b - a * c;
    if (a == 0.0 || disc < 0.0 || b >= 0.0) return std::nullopt;
    const double tau = c / (-b + std::sqrt(disc));
    const double t = t0 + tau;
    if (t > p.horizon) return std::nullopt;
    return t;
  }

  Worldline worldline_;
  std::optional<SpacetimeEvent> truth_;
  Trace trace_;
};

struct ProbeInference {
  std::optional<double> grid_transition;
  std::optional<double> transition;
  std::optional<TimeInterval> grid_locus;
  std::optional<TimeInterval> locus;
};

//! Observer strategy: scan the readout at L, refine the switch by bisection
//! and map it back onto the probe worldline.
inline ProbeInference infer_collapse(const HiddenEnvironment& env, double scan_step, double horizon, Series* scan) {
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  auto changed = [&](double t) { return max_abs(env.readout(t) - half) > 1e-9; };
  const double reach = (env.probe_worldline().position_at(horizon) - env.observer_position()).norm();
  const double t_max = horizon + reach + scan_step;
  ProbeInference out;
  double previous = 0.0;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * scan_step;
    if (t > t_max) break;
    const Matrix m = env.readout(t);
    const bool c = max_abs(m - half) > 1e-9;
    if (scan) scan->add({t, number(m(0, 0).real()), number(m(1, 1).real()), c});
    if (c) {
      out.grid_transition = t;
      out.transition = k == 0 ? t : detail::bisect_transition(previous, t, changed);
      break;
    }
    previous = t;
  }
  if (out.transition) {
    out.grid_locus = collapse_locus(env.probe_worldline(), {*out.grid_transition, env.observer_position()});
    out.locus = collapse_locus(env.probe_worldline(), {*out.transition, env.observer_position()});
  }
  return out;
}

inline RunReport scenario_probe(const ProbeParams& p, std::uint64_t seed) {
  p.validate();
  RunReport report{"probe", seed, p.json(), Json::object(), {}, {}};
  const HiddenEnvironment env(p, seed);
  Series& scan = report.add_series("scan", {"t", "rho00", "rho11", "changed"});
  const ProbeInference inf = infer_collapse(env, p.scan_step, p.horizon, &scan);

  // Comparison with the hidden truth happens only after inference is done.
  const auto truth = env.reveal();
  report.results["transition_time"] = inf.transition ? Json(*inf.transition) : Json(nullptr);
  report.results["true_collapse"] = truth ? detail::event_json(*truth) : Json(nullptr);
  if (!inf.transition) {
    report.results["status"] = "no transition";
    report.check("no hidden collapse and no transition", !truth);
    return report;
  }
  report.results["status"] = "transition";
  if (!inf.locus) {
    report.check("transition maps onto the probe worldline", false);
    return report;
  }
  const SpacetimeEvent inferred = env.probe_worldline().event_at(inf.locus->begin);
  report.results["inferred_collapse"] = detail::event_json(inferred);
  report.results["inferred_interval"] = Json::array({inf.locus->begin, inf.locus->end});
  if (inf.grid_locus) report.results["grid_inferred_time"] = inf.grid_locus->begin;
  if (!truth) {
    report.check("transition implies a hidden collapse", false);
    return report;
  }
  const double time_error = std::abs(inferred.t - truth->t);
  const double space_error = (inferred.x - truth->x).norm();
  report.results["time_error"] = time_error;
  report.results["position_error"] = space_error;
  report.check("inferred collapse time within 1e-6", time_error <= 1e-6, format_double(time_error));
  report.check("inferred collapse position within 1e-6", space_error <= 1e-6, format_double(space_error));
  if (inf.grid_locus) {
    const double grid_error = std::abs(inf.grid_locus->begin - truth->t);
    report.results["grid_time_error"] = grid_error;
    report.check("scan-only estimate within one grid step", grid_error <= p.scan_step, format_double(grid_error));
  }
  return report;
}

// ---------------------------------------------------------------------------
// collapse_test: which interactions make the readout at L switch.

struct InteractionCase {
  std::string name;
  Interaction interaction;
};

struct CollapseVariant {
  std::string name;
  CollapseModel model;
};

inline CollapseVariant parse_variant(const Json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ParameterError("each variant needs a \"kind\"");
  ParamReader r(j);
  const auto kind = r.get<std::string>("kind", "");
  CollapseVariant v{kind, CollapseModel::always_on()};
  if (kind == "always_on") {
  } else if (kind == "mass_threshold") {
    const double m = r.number("critical_mass", 1e-9);
    if (!(m >= 0.0)) throw ParameterError("critical_mass must be non-negative");
    v.model = CollapseModel::mass_threshold(m);
  } else if (kind == "observer_tagged") {
    const auto agents = r.get<std::vector<std::string>>("agents", {"human"});
    v.model = CollapseModel::observer_tagged({agents.begin(), agents.end()});
  } else {
    throw ParameterError("unknown collapse model kind '" + kind + "'");
  }
  v.name = r.get<std::string>("name", v.model.describe());
  r.finish();
  return v;
}

inline Json variant_json(const CollapseVariant& v) {
  Json j{{"kind", ""}, {"name", v.name}};
  switch (v.model.kind()) {
    case CollapseModel::Kind::AlwaysOn:
      j["kind"] = "always_on";
      break;
    case CollapseModel::Kind::MassThreshold:
      j["kind"] = "mass_threshold";
      j["critical_mass"] = v.model.critical_mass();
      break;
    case CollapseModel::Kind::ObserverTagged:
      j["kind"] = "observer_tagged";
      j["agents"] = std::vector<std::string>(v.model.agents().begin(), v.model.agents().end());
      break;
    case CollapseModel::Kind::Custom:
      j["kind"] = "custom";
      break;
  }
  return j;
}

struct CollapseTestParams {
  double d = 10.0;
  std::vector<CollapseVariant> variants{
      {"always-on", CollapseModel::always_on()},
      {"mass-threshold(1e-9)", CollapseModel::mass_threshold(1e-9)},
      {"mass-threshold(1e-6)", CollapseModel::mass_threshold(1e-6)},
      {"observer-tagged{human}", CollapseModel::observer_tagged({"human"})}};
  std::vector<InteractionCase> suite = default_suite();

  static std::vector<InteractionCase> default_suite() {
    std::vector<InteractionCase> s;
    for (double m : {1e-18, 1e-15, 1e-12, 1e-9, 1e-7, 1e-5, 1e-3})
      s.push_back({"apparatus@" + format_double(m), {m, "apparatus"}});
    for (const char* agent : {"human", "small_animal", "photosynthesis"})
      s.push_back({std::string(agent) + "@1e-12", {1e-12, agent}});
    return s;
  }

  static CollapseTestParams read(const Json& j) {
    ParamReader r(j);
    CollapseTestParams p;
    p.d = r.number("d", p.d);
    if (r.has("variants")) {
      p.variants.clear();
      const Json& vs = r.raw("variants");
      if (!vs.is_array()) throw ParameterError("variants must be an array");
      for (const auto& v : vs) p.variants.push_back(parse_variant(v));
    }
    if (r.has("suite")) {
      p.suite.clear();
      const Json& ss = r.raw("suite");
      if (!ss.is_array()) throw ParameterError("suite must be an array");
      for (const auto& s : ss) {
        ParamReader sr(s);
        InteractionCase c;
        c.interaction.amplified_mass = sr.number("mass", 0.0);
        c.interaction.agent = sr.get<std::string>("agent", "apparatus");
        c.name = sr.get<std::string>("name", c.interaction.agent + "@" + format_double(c.interaction.amplified_mass));
        sr.finish();
        p.suite.push_back(std::move(c));
      }
    }
    r.mark("variants", nullptr);
    r.mark("suite", nullptr);
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (!(d > 0.0)) throw ParameterError("d must be positive");
    if (variants.size() < 2) throw ParameterError("collapse_test needs at least two model variants");
    if (suite.empty()) throw ParameterError("interaction suite is empty");
  }

  Json json() const {
    Json vs = Json::array(), ss = Json::array();
    for (const auto& v : variants) vs.push_back(variant_json(v));
    for (const auto& s : suite)
      ss.push_back(Json{{"name", s.name}, {"mass", s.interaction.amplified_mass}, {"agent", s.interaction.agent}});
    return Json{{"d", d}, {"variants", vs}, {"suite", ss}};
  }
};

inline RunReport scenario_collapse_test(const CollapseTestParams& p, std::uint64_t seed) {
  p.validate();
  RunReport report{"collapse_test", seed, p.json(), Json::object(), {}, {}};
  const Matrix half = Matrix::Identity(2, 2) / 2.0;
  Series& sig = report.add_series("signatures", {"variant", "interaction", "mass", "agent", "collapses", "transition"});
  std::vector<std::vector<bool>> signatures;
  for (std::size_t v = 0; v < p.variants.size(); ++v) {
    std::vector<bool> row;
    for (std::size_t i = 0; i < p.suite.size(); ++i) {
      EventLog log({{"L", Worldline::stationary(Vec3::Zero()), 2}, {"R", Worldline::stationary(Vec3(p.d, 0, 0)), 2}});
      log.add_measurement(0.0, "R", computational_projectors(2), "r", p.suite[i].interaction);
      const Trace trace = run(log, DensityMatrix::pure(log.space(), detail::bell_vector()), p.variants[v].model,
                              derive_seed(seed, i));
      const LocalStateQuery before{{std::nextafter(p.d, 0.0), Vec3::Zero()}, "L"};
      const LocalStateQuery after{{p.d, Vec3::Zero()}, "L"};
      const bool quiet = max_abs(local_state(trace, before).matrix() - half) <= 1e-12;
      const bool switched = max_abs(local_state(trace, after).matrix() - half) > 1e-12;
      const bool transition = quiet && switched;
      row.push_back(transition);
      sig.add({p.variants[v].name, p.suite[i].name, p.suite[i].interaction.amplified_mass, p.suite[i].interaction.agent,
               p.variants[v].model.decides(p.suite[i].interaction), transition});
      if (!quiet) report.check("no readout change before light-cone arrival", false, p.variants[v].name);
    }
    signatures.push_back(std::move(row));
  }

  Series& disc = report.add_series("discrimination", {"variant_a", "variant_b", "distinguishable", "witnesses"});
  Json matrix = Json::array();
  bool consistent = true;
  for (std::size_t a = 0; a < p.variants.size(); ++a) {
    Json row = Json::array();
    for (std::size_t b = 0; b < p.variants.size(); ++b) {
      std::size_t witnesses = 0;
      for (std::size_t i = 0; i < p.suite.size(); ++i) witnesses += signatures[a][i] != signatures[b][i];
      row.push_back(witnesses > 0);
      disc.add({p.variants[a].name, p.variants[b].name, witnesses > 0, witnesses});
      // Models that agree on every interaction must produce the same signature.
      bool same_decisions = true;
      for (const auto& s : p.suite)
        same_decisions = same_decisions && p.variants[a].model.decides(s.interaction) == p.variants[b].model.decides(s.interaction);
      if (same_decisions && witnesses > 0) consistent = false;
      if (!same_decisions && witnesses == 0) consistent = false;
    }
    matrix.push_back(std::move(row));
  }
  report.results["variants"] = Json::array();
  for (const auto& v : p.variants) report.results["variants"].push_back(v.name);
  report.results["discrimination_matrix"] = matrix;
  Json sigs = Json::object();
  for (std::size_t v = 0; v < p.variants.size(); ++v) sigs[p.variants[v].name] = signatures[v];
  report.results["signatures"] = sigs;
  report.check("signatures follow the collapse decisions", consistent);
  return report;
}

// ---------------------------------------------------------------------------
// abrams_lloyd: search with post-selection and a state readout.

struct AbramsLloydParams {
  std::size_t n = 4;
  std::vector<int> f;  // truth table of size 2^n
  PrecisionModel precision = PrecisionModel::infinite();
  std::size_t runs = 100;
  std::size_t max_attempts = 1000;

  static std::vector<int> table_from_solutions(std::size_t n, const std::vector<std::size_t>& solutions) {
    std::vector<int> f(std::size_t{1} << n, 0);
    for (auto s : solutions) {
      if (s >= f.size()) throw ParameterError("solution index out of range");
      f[s] = 1;
    }
    return f;
  }

  static AbramsLloydParams with_solutions(std::size_t n, const std::vector<std::size_t>& solutions) {
    AbramsLloydParams p;
    p.n = n;
    p.f = table_from_solutions(n, solutions);
    return p;
  }

  static AbramsLloydParams read(const Json& j) {
    ParamReader r(j);
    AbramsLloydParams p;
    const auto n = r.get<long long>("n", 4);
    if (n < 1 || n > 10) throw ParameterError("n out of range: 1 <= n <= 10");
    p.n = static_cast<std::size_t>(n);
    if (r.has("f") && r.has("solutions")) throw ParameterError("give either f or solutions, not both");
    if (r.has("f")) {
      p.f = r.get<std::vector<int>>("f", {});
      r.mark("solutions", nullptr);
    } else {
      std::vector<std::size_t> fallback;
      for (std::size_t s : {1, 7, 12})
        if (s < (std::size_t{1} << p.n)) fallback.push_back(s);
      p.f = table_from_solutions(p.n, r.get<std::vector<std::size_t>>("solutions", fallback));
      r.mark("f", nullptr);
    }
    p.precision = r.precision();
    p.runs = r.get<std::size_t>("runs", p.runs);
    p.max_attempts = r.get<std::size_t>("max_attempts", p.max_attempts);
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (n < 1 || n > 10) throw ParameterError("n out of range: 1 <= n <= 10");
    if (f.size() != (std::size_t{1} << n)) throw ParameterError("truth table must have 2^n entries");
    for (int v : f)
      if (v != 0 && v != 1) throw ParameterError("truth table entries must be 0 or 1");
    if (max_attempts == 0) throw ParameterError("max_attempts must be positive");
  }

  std::size_t solutions() const {
    std::size_t s = 0;
    for (int v : f) s += static_cast<std::size_t>(v);
    return s;
  }

  Json json() const {
    return Json{{"n", n},
                {"f", f},
                {"precision", detail::precision_json(precision)},
                {"runs", runs},
                {"max_attempts", max_attempts}};
  }
};

namespace detail {

inline EventLog search_log(std::size_t n) {
  std::vector<SubsystemPlacement> places;
  for (std::size_t k = 0; k < n; ++k) places.push_back({"x" + std::to_string(k), Worldline::stationary(Vec3::Zero()), 2});
  places.push_back({"anc", Worldline::stationary(Vec3::Zero()), 2});
  EventLog log(std::move(places));
  for (std::size_t k = 0; k < n; ++k) log.add_unitary(1.0, {"x" + std::to_string(k)}, gates::hadamard());
  for (std::size_t k = 0; k < n; ++k)
    log.add_measurement(2.0, "x" + std::to_string(k), computational_projectors(2), "x" + std::to_string(k),
                        {1.0, "apparatus"});
  return log;
}

//! 2^{-n/2} sum_i |i, f(i)>.
inline DensityMatrix search_state(const EventLog& log, const std::vector<int>& f) {
  Vector psi = Vector::Zero(static_cast<Eigen::Index>(2 * f.size()));
  for (std::size_t i = 0; i < f.size(); ++i) psi(static_cast<Eigen::Index>(2 * i + static_cast<std::size_t>(f[i]))) = 1.0;
  psi /= std::sqrt(static_cast<double>(f.size()));
  return DensityMatrix::pure(log.space(), psi);
}

inline bool all_zero(const Trace& t, std::size_t n) {
  for (std::size_t k = 0; k < n; ++k)
    if (t.outcome("x" + std::to_string(k)) != 0) return false;
  return true;
}

//! Post-selected last qubit: the pure state along (2^n - s, s).
inline Matrix search_readout_exact(std::size_t n, std::size_t s) {
  const double big = std::ldexp(1.0, static_cast<int>(n));
  Vector v(2);
  v << big - static_cast<double>(s), static_cast<double>(s);
  v.normalize();
  return v * v.adjoint();
}

//! The estimator only looks at the diagonal, so that is what must differ.
inline bool diagonal_differs(const Matrix& a, const Matrix& b) {
  return a(0, 0) != b(0, 0) || a(1, 1) != b(1, 1);
}

inline double estimate_solutions(const Matrix& readout, std::size_t n) {
  const double p0 = std::max(0.0, readout(0, 0).real());
  const double p1 = std::max(0.0, readout(1, 1).real());
  const double r0 = std::sqrt(p0), r1 = std::sqrt(p1);
  if (r0 + r1 == 0.0) return 0.0;
  return std::ldexp(1.0, static_cast<int>(n)) * r1 / (r0 + r1);
}

}  // namespace detail

inline RunReport scenario_abrams_lloyd(const AbramsLloydParams& p, std::uint64_t seed) {
  p.validate();
  RunReport report{"abrams_lloyd", seed, p.json(), Json::object(), {}, {}};
  const EventLog log = detail::search_log(p.n);
  const DensityMatrix initial = detail::search_state(log, p.f);
  const std::size_t s_true = p.solutions();
  const CollapseModel model = CollapseModel::always_on();
  const LocalStateQuery query{{3.0, Vec3::Zero()}, "anc"};

  std::optional<Matrix> readout;
  std::size_t attempts = 0;
  Series& tries = report.add_series("attempts", {"attempt", "seed", "post_selected"});
  while (attempts < p.max_attempts) {
    const std::uint64_t s = derive_seed(seed, attempts);
    const Trace trace = run(log, initial, model, s);
    const bool ok = detail::all_zero(trace, p.n);
    tries.add({attempts, s, ok});
    ++attempts;
    if (ok) {
      readout = rd_state(trace, query, p.precision).entries;
      break;
    }
  }
  report.results["s_true"] = s_true;
  report.results["attempts"] = attempts;
  report.results["post_selection_probability"] =
      number(((std::ldexp(1.0, static_cast<int>(p.n)) - double(s_true)) * (std::ldexp(1.0, static_cast<int>(p.n)) - double(s_true)) +
              double(s_true) * double(s_true)) /
             std::ldexp(1.0, 2 * static_cast<int>(p.n)));
  if (!readout) {
    report.results["s_estimated"] = nullptr;
    report.check("post-selection succeeded", false, "no all-zero outcome in max_attempts");
    return report;
  }
  Rng unused(0);
  const Matrix zero_readout = apply_precision(detail::search_readout_exact(p.n, 0), p.precision, unused);
  const double s_raw = detail::estimate_solutions(*readout, p.n);
  const auto s_est = static_cast<std::size_t>(std::llround(s_raw));
  report.results["readout"] = matrix_json(*readout);
  report.results["s_estimate_raw"] = number(s_raw);
  report.results["s_estimated"] = s_est;
  const bool distinguished = detail::diagonal_differs(*readout, zero_readout);
  report.results["distinguishes_from_zero"] = distinguished;
  report.results["status"] = s_est == 0 ? "no solution" : "solutions found";
  if (p.precision.kind == PrecisionModel::Kind::Infinite) {
    report.check("recovered s equals brute-force count", s_est == s_true,
                 "estimated " + std::to_string(s_est) + ", true " + std::to_string(s_true));
    const double err = max_abs(*readout - detail::search_readout_exact(p.n, s_true));
    report.check("readout matches the post-selected state", err <= 1e-10, format_double(err));
  }

  if (p.runs > 0) {
    std::size_t successes = 0;
    const std::uint64_t base = derive_seed(seed, hash_name("postselect"));
    for (std::size_t i = 0; i < p.runs; ++i) successes += detail::all_zero(run(log, initial, model, derive_seed(base, i)), p.n);
    const double freq = static_cast<double>(successes) / static_cast<double>(p.runs);
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(p.runs));
    report.results["runs"] = p.runs;
    report.results["post_selection_successes"] = successes;
    report.results["post_selection_frequency"] = freq;
    report.check("post-selection frequency at least 1/4 within 3 sigma", freq >= 0.25 - 3.0 * sigma,
                 format_double(freq));
  }

  // Finite-precision power: largest n' at which a single solution is told apart from none.
  Series& profile = report.add_series(
      "precision_profile", {"n", "smallest_entry", "readout_p1", "distinguishable", "full_matrix_distinguishable"});
  std::size_t max_n = 0, max_n_full = 0;
  bool contiguous = true, contiguous_full = true;
  for (std::size_t k = 1; k <= 10; ++k) {
    const Matrix exact = detail::search_readout_exact(k, 1);
    const Matrix shown = apply_precision(exact, p.precision, unused);
    const Matrix none = apply_precision(detail::search_readout_exact(k, 0), p.precision, unused);
    const bool dist = detail::diagonal_differs(shown, none);
    const bool dist_full = max_abs(shown - none) > 0.0;
    profile.add({k, number(exact(1, 1).real()), number(shown(1, 1).real()), dist, dist_full});
    contiguous = contiguous && dist;
    contiguous_full = contiguous_full && dist_full;
    if (contiguous) max_n = k;
    if (contiguous_full) max_n_full = k;
  }
  report.results["max_distinguishable_n"] = max_n;
  report.results["max_distinguishable_n_full_matrix"] = max_n_full;
  if (p.precision.kind == PrecisionModel::Kind::Rounded) {
    const double predicted = std::floor(-std::log2(p.precision.epsilon) / 2.0);
    report.results["predicted_max_n"] = std::clamp(predicted, 0.0, 10.0);
  } else {
    report.results["predicted_max_n"] = 10;
  }
  return report;
}

// ---------------------------------------------------------------------------
// gravcat: a superposed mass entangled with a distant spin, read through its field.

struct GravcatParams {
  double mass = 1.0;
  double G = 1.0;
  Vec3 x = Vec3::Zero();
  Vec3 x_prime = Vec3(2, 0, 0);
  double d = 20.0;
  double measure_time = 0.0;
  double sigma = 0.01;
  bool measure = true;

  static GravcatParams read(const Json& j) {
    ParamReader r(j);
    GravcatParams p;
    p.mass = r.number("mass", p.mass);
    p.G = r.number("G", p.G);
    p.x = r.vec3("x", p.x);
    p.x_prime = r.vec3("x_prime", p.x_prime);
    p.d = r.number("d", p.d);
    p.measure_time = r.number("measure_time", p.measure_time);
    p.sigma = r.number("sigma", p.sigma);
    p.measure = r.get<bool>("measure", p.measure);
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (!(mass > 0.0) || !(G > 0.0)) throw ParameterError("mass and G must be positive");
    if (!(d > 0.0)) throw ParameterError("d must be positive");
    if (!(sigma >= 0.0)) throw ParameterError("sigma must be non-negative");
    if (!((x_prime - x).norm() > 0.0)) throw ParameterError("branch centres must differ");
  }

  Json json() const {
    return Json{{"mass", mass},
                {"G", G},
                {"x", detail::vec3_json(x)},
                {"x_prime", detail::vec3_json(x_prime)},
                {"d", d},
                {"measure_time", measure_time},
                {"sigma", sigma},
                {"measure", measure}};
  }
};

struct GravcatProbes {
  Vec3 axis;       // on the branch axis, half a separation beyond x
  Vec3 symmetric;  // on the perpendicular bisector, one separation out
  std::vector<Vec3> all;
};

inline GravcatProbes gravcat_probes(const GravcatParams& p) {
  const Vec3 delta = p.x_prime - p.x;
  const double sep = delta.norm();
  const Vec3 dir = delta / sep;
  const Vec3 mid = 0.5 * (p.x + p.x_prime);
  Vec3 seed = std::abs(dir.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(0, 1, 0);
  const Vec3 n1 = (seed - seed.dot(dir) * dir).normalized();
  const Vec3 n2 = dir.cross(n1);
  GravcatProbes g;
  g.axis = p.x - 0.5 * delta;
  g.symmetric = mid + sep * n1;
  g.all = {g.axis, p.x_prime + 0.5 * delta, g.symmetric, mid - sep * n1, mid + sep * n2};
  return g;
}

inline RunReport scenario_gravcat(const GravcatParams& p, std::uint64_t seed) {
  p.validate();
  const double sep = (p.x_prime - p.x).norm();
  if (p.d < MassConfiguration::far_field_factor * sep)
    throw FarFieldViolation("spin distance d must be at least 10 branch separations");
  RunReport report{"gravcat", seed, p.json(), Json::object(), {}, {}};
  const Vec3 mid = 0.5 * (p.x + p.x_prime);
  const Vec3 spin_at = mid + Vec3(p.d, 0, 0);
  EventLog log({{"M", Worldline::stationary(mid), 2}, {"S", Worldline::stationary(spin_at), 2}});
  if (p.measure) log.add_measurement(p.measure_time, "S", computational_projectors(2), "s", {1.0, "apparatus"});
  const Trace trace = run(log, DensityMatrix::pure(log.space(), detail::bell_vector()), CollapseModel::always_on(), seed);
  const GravcatProbes probes = gravcat_probes(p);

  auto field_at = [&](const Vec3& y, double t, std::vector<double>* weights = nullptr) {
    const DensityMatrix local = local_state(trace, {{t, y}, "M"});
    const double w0 = std::clamp(local(0, 0).real(), 0.0, 1.0);
    const auto cfg = MassConfiguration::from_weights({p.x, p.x_prime}, {w0, 1.0 - w0}, p.mass, p.G);
    if (weights) *weights = {w0, 1.0 - w0};
    return newtonian_potential(cfg, y);
  };
  auto formula = [&](const Vec3& y, double w0) {
    return -p.G * p.mass * (w0 / (p.x - y).norm() + (1.0 - w0) / (p.x_prime - y).norm());
  };

  Rng noise(seed, "field-noise");
  const double arrival_axis = p.measure_time + (probes.axis - spin_at).norm();
  const double arrival_sym = p.measure_time + (probes.symmetric - spin_at).norm();
  Series& timeline = report.add_series(
      "field_timeline", {"t", "phi_axis", "phi_symmetric", "phi_axis_noisy", "phi_symmetric_noisy", "w0_axis"});
  for (int k = 0; k <= 20; ++k) {
    const double t = p.measure_time + p.d * (k - 5) / 10.0;
    std::vector<double> w;
    const double a = field_at(probes.axis, t, &w);
    const double s = field_at(probes.symmetric, t);
    timeline.add({t, number(a), number(s), number(a + p.sigma * noise.normal()), number(s + p.sigma * noise.normal()),
                  number(w[0])});
  }

  const double before = p.measure_time - 1.0;
  Json pre{{"phi_axis", number(field_at(probes.axis, before))},
           {"phi_symmetric", number(field_at(probes.symmetric, before))},
           {"expected_axis", number(formula(probes.axis, 0.5))},
           {"expected_symmetric", number(formula(probes.symmetric, 0.5))}};
  const double pre_err = std::max(std::abs(pre["phi_axis"].get<double>() - pre["expected_axis"].get<double>()),
                                  std::abs(pre["phi_symmetric"].get<double>() - pre["expected_symmetric"].get<double>()));
  report.results["probe_axis"] = detail::vec3_json(probes.axis);
  report.results["probe_symmetric"] = detail::vec3_json(probes.symmetric);
  report.results["pre_collapse"] = pre;
  report.check("pre-collapse field is the Born-weighted average", pre_err <= 1e-12, format_double(pre_err));

  if (p.measure) {
    const std::size_t k = trace.outcome("s");
    const double after = std::max(arrival_axis, arrival_sym);
    const double w0 = k == 0 ? 1.0 : 0.0;
    Json post{{"outcome", k},
              {"phi_axis", number(field_at(probes.axis, after))},
              {"phi_symmetric", number(field_at(probes.symmetric, after))},
              {"expected_axis", number(formula(probes.axis, w0))},
              {"expected_symmetric", number(formula(probes.symmetric, w0))}};
    const double post_err =
        std::max(std::abs(post["phi_axis"].get<double>() - post["expected_axis"].get<double>()),
                 std::abs(post["phi_symmetric"].get<double>() - post["expected_symmetric"].get<double>()));
    report.results["post_collapse"] = post;
    report.results["arrival_axis"] = arrival_axis;
    report.results["arrival_symmetric"] = arrival_sym;
    report.check("post-collapse field is the branch field", post_err <= 1e-12, format_double(post_err));
    const bool gated = std::abs(field_at(probes.axis, std::nextafter(arrival_axis, -INFINITY)) - formula(probes.axis, 0.5)) <= 1e-12 &&
                       std::abs(field_at(probes.axis, arrival_axis) - formula(probes.axis, w0)) <= 1e-12;
    report.check("field switches when the collapse enters the past cone", gated);
  }

  const auto cfg = MassConfiguration::from_weights({p.x, p.x_prime}, {0.5, 0.5}, p.mass, p.G);
  const auto dist = branch_field_distinguishability(cfg, probes.all, p.sigma);
  report.results["distinguishability"] = Json{{"average_vs_branch", vector_json(dist.average_vs_branch)},
                                              {"branch0_vs_branch1", number(dist.branch_vs_branch[0][1])},
                                              {"max_average_vs_branch", vector_json(dist.max_average_vs_branch)},
                                              {"min_ratio", number(dist.min_ratio)},
                                              {"distinguishable", dist.distinguishable}};

  std::vector<PotentialSample> samples;
  Rng sample_noise(seed, "weight-noise");
  for (const auto& y : probes.all) samples.push_back({y, field_at(y, before) + p.sigma * sample_noise.normal(), p.sigma});
  try {
    const auto fit = fit_born_weights(samples, {p.x, p.x_prime}, p.G, p.mass);
    report.results["weight_estimate"] = vector_json(fit.weights);
    report.results["weight_estimate_error"] = number(std::abs(fit.weights[0] - 0.5));
  } catch (const Error& e) {
    report.results["weight_estimate"] = nullptr;
    report.results["weight_estimate_error"] = e.what();
  }
  return report;
}

// ---------------------------------------------------------------------------
// interferometry: path-entangled mass with a distant spin measured at varying times.

struct InterferometryParams {
  std::vector<std::string> timings{"before", "during", "after"};
  std::vector<std::string> bases{"plusminus", "updown"};
  std::size_t runs = 200;
  double D = 10.0;
  double phi = 0.0;

  static constexpr double stage_phase = 10.0;
  static constexpr double stage_mirror = 11.0;
  static constexpr double stage_recombine = 12.0;
  static constexpr double detection = 13.0;
  static constexpr double readout_time = 12.5;

  static double arrival(const std::string& timing) {
    if (timing == "before") return stage_phase - 0.5;
    if (timing == "during") return stage_phase + 0.5;
    if (timing == "after") return detection + 0.5;
    throw ParameterError("timing must be before, during or after");
  }

  static std::vector<std::string> choices(ParamReader& r, const std::string& key, std::vector<std::string> all) {
    const auto v = r.get<std::string>(key, "all");
    if (v == "all" || v == "both") return all;
    if (std::find(all.begin(), all.end(), v) == all.end()) throw ParameterError("invalid value for " + key);
    return {v};
  }

  static InterferometryParams read(const Json& j) {
    ParamReader r(j);
    InterferometryParams p;
    p.timings = choices(r, "timing", p.timings);
    p.bases = choices(r, "basis", p.bases);
    p.runs = r.get<std::size_t>("runs", p.runs);
    p.D = r.number("D", p.D);
    p.phi = r.number("phi", p.phi);
    r.finish();
    p.validate();
    return p;
  }

  void validate() const {
    if (runs < 1) throw ParameterError("runs must be at least 1");
    if (!(D > 0.0)) throw ParameterError("D must be positive");
    for (const auto& t : timings) arrival(t);
    for (const auto& b : bases) detail::named_basis(b);
  }

  Json json() const {
    return Json{{"timing", timings.size() == 3 ? Json("all") : Json(timings.front())},
                {"basis", bases.size() == 2 ? Json("both") : Json(bases.front())},
                {"runs", runs},
                {"D", D},
                {"phi", phi}};
  }
};

namespace detail {

inline EventLog interferometer_log(const InterferometryParams& p, const std::string& basis, const std::string& timing,
                                   bool detect) {
  using P = InterferometryParams;
  EventLog log({{"m2", Worldline::stationary(Vec3::Zero()), 2}, {"P", Worldline::stationary(Vec3(p.D, 0, 0)), 2}});
  log.add_unitary(P::stage_phase, {"m2"}, gates::phase(p.phi));
  log.add_unitary(P::stage_mirror, {"m2"}, gates::pauli_x());
  log.add_unitary(P::stage_recombine, {"m2"}, gates::hadamard());
  log.add_measurement(P::arrival(timing) - p.D, "P", named_basis(basis), "p", {1.0, "apparatus"});
  if (detect) log.add_measurement(P::detection, "m2", computational_projectors(2), "det", {1.0, "apparatus"});
  return log;
}

}  // namespace detail

inline RunReport scenario_interferometry(const InterferometryParams& p, std::uint64_t seed) {
  p.validate();
  using P = InterferometryParams;
  RunReport report{"interferometry", seed, p.json(), Json::object(), {}, {}};
  const LocalStateQuery at_det{{P::readout_time, Vec3::Zero()}, "m2"};
  Series& ens = report.add_series("ensembles", {"basis", "timing", "p_outcome", "probability", "collapse_p0",
                                                "collapse_p1", "standard_p0", "standard_p1", "trace_distance"});
  Series& avg = report.add_series("averaged", {"basis", "timing", "collapse_p0", "standard_p0", "standard_p1"});
  Series& sampled = report.add_series(
      "sampled", {"basis", "timing", "p_outcome", "count", "collapse_det0", "collapse_det1", "standard_det0", "standard_det1"});

  std::map<std::string, Matrix> averaged_standard;
  std::map<std::string, std::vector<Matrix>> conditional_collapse;  // by basis/timing, per P outcome
  std::size_t job = 0;
  for (const auto& basis : p.bases)
    for (const auto& timing : p.timings) {
      const std::string key = basis + "/" + timing;
      const EventLog log = detail::interferometer_log(p, basis, timing, false);
      const DensityMatrix initial = DensityMatrix::pure(log.space(), detail::bell_vector());
      Matrix mean_std = Matrix::Zero(2, 2), mean_col = Matrix::Zero(2, 2);
      std::vector<Matrix> per_outcome(2, Matrix::Zero(2, 2));
      for (const auto& b : enumerate_branches(log, initial, CollapseModel::always_on())) {
        const std::size_t k = b.trace.outcome("p");
        const Matrix col = local_state(b.trace, at_det).matrix();
        const Matrix std_qm = partial_trace(global_state(b.trace, P::readout_time), "m2").matrix();
        per_outcome[k] = col;
        mean_std += b.probability * std_qm;
        mean_col += b.probability * col;
        ens.add({basis, timing, k, number(b.probability), number(col(0, 0).real()), number(col(1, 1).real()),
                 number(std_qm(0, 0).real()), number(std_qm(1, 1).real()),
                 number(trace_distance(DensityMatrix::unchecked(HilbertSpace::qubits({"m2"}), col),
                                       DensityMatrix::unchecked(HilbertSpace::qubits({"m2"}), std_qm)))});
      }
      avg.add({basis, timing, number(mean_col(0, 0).real()), number(mean_std(0, 0).real()), number(mean_std(1, 1).real())});
      averaged_standard[key] = mean_std;
      conditional_collapse[key] = per_outcome;

      // Sampled ensembles: dynamics decides the P outcome and the standard
      // detector click; the collapse-model click is sampled from the local state.
      const EventLog full = detail::interferometer_log(p, basis, timing, true);
      std::size_t counts[2][2][2] = {};  // [p outcome][model][det]
      std::size_t totals[2] = {};
      const std::uint64_t base = derive_seed(seed, job++);
      const Observable z = Observable::diagonal({0.0, 1.0});
      for (std::size_t i = 0; i < p.runs; ++i) {
        const std::uint64_t s = derive_seed(base, i);
        const Trace t = run(full, initial, CollapseModel::always_on(), s);
        const std::size_t k = t.outcome("p");
        Rng srd_rng(s, "srd");
        const auto col = static_cast<std::size_t>(srd(t, at_det, z, srd_rng));
        ++totals[k];
        ++counts[k][0][col];
        ++counts[k][1][t.outcome("det")];
      }
      for (std::size_t k = 0; k < 2; ++k) {
        const double n = static_cast<double>(std::max<std::size_t>(totals[k], 1));
        sampled.add({basis, timing, k, totals[k], number(counts[k][0][0] / n), number(counts[k][0][1] / n),
                     number(counts[k][1][0] / n), number(counts[k][1][1] / n)});
      }
    }

  double spread = 0.0;
  const Matrix& reference = averaged_standard.begin()->second;
  for (const auto& [key, m] : averaged_standard) spread = std::max(spread, max_abs(m - reference));
  report.results["standard_average_spread"] = number(spread);
  report.check("standard QM outcome-averaged statistics identical across settings", spread <= 1e-12,
               format_double(spread));

  if (conditional_collapse.count("plusminus/before") && conditional_collapse.count("plusminus/after")) {
    const HilbertSpace q = HilbertSpace::qubits({"m2"});
    double min_td = 1.0;
    Json per = Json::array();
    for (std::size_t k = 0; k < 2; ++k) {
      const double td = trace_distance(DensityMatrix::unchecked(q, conditional_collapse["plusminus/before"][k]),
                                       DensityMatrix::unchecked(q, conditional_collapse["plusminus/after"][k]));
      per.push_back(number(td));
      min_td = std::min(min_td, td);
    }
    report.results["before_vs_after_trace_distance"] = per;
    report.check("collapse-model conditional statistics depend on timing", min_td >= 0.4, format_double(min_td));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Registry used by the command-line front end.

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::function<Json()> defaults;
  std::function<RunReport(const Json&, std::uint64_t)> run;
  bool has_precision = false;
};

inline const std::vector<ScenarioInfo>& scenario_registry() {
  static const std::vector<ScenarioInfo> registry{
      {"signalling", "Bell pair, distant measurement, state readouts at L over time",
       [] { return SignallingParams{}.json(); },
       [](const Json& j, std::uint64_t s) { return scenario_signalling(SignallingParams::read(j), s); }, true},
      {"probe", "locate a hidden collapse from the readout transition", [] { return ProbeParams{}.json(); },
       [](const Json& j, std::uint64_t s) { return scenario_probe(ProbeParams::read(j), s); }, false},
      {"collapse_test", "discriminate collapse models by which interactions switch the readout",
       [] { return CollapseTestParams{}.json(); },
       [](const Json& j, std::uint64_t s) { return scenario_collapse_test(CollapseTestParams::read(j), s); }, false},
      {"abrams_lloyd", "search with post-selection and a state readout",
       [] {
         Json j = AbramsLloydParams::with_solutions(4, {1, 7, 12}).json();
         j.erase("f");
         j["solutions"] = Json::array({1, 7, 12});
         return j;
       },
       [](const Json& j, std::uint64_t s) { return scenario_abrams_lloyd(AbramsLloydParams::read(j), s); }, true},
      {"gravcat", "gravitational cat entangled with a distant spin", [] { return GravcatParams{}.json(); },
       [](const Json& j, std::uint64_t s) { return scenario_gravcat(GravcatParams::read(j), s); }, false},
      {"interferometry", "path-entangled mass with a distant spin measured before, during or after",
       [] { return InterferometryParams{}.json(); },
       [](const Json& j, std::uint64_t s) { return scenario_interferometry(InterferometryParams::read(j), s); },
       false},
  };
  return registry;
}

inline const ScenarioInfo* find_scenario(std::string_view name) {
  for (const auto& s : scenario_registry())
    if (s.name == name) return &s;
  return nullptr;
}

}  // namespace qreadout

#endif  // QREADOUT_SCENARIOS_HPP
