#ifndef QREADOUT_DYNAMICS_HPP
#define QREADOUT_DYNAMICS_HPP

// Event logs and their execution under a collapse model.
//
// A run walks the log in frame-time order. Collapsing measurements sample an
// outcome by the Born rule and project; measurements the model rejects only
// dephase their target. The resulting Trace records every outcome and is the
// single source of truth for later state queries (global_state here,
// light-cone-restricted local states in readout.hpp).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "qreadout/causality.hpp"
#include "qreadout/qlinalg.hpp"
#include "qreadout/random.hpp"

namespace qreadout {

//! What a measurement-like interaction couples the system to.
struct Interaction {
  double amplified_mass = 0.0;  // kg
  std::string agent = "apparatus";
};

struct SubsystemPlacement {
  std::string label;
  Worldline worldline = Worldline::stationary(Vec3::Zero());
  std::size_t dimension = 2;
};

struct UnitaryEntry {
  double time = 0.0;
  std::vector<std::string> targets;
  Matrix matrix;
};

struct MeasurementEntry {
  SpacetimeEvent event;
  std::string target;
  std::vector<Matrix> projectors;
  std::string tag;
  Interaction interaction;
};

enum class DeviceKind { State, Expectation, StochasticEigenvalue };

struct ReadoutQueryEntry {
  SpacetimeEvent event;
  std::string target;
  DeviceKind device = DeviceKind::State;
};

using LogEntry = std::variant<UnitaryEntry, MeasurementEntry, ReadoutQueryEntry>;

inline double frame_time(const LogEntry& e) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, UnitaryEntry>)
          return v.time;
        else
          return v.event.t;
      },
      e);
}

//! Time-ordered schedule of operations on a set of placed subsystems.
class EventLog {
 public:
  static constexpr double placement_tolerance = 1e-9;

  EventLog() = default;

  explicit EventLog(std::vector<SubsystemPlacement> placements) : placements_(std::move(placements)) {
    std::vector<Subsystem> subs;
    for (const auto& p : placements_) subs.push_back({p.label, p.dimension});
    space_ = HilbertSpace(std::move(subs));
  }

  const HilbertSpace& space() const { return space_; }
  const std::vector<SubsystemPlacement>& placements() const { return placements_; }
  const std::vector<LogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  const SubsystemPlacement& placement(std::string_view label) const {
    return placements_[space_.index_of(label)];
  }

  //! Validates `entry` and inserts it after every entry with frame time <= its own.
  EventLog& add(LogEntry entry) {
    std::visit([this](auto& v) { validate(v); }, entry);
    const double t = frame_time(entry);
    auto pos = std::upper_bound(entries_.begin(), entries_.end(), t,
                                [](double value, const LogEntry& e) { return value < frame_time(e); });
    entries_.insert(pos, std::move(entry));
    return *this;
  }

  EventLog& add_unitary(double time, std::vector<std::string> targets, Matrix u) {
    return add(UnitaryEntry{time, std::move(targets), std::move(u)});
  }

  //! Measurement on `target` at time t, located on the target's worldline.
  EventLog& add_measurement(double t, std::string target, std::vector<Matrix> projectors, std::string tag = {},
                            Interaction interaction = {}) {
    const SpacetimeEvent ev{t, placement(target).worldline.position_at(t)};
    return add(MeasurementEntry{ev, std::move(target), std::move(projectors), std::move(tag), std::move(interaction)});
  }

  //! Copy of this log with the measurement tagged `tag` removed.
  EventLog without(std::string_view tag) const {
    EventLog out = *this;
    out.entries_.erase(out.find(tag));
    return out;
  }

  //! Copy of this log with the measurement tagged `tag` using another basis.
  EventLog with_projectors(std::string_view tag, std::vector<Matrix> projectors) const {
    EventLog out = *this;
    auto it = out.find(tag);
    auto& m = std::get<MeasurementEntry>(*it);
    require_projective_family(projectors);
    if (projectors.front().rows() != m.projectors.front().rows())
      throw DimensionError("replacement projectors have the wrong dimension");
    m.projectors = std::move(projectors);
    return out;
  }

  const MeasurementEntry& measurement(std::string_view tag) const {
    return std::get<MeasurementEntry>(entries_[index_of(tag)]);
  }

  std::size_t index_of(std::string_view tag) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (const auto* m = std::get_if<MeasurementEntry>(&entries_[i]); m && m->tag == tag) return i;
    throw LabelError("no measurement tagged '" + std::string(tag) + "'");
  }

 private:
  std::vector<LogEntry>::iterator find(std::string_view tag) {
    return entries_.begin() + static_cast<std::ptrdiff_t>(index_of(tag));
  }

  void validate(UnitaryEntry& u) const {
    if (!std::isfinite(u.time)) throw ValidationError("unitary time is not finite");
    if (detail::product_dimension(space_, u.targets) != static_cast<std::size_t>(u.matrix.rows()))
      throw DimensionError("unitary dimension does not match its targets");
    SubsystemSplit(space_, u.targets);  // rejects unknown or repeated labels
    if (!is_unitary(u.matrix)) throw ValidationError("scheduled operator is not unitary");
  }

  void validate(MeasurementEntry& m) const {
    const auto& p = placement(m.target);
    if (!p.worldline.covers(m.event.t))
      throw ValidationError("measurement time lies outside the target worldline domain");
    if ((p.worldline.position_at(m.event.t) - m.event.x).norm() > placement_tolerance)
      throw ValidationError("measurement event is off the worldline of '" + m.target + "'");
    require_projective_family(m.projectors);
    if (static_cast<std::size_t>(m.projectors.front().rows()) != p.dimension)
      throw DimensionError("projector dimension does not match subsystem '" + m.target + "'");
    std::size_t count = 0;
    for (const auto& e : entries_)
      if (const auto* other = std::get_if<MeasurementEntry>(&e)) {
        ++count;
        if (!m.tag.empty() && other->tag == m.tag) throw LabelError("duplicate measurement tag '" + m.tag + "'");
      }
    while (m.tag.empty()) {
      std::string candidate = "m" + std::to_string(count++);
      const bool taken = std::any_of(entries_.begin(), entries_.end(), [&](const LogEntry& e) {
        const auto* other = std::get_if<MeasurementEntry>(&e);
        return other && other->tag == candidate;
      });
      if (!taken) m.tag = std::move(candidate);
    }
  }

  void validate(ReadoutQueryEntry& q) const { space_.index_of(q.target); }

  std::vector<SubsystemPlacement> placements_;
  HilbertSpace space_;
  std::vector<LogEntry> entries_;
};

inline EventLog schedule(EventLog log, LogEntry entry) {
  log.add(std::move(entry));
  return log;
}

//! Rule deciding which measurement-like interactions cause objective collapse.
class CollapseModel {
 public:
  enum class Kind { AlwaysOn, MassThreshold, ObserverTagged, Custom };
  using Predicate = std::function<bool(const Interaction&)>;

  static CollapseModel always_on() { return CollapseModel(Kind::AlwaysOn); }

  static CollapseModel mass_threshold(double critical_mass) {
    if (!(critical_mass >= 0.0)) throw ValidationError("critical mass must be non-negative");
    CollapseModel m(Kind::MassThreshold);
    m.critical_mass_ = critical_mass;
    return m;
  }

  static CollapseModel observer_tagged(std::set<std::string> agents) {
    CollapseModel m(Kind::ObserverTagged);
    m.agents_ = std::move(agents);
    return m;
  }

  static CollapseModel custom(std::string name, Predicate predicate) {
    CollapseModel m(Kind::Custom);
    m.name_ = std::move(name);
    m.predicate_ = std::move(predicate);
    return m;
  }

  Kind kind() const { return kind_; }
  double critical_mass() const { return critical_mass_; }
  const std::set<std::string>& agents() const { return agents_; }

  bool decides(const Interaction& i) const {
    switch (kind_) {
      case Kind::AlwaysOn:
        return true;
      case Kind::MassThreshold:
        return i.amplified_mass >= critical_mass_;
      case Kind::ObserverTagged:
        return agents_.count(i.agent) > 0;
      case Kind::Custom:
        return predicate_(i);
    }
    return false;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::AlwaysOn:
        return "always-on";
      case Kind::MassThreshold: {
        std::ostringstream os;
        os << "mass-threshold(" << critical_mass_ << ")";
        return os.str();
      }
      case Kind::ObserverTagged: {
        std::string s = "observer-tagged{";
        bool first = true;
        for (const auto& a : agents_) {
          s += (first ? "" : ",") + a;
          first = false;
        }
        return s + "}";
      }
      case Kind::Custom:
        return "custom(" + name_ + ")";
    }
    return "unknown";
  }

 private:
  explicit CollapseModel(Kind k) : kind_(k) {}

  Kind kind_;
  double critical_mass_ = 0.0;
  std::set<std::string> agents_;
  std::string name_;
  Predicate predicate_;
};

inline bool decides_collapse(const CollapseModel& model, const Interaction& interaction) {
  return model.decides(interaction);
}

struct MeasurementRecord {
  std::size_t entry_index = 0;
  std::string tag;
  std::size_t outcome = 0;
  double probability = 0.0;  // Born probability of `outcome` when it was sampled
  bool collapsed = false;
};

//! Immutable result of executing an EventLog.
class Trace {
 public:
  Trace(EventLog log, DensityMatrix initial, CollapseModel model, std::uint64_t seed,
        std::vector<MeasurementRecord> records, DensityMatrix final_state)
      : log_(std::move(log)),
        initial_(std::move(initial)),
        model_(std::move(model)),
        seed_(seed),
        records_(std::move(records)),
        final_(std::move(final_state)) {
    for (const auto& r : records_) outcomes_[r.tag] = r.outcome;
  }

  const EventLog& log() const { return log_; }
  const DensityMatrix& initial() const { return initial_; }
  const CollapseModel& model() const { return model_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<MeasurementRecord>& records() const { return records_; }
  const std::map<std::string, std::size_t>& outcomes() const { return outcomes_; }
  const DensityMatrix& final_state() const { return final_; }

  std::size_t outcome(std::string_view tag) const {
    auto it = outcomes_.find(std::string(tag));
    if (it == outcomes_.end()) throw LabelError("no outcome recorded for '" + std::string(tag) + "'");
    return it->second;
  }

  const MeasurementRecord* record_for_entry(std::size_t entry_index) const {
    for (const auto& r : records_)
      if (r.entry_index == entry_index) return &r;
    return nullptr;
  }

  //! Spacetime events of all recorded collapses, in log order.
  std::vector<std::pair<std::string, SpacetimeEvent>> collapse_events() const {
    std::vector<std::pair<std::string, SpacetimeEvent>> out;
    for (const auto& r : records_)
      if (r.collapsed)
        out.emplace_back(r.tag, std::get<MeasurementEntry>(log_.entries()[r.entry_index]).event);
    return out;
  }

 private:
  EventLog log_;
  DensityMatrix initial_;
  CollapseModel model_;
  std::uint64_t seed_;
  std::vector<MeasurementRecord> records_;
  std::map<std::string, std::size_t> outcomes_;
  DensityMatrix final_;
};

namespace detail {

inline DensityMatrix apply(const UnitaryEntry& u, const DensityMatrix& rho) {
  const SubsystemSplit split(rho.space(), u.targets);
  return DensityMatrix::unchecked(rho.space(), hermitian_part(conjugate(u.matrix, rho.matrix(), split)));
}

inline DensityMatrix dephase(const MeasurementEntry& m, const DensityMatrix& rho) {
  const SubsystemSplit split(rho.space(), std::span<const std::string>(&m.target, 1));
  Matrix out = Matrix::Zero(rho.matrix().rows(), rho.matrix().cols());
  for (const auto& p : m.projectors) out += conjugate(p, rho.matrix(), split);
  return DensityMatrix::unchecked(rho.space(), hermitian_part(out));
}

//! P rho P / Tr(P rho); throws when the conditioning probability underflows.
inline DensityMatrix condition(const MeasurementEntry& m, std::size_t outcome, const DensityMatrix& rho,
                               double* probability = nullptr) {
  const SubsystemSplit split(rho.space(), std::span<const std::string>(&m.target, 1));
  Matrix projected = conjugate(m.projectors.at(outcome), rho.matrix(), split);
  const double p = projected.trace().real();
  if (probability) *probability = p;
  if (!(p >= tol::conditioning))
    throw NumericalDegeneracy("conditioning on outcome " + std::to_string(outcome) + " of '" + m.tag +
                              "' with probability below 1e-15");
  return DensityMatrix::unchecked(rho.space(), hermitian_part(projected / p));
}

inline std::vector<double> outcome_probabilities(const MeasurementEntry& m, const DensityMatrix& rho) {
  const SubsystemSplit split(rho.space(), std::span<const std::string>(&m.target, 1));
  return born_from_reduced(reduce(rho.matrix(), split), m.projectors);
}

inline void require_matching(const EventLog& log, const DensityMatrix& initial) {
  if (!(log.space() == initial.space())) throw DimensionError("initial state space does not match the log");
}

//! Re-evolves a trace up to frame time `t_cut`, conditioning recorded
//! collapses for which `include(entry)` holds and skipping the others.
template <class Include>
DensityMatrix replay(const Trace& trace, double t_cut, Include include) {
  DensityMatrix rho = trace.initial();
  const auto& entries = trace.log().entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (frame_time(entries[i]) > t_cut) break;
    if (const auto* u = std::get_if<UnitaryEntry>(&entries[i])) {
      rho = apply(*u, rho);
    } else if (const auto* m = std::get_if<MeasurementEntry>(&entries[i])) {
      const MeasurementRecord* rec = trace.record_for_entry(i);
      if (!rec->collapsed)
        rho = dephase(*m, rho);
      else if (include(*m))
        rho = condition(*m, rec->outcome, rho);
    }
  }
  return rho;
}

}  // namespace detail

//! Executes `log` from `initial`; each measurement consumes exactly one
//! uniform draw from the "dynamics" stream of `seed`, in log order.
inline Trace run(const EventLog& log, const DensityMatrix& initial, const CollapseModel& model, std::uint64_t seed) {
  detail::require_matching(log, initial);
  Rng rng(seed, "dynamics");
  DensityMatrix rho = initial;
  std::vector<MeasurementRecord> records;
  const auto& entries = log.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (const auto* u = std::get_if<UnitaryEntry>(&entries[i])) {
      rho = detail::apply(*u, rho);
    } else if (const auto* m = std::get_if<MeasurementEntry>(&entries[i])) {
      const bool collapses = model.decides(m->interaction);
      const auto p = detail::outcome_probabilities(*m, rho);
      const std::size_t k = sample_index(p, rng.uniform());
      if (collapses) {
        if (p[k] < tol::conditioning)
          throw NumericalDegeneracy("sampled branch of '" + m->tag + "' has probability below 1e-15");
        rho = detail::condition(*m, k, rho);
      } else {
        rho = detail::dephase(*m, rho);
      }
      records.push_back({i, m->tag, k, p[k], collapses});
    }
  }
  return Trace(log, initial, model, seed, std::move(records), std::move(rho));
}

struct Branch {
  Trace trace;
  double probability = 0.0;
};

//! Every outcome history of `log` with its Born probability (histories
//! below `min_probability` are dropped). Probabilities sum to 1 up to the
//! dropped mass.
inline std::vector<Branch> enumerate_branches(const EventLog& log, const DensityMatrix& initial,
                                              const CollapseModel& model, double min_probability = 1e-15) {
  detail::require_matching(log, initial);
  std::vector<Branch> out;
  const auto& entries = log.entries();
  std::vector<MeasurementRecord> records;

  std::function<void(std::size_t, const DensityMatrix&, double)> descend = [&](std::size_t i, const DensityMatrix& rho,
                                                                               double weight) {
    if (i == entries.size()) {
      out.push_back({Trace(log, initial, model, 0, records, rho), weight});
      return;
    }
    if (const auto* u = std::get_if<UnitaryEntry>(&entries[i])) {
      descend(i + 1, detail::apply(*u, rho), weight);
    } else if (const auto* m = std::get_if<MeasurementEntry>(&entries[i])) {
      const bool collapses = model.decides(m->interaction);
      const auto p = detail::outcome_probabilities(*m, rho);
      const DensityMatrix dephased = collapses ? rho : detail::dephase(*m, rho);
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (weight * p[k] < min_probability || p[k] < tol::conditioning) continue;
        records.push_back({i, m->tag, k, p[k], collapses});
        descend(i + 1, collapses ? detail::condition(*m, k, rho) : dephased, weight * p[k]);
        records.pop_back();
      }
    } else {
      descend(i + 1, rho, weight);
    }
  };
  descend(0, initial, 1.0);
  return out;
}

//! The fully conditioned state at frame time t: all unitaries and all
//! recorded collapses with time <= t applied.
inline DensityMatrix global_state(const Trace& trace, double t) {
  return detail::replay(trace, t, [](const MeasurementEntry&) { return true; });
}

}  // namespace qreadout

#endif  // QREADOUT_DYNAMICS_HPP
