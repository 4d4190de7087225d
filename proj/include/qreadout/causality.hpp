#ifndef QREADOUT_CAUSALITY_HPP
#define QREADOUT_CAUSALITY_HPP

// Flat spacetime in one inertial frame, units with c = 1.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/error.hpp"

namespace qreadout {

using Vec3 = Eigen::Vector3d;

struct SpacetimeEvent {
  double t = 0.0;
  Vec3 x = Vec3::Zero();

  SpacetimeEvent() = default;
  SpacetimeEvent(double time, Vec3 position) : t(time), x(std::move(position)) {
    if (!std::isfinite(t) || !x.allFinite()) throw ValidationError("spacetime event has non-finite coordinates");
  }

  bool operator==(const SpacetimeEvent& o) const { return t == o.t && x == o.x; }
};

//! True iff y lies in the closed past light cone of x: t_x - t_y >= |x - y|.
inline bool in_past_cone(const SpacetimeEvent& y, const SpacetimeEvent& x) {
  return x.t - y.t >= (x.x - y.x).norm();
}

//! Neither event can influence the other (lightlike pairs count as causal).
inline bool spacelike_separated(const SpacetimeEvent& a, const SpacetimeEvent& b) {
  return !in_past_cone(a, b) && !in_past_cone(b, a);
}

struct TimeInterval {
  double begin = 0.0;
  double end = 0.0;

  bool degenerate() const { return begin == end; }
};

//! Piecewise-linear subluminal trajectory.
//!
//! Segment k is anchored at (start_time, start_position) and covers
//! [start_time_k, start_time_{k+1}); the first segment also extends back to
//! the domain start and the last one forward to the domain end. Domain ends
//! may be infinite.
class Worldline {
 public:
  struct Segment {
    double start_time = 0.0;
    Vec3 start_position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();
  };

  static constexpr double continuity_tolerance = 1e-9;

  Worldline(std::vector<Segment> segments, double t_begin, double t_end)
      : segments_(std::move(segments)), t_begin_(t_begin), t_end_(t_end) {
    if (segments_.empty()) throw ValidationError("worldline needs at least one segment");
    if (!(t_begin_ <= t_end_)) throw ValidationError("worldline domain is empty");
    if (t_begin_ > segments_.front().start_time)
      throw ValidationError("worldline domain starts after its first anchor");
    for (std::size_t k = 0; k < segments_.size(); ++k) {
      const auto& s = segments_[k];
      if (!std::isfinite(s.start_time) || !s.start_position.allFinite() || !s.velocity.allFinite())
        throw ValidationError("worldline segment has non-finite data");
      if (s.velocity.norm() > 1.0) throw ValidationError("worldline segment is superluminal");
      if (k == 0) continue;
      const auto& prev = segments_[k - 1];
      if (!(s.start_time > prev.start_time)) throw ValidationError("worldline segments are not time-ordered");
      const Vec3 joined = prev.start_position + prev.velocity * (s.start_time - prev.start_time);
      if ((joined - s.start_position).norm() > continuity_tolerance)
        throw ValidationError("worldline is discontinuous at a segment join");
    }
    if (segments_.size() > 1 && segments_.back().start_time > t_end_)
      throw ValidationError("worldline segment starts after the domain end");
  }

  //! At rest at `position` over the whole real line.
  static Worldline stationary(const Vec3& position) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return Worldline({{0.0, position, Vec3::Zero()}}, -inf, inf);
  }

  //! Uniform motion through `position` at time `anchor_time`.
  static Worldline uniform(const Vec3& position, const Vec3& velocity, double anchor_time = 0.0,
                           double t_begin = -std::numeric_limits<double>::infinity(),
                           double t_end = std::numeric_limits<double>::infinity()) {
    return Worldline({{anchor_time, position, velocity}}, std::min(t_begin, anchor_time), t_end);
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double t_begin() const { return t_begin_; }
  double t_end() const { return t_end_; }
  bool covers(double t) const { return t >= t_begin_ && t <= t_end_; }

  Vec3 position_at(double t) const {
    if (!covers(t)) throw DomainError("time outside worldline domain");
    const auto& s = segments_[segment_index(t)];
    return s.start_position + s.velocity * (t - s.start_time);
  }

  SpacetimeEvent event_at(double t) const { return {t, position_at(t)}; }

  //! Time range [lo, hi] covered by segment k (ends may be infinite).
  std::pair<double, double> segment_range(std::size_t k) const {
    const double lo = k == 0 ? t_begin_ : segments_[k].start_time;
    const double hi = k + 1 == segments_.size() ? t_end_ : segments_[k + 1].start_time;
    return {lo, hi};
  }

 private:
  std::size_t segment_index(double t) const {
    std::size_t k = 0;
    while (k + 1 < segments_.size() && segments_[k + 1].start_time <= t) ++k;
    return k;
  }

  std::vector<Segment> segments_;
  double t_begin_;
  double t_end_;
};

inline Vec3 position_at(const Worldline& w, double t) { return w.position_at(t); }

//! Times at which `w` crosses the boundary of the past light cone of
//! `transition`, i.e. solutions of T - t = |x(t) - X| with t <= T.
//!
//! A subluminal worldline crosses at most once; a lightlike segment running
//! along the cone yields a non-degenerate interval. Returns nullopt when the
//! worldline never meets the cone boundary inside its domain.
inline std::optional<TimeInterval> collapse_locus(const Worldline& w, const SpacetimeEvent& transition) {
  constexpr double eps = 1e-12;
  std::vector<double> hits;

  for (std::size_t k = 0; k < w.segments().size(); ++k) {
    const auto& seg = w.segments()[k];
    const auto [lo, hi] = w.segment_range(k);
    // tau measured from the segment anchor; p(tau) = X + u + v tau.
    const Vec3 u = seg.start_position - transition.x;
    const Vec3& v = seg.velocity;
    const double big_a = transition.t - seg.start_time;
    const double scale = 1.0 + std::abs(big_a) + u.norm();
    const double qa = 1.0 - v.squaredNorm();
    const double qb = big_a + u.dot(v);  // equation: qa tau^2 - 2 qb tau + qc = 0
    const double qc = big_a * big_a - u.squaredNorm();

    const double tau_lo = lo - seg.start_time;
    const double tau_hi = std::min(hi, transition.t) - seg.start_time;
    if (tau_lo > tau_hi + eps * scale) continue;

    std::vector<double> roots;
    if (std::abs(qa) <= eps) {
      if (std::abs(qb) <= eps * scale) {
        if (std::abs(qc) <= eps * scale * scale) {
          // Lightlike segment lying on the cone: every time in range qualifies.
          hits.push_back(seg.start_time + tau_lo);
          hits.push_back(seg.start_time + tau_hi);
        }
        continue;
      }
      roots.push_back(qc / (2.0 * qb));
    } else {
      const double disc = qb * qb - qa * qc;
      if (disc < -eps * scale * scale) continue;
      const double sq = std::sqrt(std::max(disc, 0.0));
      // Stable pair: q = qb + sign(qb) sq; roots q / qa and qc / q.
      const double q = qb + std::copysign(sq, qb);
      roots.push_back(q / qa);
      if (q != 0.0) roots.push_back(qc / q);
    }

    for (double tau : roots) {
      if (!std::isfinite(tau)) continue;
      if (tau < tau_lo - eps * scale || tau > tau_hi + eps * scale) continue;
      tau = std::clamp(tau, tau_lo, tau_hi);
      const double t = seg.start_time + tau;
      const double residual = (transition.t - t) - (u + v * tau).norm();
      if (transition.t - t < -eps * scale) continue;
      if (std::abs(residual) > 1e-9 * scale) continue;
      hits.push_back(t);
    }
  }

  if (hits.empty()) return std::nullopt;
  const auto [mn, mx] = std::minmax_element(hits.begin(), hits.end());
  return TimeInterval{*mn, *mx};
}

}  // namespace qreadout

#endif  // QREADOUT_CAUSALITY_HPP
