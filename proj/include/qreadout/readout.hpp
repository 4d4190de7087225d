#ifndef QREADOUT_READOUT_HPP
#define QREADOUT_READOUT_HPP

// Local-state readout devices.
//
// The local state at a spacetime point x is the initial state evolved by
// every scheduled unitary up to t_x and conditioned on exactly those recorded
// collapses lying in the closed past light cone of x, reduced to the queried
// subsystem. Collapses elsewhere are simply not applied, which is what keeps
// the devices from signalling.

#include <cstdint>
#include <optional>
#include <variant>

#include "qreadout/dynamics.hpp"

namespace qreadout {

struct LocalStateQuery {
  SpacetimeEvent event;
  std::string target;
};

struct LocalStateOptions {
  //! Fault injection for harness self-tests: condition on every collapse with
  //! frame time <= t_x, including spacelike ones. Breaks no-signalling.
  bool condition_on_spacelike = false;
};

inline DensityMatrix local_state(const Trace& trace, const LocalStateQuery& q, const LocalStateOptions& options = {}) {
  trace.log().space().index_of(q.target);
  const DensityMatrix rho = detail::replay(trace, q.event.t, [&](const MeasurementEntry& m) {
    return options.condition_on_spacelike || in_past_cone(m.event, q.event);
  });
  return partial_trace(rho, q.target);
}

struct PrecisionModel {
  enum class Kind { Infinite, Rounded, Noisy };

  Kind kind = Kind::Infinite;
  double epsilon = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  static PrecisionModel infinite() { return {}; }

  static PrecisionModel rounded(double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("rounding precision must be positive");
    return {Kind::Rounded, epsilon, 0.0, 0};
  }

  static PrecisionModel noisy(double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("noise level must be non-negative");
    return {Kind::Noisy, 0.0, sigma, seed};
  }

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Infinite:
        os << "inf";
        break;
      case Kind::Rounded:
        os << "rounded(" << epsilon << ")";
        break;
      case Kind::Noisy:
        os << "noisy(" << sigma << ")";
        break;
    }
    return os.str();
  }
};

namespace detail {
inline double round_to(double x, double eps) { return eps * std::round(x / eps) + 0.0; }

//! Nearest PSD trace-one matrix by eigenvalue clipping and renormalisation.
inline Matrix project_to_state(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(m));
  RealVector values = solver.eigenvalues().cwiseMax(0.0);
  const double total = values.sum();
  if (!(total > 0.0)) throw NumericalDegeneracy("perturbed readout has no positive spectrum");
  values /= total;
  const Matrix& v = solver.eigenvectors();
  return hermitian_part(v * values.cast<Complex>().asDiagonal() * v.adjoint());
}
}  // namespace detail

inline double apply_precision(double value, const PrecisionModel& p, Rng& noise) {
  switch (p.kind) {
    case PrecisionModel::Kind::Infinite:
      return value;
    case PrecisionModel::Kind::Rounded:
      return detail::round_to(value, p.epsilon);
    case PrecisionModel::Kind::Noisy:
      return value + p.sigma * noise.normal();
  }
  return value;
}

//! Applies a precision model to a density-matrix description.
inline Matrix apply_precision(const Matrix& m, const PrecisionModel& p, Rng& noise) {
  switch (p.kind) {
    case PrecisionModel::Kind::Infinite:
      return m;
    case PrecisionModel::Kind::Rounded: {
      Matrix out(m.rows(), m.cols());
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          out(r, c) = Complex(detail::round_to(m(r, c).real(), p.epsilon), detail::round_to(m(r, c).imag(), p.epsilon));
      return out;
    }
    case PrecisionModel::Kind::Noisy: {
      Matrix out = m;
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out(r, r) += p.sigma * noise.normal();
        for (Eigen::Index c = r + 1; c < m.cols(); ++c) {
          const Complex delta(p.sigma * noise.normal(), p.sigma * noise.normal());
          out(r, c) += delta;
          out(c, r) += std::conj(delta);
        }
      }
      return detail::project_to_state(out);
    }
  }
  return m;
}

//! What a state readout device prints: the local state in the computational
//! basis of the target. `pointer` only changes presentation.
struct ClassicalDescription {
  Matrix entries;
  bool pointer = false;
};

inline ClassicalDescription rd_state(const Trace& trace, const LocalStateQuery& q, const PrecisionModel& precision,
                                     Rng& noise) {
  return {apply_precision(local_state(trace, q).matrix(), precision, noise), false};
}

inline ClassicalDescription rd_state(const Trace& trace, const LocalStateQuery& q,
                                     const PrecisionModel& precision = PrecisionModel::infinite()) {
  Rng noise(precision.seed, "precision");
  return rd_state(trace, q, precision, noise);
}

namespace detail {
inline void require_on_target(const Observable& a, const DensityMatrix& local) {
  if (a.dimension() != local.dimension())
    throw DimensionError("observable dimension does not match the queried subsystem");
}
}  // namespace detail

inline double rd_expect(const Trace& trace, const LocalStateQuery& q, const Observable& a,
                        const PrecisionModel& precision, Rng& noise) {
  const DensityMatrix local = local_state(trace, q);
  detail::require_on_target(a, local);
  return apply_precision((a.matrix() * local.matrix()).trace().real(), precision, noise);
}

inline double rd_expect(const Trace& trace, const LocalStateQuery& q, const Observable& a,
                        const PrecisionModel& precision = PrecisionModel::infinite()) {
  Rng noise(precision.seed, "precision");
  return rd_expect(trace, q, a, precision, noise);
}

//! Born-sampled eigenvalue of `a` in the local state. `rng` must be a
//! readout stream, never the dynamics stream of the trace.
inline double srd(const Trace& trace, const LocalStateQuery& q, const Observable& a, Rng& rng) {
  const DensityMatrix local = local_state(trace, q);
  detail::require_on_target(a, local);
  const auto spaces = eigendecompose(a);
  std::vector<Matrix> projectors;
  for (const auto& s : spaces) projectors.push_back(s.projector);
  const auto p = detail::born_from_reduced(local.matrix(), projectors);
  return spaces[sample_index(p, rng.uniform())].eigenvalue;
}

using ReadoutValue = std::variant<ClassicalDescription, double>;

//! A readout device instance with its own noise and sampling streams.
class ReadoutDevice {
 public:
  static ReadoutDevice state(PrecisionModel precision = PrecisionModel::infinite(), std::uint64_t seed = 0) {
    return ReadoutDevice(DeviceKind::State, std::nullopt, precision, seed);
  }
  static ReadoutDevice expectation(Observable a, PrecisionModel precision = PrecisionModel::infinite(),
                                   std::uint64_t seed = 0) {
    return ReadoutDevice(DeviceKind::Expectation, std::move(a), precision, seed);
  }
  static ReadoutDevice stochastic_eigenvalue(Observable a, std::uint64_t seed) {
    return ReadoutDevice(DeviceKind::StochasticEigenvalue, std::move(a), PrecisionModel::infinite(), seed);
  }

  DeviceKind kind() const { return kind_; }
  const PrecisionModel& precision() const { return precision_; }

  ReadoutValue read(const Trace& trace, const LocalStateQuery& q) {
    switch (kind_) {
      case DeviceKind::State:
        return rd_state(trace, q, precision_, noise_);
      case DeviceKind::Expectation:
        return rd_expect(trace, q, *observable_, precision_, noise_);
      case DeviceKind::StochasticEigenvalue:
        return srd(trace, q, *observable_, samples_);
    }
    throw ValidationError("unknown device kind");
  }

 private:
  ReadoutDevice(DeviceKind kind, std::optional<Observable> a, PrecisionModel precision, std::uint64_t seed)
      : kind_(kind),
        observable_(std::move(a)),
        precision_(precision),
        noise_(seed ^ precision.seed, "precision"),
        samples_(seed, "srd") {}

  DeviceKind kind_;
  std::optional<Observable> observable_;
  PrecisionModel precision_;
  Rng noise_;
  Rng samples_;
};

//! {I, H, H S^dag}: rotations taking the Z, X and Y eigenbases to the computational basis.
inline std::vector<Matrix> pauli_tomography_unitaries() {
  Matrix s_dag = Matrix::Identity(2, 2);
  s_dag(1, 1) = Complex(0.0, -1.0);
  return {Matrix::Identity(2, 2), gates::hadamard(), gates::hadamard() * s_dag};
}

//! Linear-inversion tomography of the local state.
//!
//! For each unitary U_k the computational-basis outcome probabilities
//! Tr(U_k^dag |j><j| U_k rho) are obtained either exactly (expectation
//! readouts; `shots` empty) or as frequencies of `shots` stochastic
//! eigenvalue readouts of U_k^dag diag(0..d-1) U_k. The set must be
//! informationally complete.
inline DensityMatrix tomography(const Trace& trace, const LocalStateQuery& q, const std::vector<Matrix>& unitaries,
                                std::optional<std::size_t> shots, Rng& rng) {
  const std::size_t d = trace.log().space().dimension_of(q.target);
  const auto dim = static_cast<Eigen::Index>(d);
  if (unitaries.empty()) throw ValidationError("tomography needs at least one unitary");

  std::vector<Matrix> effects;
  for (const auto& u : unitaries) {
    if (u.rows() != dim || !is_unitary(u)) throw ValidationError("tomography unitary has wrong shape or is not unitary");
    for (Eigen::Index j = 0; j < dim; ++j) effects.push_back(u.adjoint().col(j) * u.adjoint().col(j).adjoint());
  }

  // Tr(E rho) = sum_{a,b} E(a,b) rho(b,a); unknowns vec(rho) indexed b*d + a.
  Matrix design(static_cast<Eigen::Index>(effects.size()), dim * dim);
  for (std::size_t k = 0; k < effects.size(); ++k)
    for (Eigen::Index a = 0; a < dim; ++a)
      for (Eigen::Index b = 0; b < dim; ++b) design(static_cast<Eigen::Index>(k), b * dim + a) = effects[k](a, b);
  Eigen::ColPivHouseholderQR<Matrix> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < dim * dim) throw ValidationError("tomography unitary set is not informationally complete");

  Vector probabilities(static_cast<Eigen::Index>(effects.size()));
  if (!shots) {
    for (std::size_t k = 0; k < effects.size(); ++k)
      probabilities(static_cast<Eigen::Index>(k)) = rd_expect(trace, q, Observable(hermitian_part(effects[k])));
  } else {
    if (*shots == 0) throw ValidationError("shot-mode tomography needs at least one shot");
    std::vector<double> labels(d);
    std::iota(labels.begin(), labels.end(), 0.0);
    for (std::size_t k = 0; k < unitaries.size(); ++k) {
      const Matrix& u = unitaries[k];
      const Observable a(hermitian_part(u.adjoint() * Observable::diagonal(labels).matrix() * u));
      std::vector<std::size_t> counts(d, 0);
      for (std::size_t s = 0; s < *shots; ++s) {
        const double value = srd(trace, q, a, rng);
        counts[static_cast<std::size_t>(std::lround(value))]++;
      }
      for (std::size_t j = 0; j < d; ++j)
        probabilities(static_cast<Eigen::Index>(k * d + j)) =
            static_cast<double>(counts[j]) / static_cast<double>(*shots);
    }
  }

  const Vector solution = qr.solve(probabilities);
  Matrix rho(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b) rho(b, a) = solution(b * dim + a);
  rho = hermitian_part(rho);
  rho /= rho.trace().real();
  if (shots) rho = detail::project_to_state(rho);
  return DensityMatrix::unchecked(HilbertSpace({{q.target, d}}), rho);
}

}  // namespace qreadout

#endif  // QREADOUT_READOUT_HPP
