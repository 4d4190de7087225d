#ifndef QREADOUT_GRAVITY_HPP
#define QREADOUT_GRAVITY_HPP

// Semi-classical Newtonian gravity in the far-field point-mass regime.
//
// The field is sourced by the expected mass density, so a superposed mass
// produces the Born-weighted sum of its branch potentials. Units: hbar = 1;
// G, masses and lengths are whatever the caller supplies (SI by default,
// G = m = 1 in most tests).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/causality.hpp"
#include "qreadout/qlinalg.hpp"

namespace qreadout {

inline constexpr double gravitational_constant_si = 6.674e-11;

struct MassBranch {
  Complex amplitude{1.0, 0.0};
  Vec3 center = Vec3::Zero();
  double spread = 0.0;
};

//! A mass m in a superposition of well-localised positions.
struct MassConfiguration {
  std::vector<MassBranch> branches;
  double mass = 1.0;
  double radius = 0.0;
  double G = gravitational_constant_si;

  static constexpr double far_field_factor = 10.0;

  //! Branches with amplitudes sqrt(w_i) (weights must sum to 1).
  static MassConfiguration from_weights(const std::vector<Vec3>& centers, const std::vector<double>& weights,
                                        double mass, double G, double spread = 0.0) {
    if (centers.size() != weights.size()) throw DimensionError("one weight per branch centre required");
    MassConfiguration cfg;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      if (weights[i] < 0.0) throw ValidationError("branch weights must be non-negative");
      cfg.branches.push_back({Complex(std::sqrt(weights[i]), 0.0), centers[i], spread});
    }
    cfg.mass = mass;
    cfg.G = G;
    cfg.validate();
    return cfg;
  }

  std::vector<double> weights() const {
    std::vector<double> w;
    for (const auto& b : branches) w.push_back(std::norm(b.amplitude));
    return w;
  }

  double max_spread() const {
    double s = 0.0;
    for (const auto& b : branches) s = std::max(s, b.spread);
    return s;
  }

  void validate() const {
    if (branches.empty()) throw ValidationError("mass configuration has no branches");
    double total = 0.0;
    for (const auto& b : branches) {
      if (!(b.spread >= 0.0) || !b.center.allFinite()) throw ValidationError("invalid branch centre or spread");
      total += std::norm(b.amplitude);
    }
    if (std::abs(total - 1.0) > 1e-10) throw ValidationError("branch amplitudes are not normalised");
    if (!(mass > 0.0) || !(radius >= 0.0) || !(G >= 0.0)) throw ValidationError("invalid mass, radius or G");
  }

  //! Size of the object and its wave packets must be small next to every
  //! nonzero branch separation.
  void require_separated_branches() const {
    const double size = std::max(max_spread(), radius);
    for (std::size_t i = 0; i < branches.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) {
        const double sep = (branches[i].center - branches[j].center).norm();
        if (sep > 0.0 && far_field_factor * size > sep)
          throw FarFieldViolation("branch separation is not large compared with spread and radius");
      }
  }

  //! Evaluation point must sit at least 10 spreads (and outside the body) from every branch.
  void require_far_field(const Vec3& y) const {
    const double limit = far_field_factor * max_spread();
    for (const auto& b : branches) {
      const double dist = (y - b.center).norm();
      if (dist <= 0.0 || dist < limit || dist <= radius)
        throw FarFieldViolation("potential evaluated within the spread of a mass branch");
    }
  }
};

struct PointMass {
  Vec3 position = Vec3::Zero();
  double mass = 0.0;
};

struct PotentialSample {
  Vec3 point = Vec3::Zero();
  double value = 0.0;
  double sigma = 0.0;
};

//! Sites, amplitudes and per-site masses of a lattice wavefunction.
struct GridWavefunction {
  std::vector<Vec3> sites;
  Vector amplitudes;
  std::vector<double> masses;

  void validate() const {
    if (sites.size() != static_cast<std::size_t>(amplitudes.size()) || sites.size() != masses.size())
      throw DimensionError("grid wavefunction arrays differ in length");
    if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw ValidationError("grid wavefunction is not normalised");
  }
};

//! <M> as point masses m |a_i|^2 at the branch centres.
inline std::vector<PointMass> mass_density_expectation(const MassConfiguration& cfg) {
  cfg.validate();
  std::vector<PointMass> out;
  for (const auto& b : cfg.branches) out.push_back({b.center, cfg.mass * std::norm(b.amplitude)});
  return out;
}

//! <M> as point masses m_i |psi_i|^2 at the lattice sites.
inline std::vector<PointMass> mass_density_expectation(const GridWavefunction& psi) {
  psi.validate();
  std::vector<PointMass> out;
  for (std::size_t i = 0; i < psi.sites.size(); ++i)
    out.push_back({psi.sites[i], psi.masses[i] * std::norm(psi.amplitudes(static_cast<Eigen::Index>(i)))});
  return out;
}

//! Phi(y) = -G m sum_i |a_i|^2 / |x_i - y|.
inline double newtonian_potential(const MassConfiguration& cfg, const Vec3& y) {
  cfg.validate();
  cfg.require_separated_branches();
  cfg.require_far_field(y);
  double phi = 0.0;
  for (const auto& b : cfg.branches) phi -= std::norm(b.amplitude) / (b.center - y).norm();
  return cfg.G * cfg.mass * phi;
}

//! Potential after collapse onto branch i: -G m / |x_i - y|.
inline double branch_potential(const MassConfiguration& cfg, std::size_t i, const Vec3& y) {
  cfg.validate();
  cfg.require_far_field(y);
  return -cfg.G * cfg.mass / (cfg.branches.at(i).center - y).norm();
}

struct WeightFit {
  std::vector<double> weights;
  double relative_residual = 0.0;
  double condition_number = 0.0;
};

struct WeightFitOptions {
  double max_condition_number = 1e8;
  //! ||K w - Phi|| / ||Phi|| above this means the data cannot come from the centres given.
  double max_relative_residual = 0.1;
};

//! Least-squares Born weights from field samples, constrained to the simplex.
//!
//! The convex problem min ||K w - Phi|| s.t. w >= 0, sum w = 1 is solved
//! exactly by checking the equality-constrained optimum on every support
//! set, so at most 16 branches are accepted. Rows are weighted by 1/sigma
//! when every sample carries a positive sigma.
inline WeightFit fit_born_weights(const std::vector<PotentialSample>& samples, const std::vector<Vec3>& centers,
                                  double G, double m, const WeightFitOptions& options = {}) {
  const std::size_t n = centers.size();
  if (n == 0 || n > 16) throw ValidationError("weight estimation supports 1 to 16 branches");
  if (samples.size() < n) throw DegenerateGeometry("fewer field samples than branches");

  const bool weighted = std::all_of(samples.begin(), samples.end(), [](const auto& s) { return s.sigma > 0.0; });
  const auto rows = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd k(rows, static_cast<Eigen::Index>(n));
  Eigen::VectorXd b(rows);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const auto& s = samples[static_cast<std::size_t>(j)];
    const double w = weighted ? 1.0 / s.sigma : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dist = (centers[i] - s.point).norm();
      if (!(dist > 0.0)) throw DegenerateGeometry("field sample placed on a branch centre");
      k(j, static_cast<Eigen::Index>(i)) = -G * m / dist * w;
    }
    b(j) = s.value * w;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(k);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(cond < options.max_condition_number)) throw DegenerateGeometry("field sample geometry is ill-conditioned");

  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_w;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<Eigen::Index> support;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (1u << i)) support.push_back(static_cast<Eigen::Index>(i));
    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd ks(rows, s);
    for (Eigen::Index c = 0; c < s; ++c) ks.col(c) = k.col(support[static_cast<std::size_t>(c)]);
    // KKT system of min ||Ks w - b||^2 s.t. 1^T w = 1.
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = 2.0 * ks.transpose() * ks;
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    Eigen::VectorXd rhs(s + 1);
    rhs.head(s) = 2.0 * ks.transpose() * b;
    rhs(s) = 1.0;
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd ws = sol.head(s);
    if (!ws.allFinite() || ws.minCoeff() < 0.0) continue;
    const double r = (ks * ws - b).norm();
    if (r < best) {
      best = r;
      best_w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      for (Eigen::Index c = 0; c < s; ++c) best_w(support[static_cast<std::size_t>(c)]) = ws(c);
    }
  }
  if (best_w.size() == 0) throw ValidationError("no feasible branch weights");

  const double rel = best / std::max(b.norm(), std::numeric_limits<double>::min());
  if (rel > options.max_relative_residual)
    throw ValidationError("field samples are inconsistent with the given branch centres");
  return {std::vector<double>(best_w.data(), best_w.data() + best_w.size()), rel, cond};
}

inline std::vector<double> estimate_born_weights(const std::vector<PotentialSample>& samples,
                                                 const std::vector<Vec3>& centers, double G, double m,
                                                 const WeightFitOptions& options = {}) {
  return fit_born_weights(samples, centers, G, m, options).weights;
}

//! Semi-classical potential at each site from all other sites' expected masses.
inline RealVector site_potentials(const GridWavefunction& psi, double G) {
  const auto n = static_cast<Eigen::Index>(psi.sites.size());
  RealVector phi = RealVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;
      const double dist = (psi.sites[static_cast<std::size_t>(j)] - psi.sites[static_cast<std::size_t>(k)]).norm();
      if (!(dist > 0.0)) throw ValidationError("grid sites coincide");
      phi(k) -= G * psi.masses[static_cast<std::size_t>(j)] * std::norm(psi.amplitudes(j)) / dist;
    }
  return phi;
}

//! exp(-i H tau) for Hermitian H.
inline Matrix evolution_operator(const Matrix& h, double tau) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian_part(h));
  const RealVector& values = solver.eigenvalues();
  Vector phases(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) phases(i) = std::polar(1.0, -values(i) * tau);
  const Matrix& v = solver.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

struct ScgOptions {
  double G = 1.0;
  double norm_tolerance = 1e-9;
};

//! Schrodinger-Newton evolution with midpoint stepping.
//!
//! Each step: Phi from psi(t), half step to psi_mid under H_matter +
//! diag(m_k Phi_k), recompute Phi from psi_mid, full step from psi(t).
inline GridWavefunction scg_evolve(GridWavefunction psi, const Observable& h_matter, double dt, std::size_t steps,
                                   const ScgOptions& options = {}) {
  psi.validate();
  if (h_matter.dimension() != psi.sites.size()) throw DimensionError("matter Hamiltonian does not match the grid");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive");

  const auto n = static_cast<Eigen::Index>(psi.sites.size());
  RealVector masses(n);
  for (Eigen::Index i = 0; i < n; ++i) masses(i) = psi.masses[static_cast<std::size_t>(i)];

  auto hamiltonian = [&](const GridWavefunction& state) {
    Matrix h = h_matter.matrix();
    const RealVector phi = site_potentials(state, options.G);
    for (Eigen::Index i = 0; i < n; ++i) h(i, i) += masses(i) * phi(i);
    return h;
  };

  for (std::size_t step = 0; step < steps; ++step) {
    const double norm_before = psi.amplitudes.norm();
    GridWavefunction mid = psi;
    mid.amplitudes = evolution_operator(hamiltonian(psi), 0.5 * dt) * psi.amplitudes;
    psi.amplitudes = evolution_operator(hamiltonian(mid), dt) * psi.amplitudes;
    if (std::abs(psi.amplitudes.norm() - norm_before) > options.norm_tolerance)
      throw StepSizeError("norm drift exceeded tolerance; reduce the time step");
  }
  return psi;
}

//! Field separations between the unconditioned configuration and each
//! post-collapse branch, and between branches, in units of sigma.
struct FieldDistinguishability {
  std::vector<double> average_vs_branch;              // max |Phi_avg - Phi_i| / sigma
  std::vector<std::vector<double>> branch_vs_branch;  // max |Phi_i - Phi_j| / sigma
  std::vector<double> max_average_vs_branch;          // unscaled differences
  double min_ratio = 0.0;
  bool distinguishable = false;

  static constexpr double threshold = 5.0;
};

inline FieldDistinguishability branch_field_distinguishability(const MassConfiguration& cfg,
                                                               const std::vector<Vec3>& sample_points, double sigma) {
  cfg.validate();
  if (sample_points.empty()) throw ValidationError("no sample points");
  if (!(sigma >= 0.0)) throw ValidationError("field noise must be non-negative");
  const std::size_t n = cfg.branches.size();
  auto ratio = [sigma](double diff) {
    if (sigma > 0.0) return diff / sigma;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  };

  FieldDistinguishability out;
  out.branch_vs_branch.assign(n, std::vector<double>(n, 0.0));
  std::vector<double> avg_diff(n, 0.0);
  std::vector<std::vector<double>> pair_diff(n, std::vector<double>(n, 0.0));
  for (const auto& y : sample_points) {
    cfg.require_far_field(y);
    double avg = 0.0;
    std::vector<double> branch(n);
    for (std::size_t i = 0; i < n; ++i) {
      branch[i] = -cfg.G * cfg.mass / (cfg.branches[i].center - y).norm();
      avg += std::norm(cfg.branches[i].amplitude) * branch[i];
    }
    for (std::size_t i = 0; i < n; ++i) {
      avg_diff[i] = std::max(avg_diff[i], std::abs(avg - branch[i]));
      for (std::size_t j = 0; j < n; ++j) pair_diff[i][j] = std::max(pair_diff[i][j], std::abs(branch[i] - branch[j]));
    }
  }
  out.max_average_vs_branch = avg_diff;
  out.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    out.average_vs_branch.push_back(ratio(avg_diff[i]));
    out.min_ratio = std::min(out.min_ratio, out.average_vs_branch.back());
    for (std::size_t j = 0; j < n; ++j) {
      out.branch_vs_branch[i][j] = ratio(pair_diff[i][j]);
      if (i != j) out.min_ratio = std::min(out.min_ratio, out.branch_vs_branch[i][j]);
    }
  }
  out.distinguishable = out.min_ratio >= FieldDistinguishability::threshold;
  return out;
}

}  // namespace qreadout

#endif  // QREADOUT_GRAVITY_HPP
