#ifndef QREADOUT_INVARIANTS_HPP
#define QREADOUT_INVARIANTS_HPP

// Property checks run by `verify` next to the no-signalling search.

#include <boost/math/distributions/chi_squared.hpp>
#include <string>
#include <vector>

#include "qreadout/nosignalling.hpp"
#include "qreadout/readout.hpp"
#include "qreadout/report.hpp"

namespace qreadout {

struct InvariantResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
};

//! Pearson test of `counts` against `probabilities`. Adjacent bins are
//! merged, smallest expectation first, until each expects at least 5.
inline ChiSquareResult chi_square_test(const std::vector<std::size_t>& counts, const std::vector<double>& probabilities) {
  if (counts.size() != probabilities.size() || counts.empty()) throw DimensionError("counts and probabilities differ in size");
  double n = 0.0;
  for (auto c : counts) n += static_cast<double>(c);
  std::vector<double> observed, expected;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    observed.push_back(static_cast<double>(counts[i]));
    expected.push_back(n * probabilities[i]);
  }
  while (expected.size() > 1) {
    const auto it = std::min_element(expected.begin(), expected.end());
    if (*it >= 5.0) break;
    const auto i = static_cast<std::size_t>(it - expected.begin());
    const std::size_t j = i + 1 < expected.size() ? i + 1 : i - 1;
    expected[j] += expected[i];
    observed[j] += observed[i];
    expected.erase(expected.begin() + static_cast<std::ptrdiff_t>(i));
    observed.erase(observed.begin() + static_cast<std::ptrdiff_t>(i));
  }
  ChiSquareResult r;
  if (expected.size() < 2) return r;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double diff = observed[i] - expected[i];
    r.statistic += diff * diff / expected[i];
  }
  r.dof = expected.size() - 1;
  const boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

struct BornStatisticsCase {
  std::string sampler;  // "srd" or "measurement"
  std::size_t dimension = 2;
  std::vector<double> probabilities;
  std::vector<std::size_t> counts;
  ChiSquareResult test;
};

//! Random qudit states and bases; srd samples and measurement outcomes are
//! compared with (U^dag rho U)_kk from the basis the case was built from.
inline std::vector<BornStatisticsCase> born_statistics(std::size_t cases, std::size_t samples, std::uint64_t seed) {
  std::vector<BornStatisticsCase> out;
  const Rng family(seed, "born-statistics");
  for (std::size_t i = 0; i < cases; ++i) {
    Rng rng = family.split(i);
    BornStatisticsCase c;
    c.sampler = i % 2 == 0 ? "srd" : "measurement";
    c.dimension = 2 + i % 3;
    const auto d = static_cast<Eigen::Index>(c.dimension);
    const HilbertSpace space(std::vector<Subsystem>{{"q", c.dimension}});
    const DensityMatrix rho = random_density_matrix(space, rng);
    const Matrix u = random_unitary(c.dimension, rng);
    const Matrix in_basis = u.adjoint() * rho.matrix() * u;
    for (Eigen::Index k = 0; k < d; ++k) c.probabilities.push_back(in_basis(k, k).real());
    c.counts.assign(c.dimension, 0);

    EventLog log({{"q", Worldline::stationary(Vec3::Zero()), c.dimension}});
    if (c.sampler == "srd") {
      Matrix diag = Matrix::Zero(d, d);
      for (Eigen::Index k = 0; k < d; ++k) diag(k, k) = static_cast<double>(k);
      const Observable a(u * diag * u.adjoint());
      const Trace trace = run(log, rho, CollapseModel::always_on(), rng.next_u64());
      const LocalStateQuery q{{1.0, Vec3::Zero()}, "q"};
      Rng sampler(seed ^ i, "srd");
      for (std::size_t s = 0; s < samples; ++s) ++c.counts[static_cast<std::size_t>(std::llround(srd(trace, q, a, sampler)))];
    } else {
      log.add_measurement(1.0, "q", basis_projectors(u), "m", {1.0, "apparatus"});
      const std::uint64_t base = rng.next_u64();
      for (std::size_t s = 0; s < samples; ++s)
        ++c.counts[run(log, rho, CollapseModel::always_on(), derive_seed(base, s)).outcome("m")];
    }
    c.test = chi_square_test(c.counts, c.probabilities);
    out.push_back(std::move(c));
  }
  return out;
}

inline std::vector<InvariantResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<InvariantResult> out;

  {
    const auto born = born_statistics(20, 10000, seed);
    double worst = 1.0;
    for (const auto& c : born) worst = std::min(worst, c.test.p_value);
    out.push_back({"Born statistics chi-square p > 0.01 (20 cases, N=10^4)", worst > 0.01,
                   "smallest p = " + format_double(worst)});
  }

  {
    bool ok = true;
    double worst_trace = 0.0, worst_herm = 0.0, worst_eig = 0.0, worst_sum = 0.0;
    bool reproducible = true;
    const Rng family(seed, "invariant-cases");
    for (std::size_t i = 0; i < 50; ++i) {
      Rng rng = family.split(i);
      const NoSignallingCase c = random_no_signalling_case(rng, 4, 3);
      const EventLog log = c.log();
      const DensityMatrix rho = c.initial(log);
      const Trace a = run(log, rho, c.model(), derive_seed(seed, i));
      const Trace b = run(log, rho, c.model(), derive_seed(seed, i));
      reproducible = reproducible && a.outcomes() == b.outcomes() && a.final_state().matrix() == b.final_state().matrix();
      double total = 0.0;
      for (const auto& br : enumerate_branches(log, rho, c.model(), 0.0)) total += br.probability;
      worst_sum = std::max(worst_sum, std::abs(total - 1.0));
      for (const auto& q : c.queries) {
        const Matrix m = local_state(a, {c.query_event(log, q), q.target}).matrix();
        worst_trace = std::max(worst_trace, std::abs(m.trace().real() - 1.0));
        worst_herm = std::max(worst_herm, max_abs(m - m.adjoint()));
        worst_eig = std::min(worst_eig, Eigen::SelfAdjointEigenSolver<Matrix>(m).eigenvalues().minCoeff());
      }
    }
    ok = worst_trace <= 1e-12 && worst_herm <= 1e-12 && worst_eig >= -1e-12;
    out.push_back({"local states are density matrices", ok,
                   "trace " + format_double(worst_trace) + ", hermiticity " + format_double(worst_herm) +
                       ", min eigenvalue " + format_double(worst_eig)});
    out.push_back({"runs reproduce under a fixed seed", reproducible, ""});
    out.push_back({"branch probabilities sum to 1", worst_sum <= 1e-10, format_double(worst_sum)});
  }

  {
    bool ok = true;
    std::string detail;
    for (double d : {1.0, 10.0, 100.0}) {
      EventLog log({{"L", Worldline::stationary(Vec3::Zero()), 2}, {"R", Worldline::stationary(Vec3(d, 0, 0)), 2}});
      log.add_measurement(0.0, "R", computational_projectors(2), "r", {1.0, "apparatus"});
      Vector psi = Vector::Zero(4);
      psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
      const Trace t = run(log, DensityMatrix::pure(log.space(), psi), CollapseModel::always_on(), derive_seed(seed, 7));
      const Matrix half = Matrix::Identity(2, 2) / 2.0;
      const Matrix before = local_state(t, {{std::nextafter(d, 0.0), Vec3::Zero()}, "L"}).matrix();
      const Matrix at = local_state(t, {{d, Vec3::Zero()}, "L"}).matrix();
      const Matrix expected = computational_projectors(2)[t.outcome("r")];
      const bool good = max_abs(before - half) <= 1e-12 && max_abs(at - expected) <= 1e-12;
      ok = ok && good;
      if (!good) detail += "d=" + format_double(d) + " ";
    }
    out.push_back({"readout switches exactly at distance d", ok, detail});
  }
  return out;
}

}  // namespace qreadout

#endif  // QREADOUT_INVARIANTS_HPP
