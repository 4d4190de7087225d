#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qreadout/gravity.hpp"
#include "qreadout/random.hpp"

using namespace qreadout;
using Catch::Matchers::WithinAbs;

namespace {

MassConfiguration two_branch(double w0, double delta = 2.0) {
  return MassConfiguration::from_weights({Vec3::Zero(), Vec3(delta, 0, 0)}, {w0, 1.0 - w0}, 1.0, 1.0);
}

std::vector<Vec3> ring(std::size_t count, double radius, const Vec3& center) {
  std::vector<Vec3> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
    out.push_back(center + Vec3(radius * std::cos(a), radius * std::sin(a), 0.3 * std::sin(3 * a)));
  }
  return out;
}

}  // namespace

TEST_CASE("Expected mass density") {
  const auto single = mass_density_expectation(MassConfiguration::from_weights({Vec3(1, 2, 3)}, {1.0}, 5.0, 1.0));
  REQUIRE(single.size() == 1);
  CHECK(single[0].mass == 5.0);
  const auto pair = mass_density_expectation(two_branch(0.5));
  CHECK_THAT(pair[0].mass, WithinAbs(0.5, 1e-15));
  CHECK_THAT(pair[1].mass, WithinAbs(0.5, 1e-15));

  GridWavefunction grid{{Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)}, Vector::Constant(4, 0.5),
                        {1, 1, 1, 1}};
  double total = 0.0;
  for (const auto& pm : mass_density_expectation(grid)) {
    CHECK_THAT(pm.mass, WithinAbs(0.25, 1e-15));
    total += pm.mass;
  }
  CHECK_THAT(total, WithinAbs(1.0, 1e-12));
  grid.amplitudes(0) = 2.0;
  CHECK_THROWS_AS(mass_density_expectation(grid), ValidationError);
}

TEST_CASE("Newtonian potential examples") {
  CHECK_THAT(newtonian_potential(two_branch(0.5), Vec3(1, 0, 0)), WithinAbs(-1.0, 1e-15));
  const auto one = MassConfiguration::from_weights({Vec3::Zero()}, {1.0}, 1.0, 1.0);
  CHECK_THAT(newtonian_potential(one, Vec3(0, 2, 0)), WithinAbs(-0.5, 1e-15));
  CHECK_THAT(branch_potential(two_branch(0.5), 0, Vec3(-1, 0, 0)), WithinAbs(-1.0, 1e-15));
  CHECK(MassConfiguration{}.G == gravitational_constant_si);
}

TEST_CASE("Far-field assertions") {
  auto cfg = MassConfiguration::from_weights({Vec3::Zero(), Vec3(2, 0, 0)}, {0.5, 0.5}, 1.0, 1.0, 0.1);
  CHECK_THROWS_AS(newtonian_potential(cfg, Vec3(0.5, 0, 0)), FarFieldViolation);
  CHECK_NOTHROW(newtonian_potential(cfg, Vec3(1, 0, 0)));
  CHECK_THROWS_AS(newtonian_potential(cfg, Vec3::Zero()), FarFieldViolation);
  cfg.branches[0].spread = 0.5;
  CHECK_THROWS_AS(newtonian_potential(cfg, Vec3(0, 100, 0)), FarFieldViolation);
  MassConfiguration bad = two_branch(0.5);
  bad.branches[0].amplitude = 2.0;
  CHECK_THROWS_AS(newtonian_potential(bad, Vec3(1, 0, 0)), ValidationError);
}

TEST_CASE("Potential is linear in the Born weights, negative and monotone") {
  Rng rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const double w = rng.uniform();
    const auto cfg = two_branch(w, rng.uniform(0.5, 4.0));
    const Vec3 y(rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(5, 20));
    const double direct = newtonian_potential(cfg, y);
    const double mixed = w * branch_potential(cfg, 0, y) + (1 - w) * branch_potential(cfg, 1, y);
    CHECK_THAT(direct, WithinAbs(mixed, 1e-12));
    CHECK(direct < 0.0);
  }
  const auto one = MassConfiguration::from_weights({Vec3::Zero()}, {1.0}, 1.0, 1.0);
  double previous = -std::numeric_limits<double>::infinity();
  for (double r = 0.5; r < 50.0; r *= 1.3) {
    const double phi = newtonian_potential(one, Vec3(r, 0, 0));
    CHECK(phi > previous);
    previous = phi;
  }
}

TEST_CASE("Born weights from noiseless field samples") {
  const std::vector<Vec3> centers{Vec3::Zero(), Vec3(2, 0, 0)};
  const auto cfg = two_branch(0.25);
  std::vector<PotentialSample> samples;
  for (const auto& y : ring(8, 3.0, Vec3(1, 0, 0))) samples.push_back({y, newtonian_potential(cfg, y), 0.0});
  const auto fit = fit_born_weights(samples, centers, 1.0, 1.0);
  CHECK_THAT(fit.weights[0], WithinAbs(0.25, 1e-6));
  CHECK_THAT(fit.weights[1], WithinAbs(0.75, 1e-6));
  CHECK(fit.relative_residual < 1e-10);

  const auto single = MassConfiguration::from_weights({Vec3::Zero()}, {1.0}, 1.0, 1.0);
  std::vector<PotentialSample> s1{{Vec3(1, 0, 0), newtonian_potential(single, Vec3(1, 0, 0)), 0.0}};
  CHECK(estimate_born_weights(s1, {Vec3::Zero()}, 1.0, 1.0) == std::vector<double>{1.0});

  // Four branches, random weights on the simplex.
  Rng rng(31);
  const std::vector<Vec3> four{Vec3::Zero(), Vec3(3, 0, 0), Vec3(0, 3, 0), Vec3(0, 0, 3)};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> w(4);
    double sum = 0.0;
    for (auto& x : w) sum += (x = -std::log(1.0 - rng.uniform()));
    for (auto& x : w) x /= sum;
    const auto c4 = MassConfiguration::from_weights(four, w, 1.0, 1.0);
    std::vector<PotentialSample> s4;
    for (const auto& y : ring(12, 5.0, Vec3(1, 1, 1))) s4.push_back({y, newtonian_potential(c4, y), 0.0});
    for (const auto& y : ring(6, 2.0, Vec3(1, 1, -2))) s4.push_back({y, newtonian_potential(c4, y), 0.0});
    const auto est = estimate_born_weights(s4, four, 1.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK_THAT(est[i], WithinAbs(w[i], 1e-6));
  }
}

TEST_CASE("Born weights from noisy field samples") {
  const std::vector<Vec3> centers{Vec3::Zero(), Vec3(2, 0, 0)};
  const auto cfg = two_branch(0.25);
  Rng rng(2718, "gravity-noise");
  std::vector<PotentialSample> samples;
  for (const auto& y : ring(20, 3.0, Vec3(1, 0, 0))) {
    const double phi = newtonian_potential(cfg, y);
    const double sigma = 0.01 * std::abs(phi);
    samples.push_back({y, phi + sigma * rng.normal(), sigma});
  }
  const auto est = estimate_born_weights(samples, centers, 1.0, 1.0);
  CHECK_THAT(est[0], WithinAbs(0.25, 0.05));
  CHECK_THAT(est[1], WithinAbs(0.75, 0.05));
  CHECK_THAT(est[0] + est[1], WithinAbs(1.0, 1e-12));
}

TEST_CASE("Weight estimation rejects bad inputs") {
  const std::vector<Vec3> centers{Vec3::Zero(), Vec3(2, 0, 0)};
  const auto cfg = two_branch(0.5);
  std::vector<PotentialSample> one{{Vec3(1, 5, 0), newtonian_potential(cfg, Vec3(1, 5, 0)), 0.0}};
  CHECK_THROWS_AS(estimate_born_weights(one, centers, 1.0, 1.0), DegenerateGeometry);
  // Every sample equidistant from both centres: columns identical.
  std::vector<PotentialSample> plane;
  for (double z : {1.0, 2.0, 3.0}) plane.push_back({Vec3(1, 0, z), newtonian_potential(cfg, Vec3(1, 0, z)), 0.0});
  CHECK_THROWS_AS(estimate_born_weights(plane, centers, 1.0, 1.0), DegenerateGeometry);
  // Field three times stronger than any simplex weighting allows.
  std::vector<PotentialSample> strong;
  for (const auto& y : ring(6, 3.0, Vec3(1, 0, 0))) strong.push_back({y, 3.0 * newtonian_potential(cfg, y), 0.0});
  CHECK_THROWS_AS(estimate_born_weights(strong, centers, 1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(estimate_born_weights(strong, std::vector<Vec3>(17, Vec3::Zero()), 1.0, 1.0), ValidationError);
}

TEST_CASE("Schrodinger-Newton evolution with gravity off is linear evolution") {
  Rng rng(4);
  const std::size_t n = 4;
  GridWavefunction psi{{Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)}, random_pure_vector(n, rng),
                       {1, 2, 1, 3}};
  const Matrix g = random_ginibre(n, n, rng);
  const Observable h(hermitian_part(g));
  const double dt = 0.01;
  const auto out = scg_evolve(psi, h, dt, 100, {0.0, 1e-9});
  const Vector expected = evolution_operator(h.matrix(), dt * 100) * psi.amplitudes;
  CHECK((out.amplitudes - expected).norm() < 1e-10);
}

TEST_CASE("Schrodinger-Newton evolution of a single occupied site is a global phase") {
  GridWavefunction psi{{Vec3::Zero(), Vec3(1, 0, 0)}, Vector::Zero(2), {1, 1}};
  psi.amplitudes(0) = 1.0;
  const auto out = scg_evolve(psi, Observable(Matrix::Zero(2, 2)), 0.1, 50);
  CHECK_THAT(std::abs(out.amplitudes(0)), WithinAbs(1.0, 1e-12));
  CHECK(std::abs(out.amplitudes(1)) == 0.0);
}

TEST_CASE("Two-site Schrodinger-Newton phases match the closed form") {
  // Sites 1 apart, G = m = 1, H_matter = 0. The potential at each site comes
  // from the other site only: Phi_1 = -p_2, Phi_2 = -p_1, populations fixed,
  // so psi_k(t) = psi_k(0) exp(+i p_other t).
  for (const double p1 : {0.5, 0.75}) {
    const double p2 = 1.0 - p1;
    GridWavefunction psi{{Vec3::Zero(), Vec3(1, 0, 0)}, Vector(2), {1, 1}};
    psi.amplitudes << std::sqrt(p1), std::sqrt(p2);
    const double dt = 0.01;
    const std::size_t steps = 1000;
    const double t = dt * static_cast<double>(steps);
    const auto out = scg_evolve(psi, Observable(Matrix::Zero(2, 2)), dt, steps);
    CHECK_THAT(std::norm(out.amplitudes(0)), WithinAbs(p1, 1e-12));
    CHECK_THAT(std::norm(out.amplitudes(1)), WithinAbs(p2, 1e-12));
    CHECK(std::abs(out.amplitudes(0) - std::sqrt(p1) * std::polar(1.0, p2 * t)) < 1e-6);
    CHECK(std::abs(out.amplitudes(1) - std::sqrt(p2) * std::polar(1.0, p1 * t)) < 1e-6);
    // Relative phase arg(psi_2 / psi_1) drifts at (p1 - p2) t: zero when symmetric, -t/2 at (1/4, 3/4).
    const double drift = std::arg(out.amplitudes(1) / out.amplitudes(0));
    CHECK_THAT(std::remainder(drift - (p1 - p2) * t, 2 * std::numbers::pi), WithinAbs(0.0, 1e-6));
  }
}

TEST_CASE("Schrodinger-Newton evolution validates its inputs") {
  GridWavefunction psi{{Vec3::Zero(), Vec3(1, 0, 0)}, Vector::Constant(2, std::sqrt(0.5)), {1, 1}};
  CHECK_THROWS_AS(scg_evolve(psi, Observable(Matrix::Zero(3, 3)), 0.1, 1), DimensionError);
  CHECK_THROWS_AS(scg_evolve(psi, Observable(Matrix::Zero(2, 2)), 0.0, 1), ValidationError);
  psi.sites[1] = Vec3::Zero();
  CHECK_THROWS_AS(scg_evolve(psi, Observable(Matrix::Zero(2, 2)), 0.1, 1), ValidationError);
}

TEST_CASE("Schrodinger-Newton evolution preserves the norm") {
  Rng rng(17);
  GridWavefunction psi{{Vec3::Zero(), Vec3(1, 0, 0), Vec3(0, 1, 0)}, random_pure_vector(3, rng), {1, 2, 3}};
  const Observable h(hermitian_part(random_ginibre(3, 3, rng)));
  for (int k = 0; k < 200; ++k) {
    psi = scg_evolve(psi, h, 0.05, 1);
    CHECK_THAT(psi.amplitudes.norm(), WithinAbs(1.0, 1e-9));
  }
}

TEST_CASE("Branch field distinguishability") {
  const auto cfg = two_branch(0.5);
  const auto r = branch_field_distinguishability(cfg, {Vec3(-1, 0, 0)}, 1.0);
  CHECK_THAT(r.max_average_vs_branch[0], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(r.average_vs_branch[0], WithinAbs(1.0 / 3.0, 1e-15));
  CHECK_THAT(r.branch_vs_branch[0][1], WithinAbs(2.0 / 3.0, 1e-15));
  CHECK_FALSE(r.distinguishable);

  const auto sharp = branch_field_distinguishability(cfg, {Vec3(-1, 0, 0)}, 0.0);
  CHECK(std::isinf(sharp.min_ratio));
  CHECK(sharp.distinguishable);
  CHECK(branch_field_distinguishability(cfg, {Vec3(-1, 0, 0)}, 0.01).distinguishable);

  for (double delta : {1e-3, 1e-6, 1e-9}) {
    const auto tiny = branch_field_distinguishability(two_branch(0.5, delta), {Vec3(-1, 0, 0), Vec3(0, 5, 0)}, 1.0);
    CHECK(tiny.min_ratio < 2 * delta);
  }
  const auto same = branch_field_distinguishability(two_branch(0.5, 0.0), {Vec3(-1, 0, 0)}, 0.0);
  CHECK(same.min_ratio == 0.0);
  CHECK_FALSE(same.distinguishable);
}
