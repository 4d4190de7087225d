#include <catch_amalgamated.hpp>

#include <cmath>

#include "qreadout/invariants.hpp"
#include "qreadout/nosignalling.hpp"

using namespace qreadout;
using Catch::Matchers::WithinAbs;

namespace {

NoSignallingCase bell_case(double query_time) {
  NoSignallingCase c;
  c.qubits = {{"L", Vec3::Zero(), Vec3::Zero()}, {"R", Vec3(10, 0, 0), Vec3::Zero()}};
  Vector psi = Vector::Zero(4);
  psi(0) = psi(3) = 1.0 / std::sqrt(2.0);
  c.rho = psi * psi.adjoint();
  c.measurements = {{"r", 0.0, "R", Matrix::Identity(2, 2), gates::hadamard(), 1.0}};
  c.queries = {{"L", query_time}};
  return c;
}

}  // namespace

TEST_CASE("Bell pair: Z versus X at R is invisible before the signal arrives") {
  const auto r = check_no_signalling_case(bell_case(5.0));
  CHECK(r.comparisons > 0);
  CHECK(r.max_distance <= 1e-12);
}

TEST_CASE("Bell pair: conditioning on a spacelike collapse is caught") {
  LocalStateOptions fault;
  fault.condition_on_spacelike = true;
  const auto r = check_no_signalling_case(bell_case(5.0), fault);
  CHECK_THAT(r.max_distance, WithinAbs(1.0, 1e-12));
  CHECK(r.worst.comparison == "branchwise");
}

TEST_CASE("queries inside the future cone are not compared") {
  CHECK(check_no_signalling_case(bell_case(12.0)).comparisons == 0);
}

TEST_CASE("random family shows no signalling") {
  const auto r = verify_no_signalling(60, 4, 3, 99);
  CHECK(r.cases == 60);
  CHECK(r.comparisons > 100);
  CHECK(r.max_distance <= 1e-10);
  CHECK(r.passed());
}

TEST_CASE("fault injection is detected on a random family") {
  LocalStateOptions fault;
  fault.condition_on_spacelike = true;
  const auto r = verify_no_signalling(60, 4, 3, 99, fault);
  CHECK_FALSE(r.passed());
  REQUIRE(r.worst_case);
  // The serialized counterexample replays to the same distance.
  const Json cx = r.counterexample();
  const auto replayed = NoSignallingCase::from_json(Json::parse(cx.dump())["case"]);
  CHECK_THAT(check_no_signalling_case(replayed, fault).max_distance, WithinAbs(r.max_distance, 1e-12));
}

TEST_CASE("random cases respect the generator bounds") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto c = random_no_signalling_case(rng, 4, 3);
    CHECK(c.qubits.size() >= 2);
    CHECK(c.qubits.size() <= 4);
    CHECK(c.measurements.size() >= 1);
    CHECK(c.measurements.size() <= 3);
    for (const auto& q : c.qubits) CHECK(q.velocity.norm() <= 0.8);
  }
  CHECK_THROWS_AS(random_no_signalling_case(rng, 5, 3), ParameterError);
}

TEST_CASE("chi-square merges sparse bins") {
  const auto r = chi_square_test({50, 50, 0}, {0.5, 0.4999, 0.0001});
  CHECK(r.dof == 1);
  CHECK(r.p_value > 0.5);
  const auto bad = chi_square_test({90, 10}, {0.5, 0.5});
  CHECK(bad.p_value < 1e-10);
}

TEST_CASE("invariant suite passes") {
  for (const auto& inv : run_invariant_suite(2024)) {
    INFO(inv.name << ": " << inv.detail);
    CHECK(inv.passed);
  }
}
