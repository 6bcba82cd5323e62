#include <doctest.h>

#include "support.hpp"

using namespace opfrelax;

TEST_CASE("numerical rank") {
  CHECK(numerical_rank(std::vector<double>{5, 1e-9, 0}, 1e-5) == 1);
  CHECK(numerical_rank(std::vector<double>{5, 4, 0}, 1e-5) == 2);
  CHECK(numerical_rank(std::vector<double>{0, 0}, 1e-5) == 0);
  CHECK(numerical_rank(std::vector<double>{}, 1e-5) == 0);
}

TEST_CASE("extraction from a synthetic rank-one matrix") {
  const VoltageLayout layout(2, 1);
  const Eigen::Vector3d v(1.0, 0.5, -0.2);
  for (const double sign : {1.0, -1.0}) {
    const Eigen::Vector3d u = sign * v;
    const auto out = extract_voltages(u * u.transpose(), layout, 1e-5);
    REQUIRE(out);
    CHECK(std::abs((*out)[0] - Complex(1.0, 0.0)) < 1e-14);
    CHECK(std::abs((*out)[1] - Complex(0.5, -0.2)) < 1e-14);
  }
  Eigen::Matrix3d two = v * v.transpose();
  two(2, 2) += 0.5;
  CHECK(!extract_voltages(two, layout, 1e-5));
  CHECK_THROWS_AS(extract_voltages(Eigen::Matrix2d::Identity(), layout, 1e-5), std::invalid_argument);
}

TEST_CASE("verify") {
  const NetworkCase c = builtin_case("two-bus");
  const FeasibilityReport table = verify(c, table_one::two_bus());
  CHECK(table.max_violation <= table_one::kTol);
  CHECK(std::abs(table.objective - table_one::kObjective) < table_one::kTol);

  const FeasibilityReport flat = verify(c, std::vector<Complex>{1.0, 1.0});
  CHECK(flat.max_violation == doctest::Approx(1.3 * 1.3 - 1.0));
  CHECK_FALSE(flat.feasible(1e-3));
  const auto v2 = std::find_if(flat.constraints.begin(), flat.constraints.end(),
                               [](const ConstraintResidual& r) { return r.label == "V2^2"; });
  REQUIRE(v2 != flat.constraints.end());
  CHECK(v2->equality);
  CHECK(v2->residual == doctest::Approx(1.0 - 1.69));

  NetworkCase limited = c;
  limited.branches[0].s_max = 1.0;
  const FeasibilityReport lim = verify(limited, table_one::two_bus());
  CHECK(lim.max_violation > 5.0);
  CHECK_THROWS_AS(verify(c, std::vector<Complex>{1.0}), std::invalid_argument);
}

TEST_CASE("newton from a flat start") {
  const NetworkCase two = builtin_case("two-bus");
  const NewtonResult r = newton_power_flow(two, flat_start(two));
  REQUIRE(r.converged);
  CHECK(testing::near(r.voltages[1], table_one::kV2, 1e-2));
  CHECK(verify(two, r.voltages).max_violation <= 1e-8);

  const NetworkCase three = builtin_case("three-bus");
  const NewtonResult s = newton_power_flow(three, flat_start(three));
  REQUIRE(s.converged);
  CHECK(testing::near(s.voltages[1], table_one::kV2, 1e-2));
  CHECK(testing::near(s.voltages[2], table_one::kV3, 1e-2));
  CHECK(verify(three, s.voltages).max_violation <= 1e-8);
}

TEST_CASE("newton low-voltage solution") {
  const NetworkCase two = builtin_case("two-bus");
  const NewtonResult high = newton_power_flow(two, flat_start(two));
  const NewtonResult low = newton_power_flow(two, std::vector<Complex>{1.0, std::polar(1.3, -2.0)});
  REQUIRE(low.converged);
  CHECK(std::abs(low.voltages[1] - high.voltages[1]) > 0.1);
  CHECK(verify(two, low.voltages).objective > verify(two, high.voltages).objective);
}

TEST_CASE("newton on a trivial network") {
  NetworkCase c;
  c.name = "idle";
  c.buses = {Bus{1, 0, 0, 1.0, 1.0, true}, Bus{2, 0, 0, 1.0, 1.0, false}, Bus{3, 0, 0, {}, {}, false}};
  Branch a;
  a.from = 1;
  a.to = 2;
  a.r = 0.01;
  a.x = 0.1;
  Branch b = a;
  b.from = 2;
  b.to = 3;
  c.branches = {a, b};
  c.generators = {Generator{1}, Generator{2, 0.0, 0.0}};
  const NewtonResult r = newton_power_flow(c, flat_start(c));
  CHECK(r.converged);
  CHECK(r.iterations == 0);
  for (const Complex& v : r.voltages) CHECK(v == Complex(1.0, 0.0));
}

TEST_CASE("newton preconditions and divergence") {
  NetworkCase c = builtin_case("two-bus");
  c.buses[0].v_max = 1.1;
  CHECK_THROWS_AS(newton_power_flow(c, flat_start(c)), PreconditionError);
  NetworkCase d = builtin_case("three-bus");
  d.generators[2].q_min = -1.0;
  CHECK_THROWS_AS(newton_power_flow(d, flat_start(d)), PreconditionError);

  NetworkCase heavy = builtin_case("two-bus");
  heavy.buses[1].load_p = 500.0;
  const NewtonResult r = newton_power_flow(heavy, flat_start(heavy));
  CHECK_FALSE(r.converged);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("certified relaxations") {
  SUBCASE("two-bus first order") {
    const RelaxationSolution s = solve_relaxation(build_first_order(builtin_case("two-bus")));
    REQUIRE(s.conic.optimal());
    CHECK(s.rank == 1);
    CHECK(s.exact);
    REQUIRE(s.voltages);
    CHECK(testing::near((*s.voltages)[1], table_one::kV2, 1e-2));
    REQUIRE(s.report);
    CHECK(std::abs(s.report->injections[0].imag() - table_one::kQ1) < table_one::kTol);
  }
  SUBCASE("three-bus first order") {
    const RelaxationSolution s = solve_relaxation(build_first_order(builtin_case("three-bus")));
    REQUIRE(s.conic.optimal());
    CHECK(s.rank >= 2);
    CHECK_FALSE(s.exact);
    CHECK(!s.voltages);
  }
  SUBCASE("three-bus second-order moment") {
    const RelaxationSolution s = solve_relaxation(build_moment(builtin_case("three-bus"), 2));
    REQUIRE(s.conic.optimal());
    CHECK(s.exact);
    REQUIRE(s.voltages);
    CHECK(testing::near((*s.voltages)[2], table_one::kV3, 1e-2));
    CHECK(s.eigenvalues.size() == 5);
    CHECK(s.y.size() == LiftedIndex(5, 2).num_slots());
  }
}
