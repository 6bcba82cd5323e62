#include <doctest.h>

#include <random>
#include <string>

#include "support.hpp"

using namespace opfrelax;

namespace {

NetworkCase single_branch(double r, double x, double tau = 1.0) {
  NetworkCase c;
  c.name = "unit";
  c.buses = {Bus{1, 0, 0, 1.0, 1.0, true}, Bus{2, 0, 0, {}, {}, false}};
  Branch br;
  br.from = 1;
  br.to = 2;
  br.r = r;
  br.x = x;
  br.tau = tau;
  c.branches = {br};
  return c;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  text.replace(text.find(from), from.size(), to);
  return text;
}

}  // namespace

TEST_CASE("bundled two-bus case") {
  const NetworkCase c = builtin_case("two-bus");
  CHECK(c.num_buses() == 2);
  REQUIRE(c.branches.size() == 1);
  CHECK(c.branches[0].r == doctest::Approx(0.06129));
  CHECK(c.branches[0].x == doctest::Approx(0.05117));
  CHECK(*c.bus(2).v_min == 1.3);
  CHECK(*c.bus(2).v_max == 1.3);
  const Generator* g = c.generator_at(2);
  REQUIRE(g != nullptr);
  CHECK(*g->p_min == 0.0);
  CHECK(*g->p_max == 0.0);
  CHECK(c.reference_bus() == 1);
}

TEST_CASE("bundled three-bus case") {
  const NetworkCase c = builtin_case("three-bus");
  CHECK(c.num_buses() == 3);
  REQUIRE(c.branches.size() == 3);
  const double expected[3][4] = {{1, 2, 0.15, 0.1}, {1, 3, 0.1, 0.05}, {2, 3, 0.001, 0.05}};
  for (int i = 0; i < 3; ++i) {
    CHECK(c.branches[i].from == expected[i][0]);
    CHECK(c.branches[i].to == expected[i][1]);
    CHECK(c.branches[i].r == doctest::Approx(expected[i][2]));
    CHECK(c.branches[i].x == doctest::Approx(expected[i][3]));
  }
}

TEST_CASE("case documents round-trip and reject bad input") {
  const NetworkCase c = builtin_case("three-bus");
  const std::string doc = dump_case(c);
  const NetworkCase back = load_case(doc);
  CHECK(back.num_buses() == 3);
  CHECK(back.branches[2].r == c.branches[2].r);
  CHECK(dump_case(back) == doc);

  const std::string raw(builtin_case_document("three-bus"));
  CHECK_THROWS_AS(load_case(replace(raw, "\"to\": 3, \"r\": 0.001", "\"to\": 9, \"r\": 0.001")), ValidationError);
  CHECK_THROWS_AS(load_case(replace(raw, "\"reference\": true", "\"reference\": false")), ValidationError);
  CHECK_THROWS_AS(load_case("{\"name\": \"x\", \"buses\": ["), ParseError);
  CHECK_THROWS_AS(load_case("{\"name\": \"x\", \"buses\": 3}"), ParseError);
  CHECK_THROWS_AS(builtin_case("four-bus"), std::out_of_range);
}

TEST_CASE("admittance of a unit branch") {
  const ComplexMatrix y = admittance_matrix(single_branch(1.0, 0.0));
  CHECK(y(0, 0) == Complex(1, 0));
  CHECK(y(0, 1) == Complex(-1, 0));
  CHECK(y(1, 0) == Complex(-1, 0));
  CHECK(y(1, 1) == Complex(1, 0));
}

TEST_CASE("admittance of the two-bus branch") {
  const Complex expected = 1.0 / Complex(0.06129, 0.05117);
  const ComplexMatrix y = admittance_matrix(builtin_case("two-bus"));
  CHECK(std::abs(y(0, 0) - expected) < 1e-12);
  CHECK(std::abs(y(0, 1) + y(0, 0)) < 1e-12);
  CHECK(y(0, 0).real() == doctest::Approx(9.6142).epsilon(1e-4));
  CHECK(y(0, 0).imag() == doctest::Approx(-8.0268).epsilon(1e-4));
}

TEST_CASE("transformer stamp") {
  const ComplexMatrix y = admittance_matrix(single_branch(1.0, 0.0, 2.0));
  CHECK(std::abs(y(0, 0) - Complex(0.25, 0)) < 1e-14);
  CHECK(std::abs(y(0, 1) - Complex(-0.5, 0)) < 1e-14);
  CHECK(std::abs(y(1, 0) - Complex(-0.5, 0)) < 1e-14);
  CHECK(std::abs(y(1, 1) - Complex(1, 0)) < 1e-14);
}

TEST_CASE("kron reduction") {
  SUBCASE("three-bus to the two-bus equivalent") {
    const NetworkCase reduced = kron_reduce(builtin_case("three-bus"), 3);
    REQUIRE(reduced.num_buses() == 2);
    REQUIRE(reduced.branches.size() == 1);
    CHECK(reduced.branches[0].r == doctest::Approx(0.06129).epsilon(1e-4 / 0.06129));
    CHECK(reduced.branches[0].x == doctest::Approx(0.05117).epsilon(1e-4 / 0.05117));
    const ComplexMatrix a = admittance_matrix(reduced);
    const ComplexMatrix b = admittance_matrix(builtin_case("two-bus"));
    CHECK((a - b).cwiseAbs().maxCoeff() < 2e-2);
  }
  SUBCASE("series chain") {
    NetworkCase c = single_branch(1.0, 0.0);
    c.buses.push_back(Bus{3, 0, 0, {}, {}, false});
    c.branches.push_back(c.branches[0]);
    c.branches[1].from = 2;
    c.branches[1].to = 3;
    const NetworkCase reduced = kron_reduce(c, 2);
    REQUIRE(reduced.branches.size() == 1);
    CHECK(reduced.branches[0].r == doctest::Approx(2.0));
    CHECK(reduced.branches[0].x == doctest::Approx(0.0));
  }
  SUBCASE("eliminated voltage is recovered") {
    const NetworkCase c = builtin_case("three-bus");
    const auto full = testing::oracle(c);
    const Complex v3 = kron_recover_voltage(c, 3, {full[0], full[1]});
    CHECK(std::abs(v3 - full[2]) < 1e-9);
  }
  SUBCASE("preconditions") {
    NetworkCase c = builtin_case("three-bus");
    c.buses[2].load_p = 0.5;
    CHECK_THROWS_AS(kron_reduce(c, 3), PreconditionError);
    CHECK_THROWS_AS(kron_reduce(builtin_case("three-bus"), 1), PreconditionError);
    CHECK_THROWS_AS(kron_reduce(builtin_case("three-bus"), 2), PreconditionError);
  }
}

TEST_CASE("bounds per bus") {
  const NetworkCase c = builtin_case("three-bus");
  CHECK(c.active_bounds(1).is_free());
  CHECK(c.active_bounds(2).is_equality());
  CHECK(c.reactive_bounds(3).is_equality());
  CHECK(*c.voltage_sq_bounds(2).lo == doctest::Approx(1.69));
  CHECK(c.voltage_sq_bounds(3).is_free());
}

TEST_CASE("releasing active power") {
  const NetworkCase c = release_active_power(builtin_case("three-bus"), {2, 3});
  CHECK(c.active_bounds(2).is_free());
  CHECK(c.active_bounds(3).is_free());
  CHECK(c.reactive_bounds(3).is_equality());

  NetworkCase bare = builtin_case("three-bus");
  bare.generators.pop_back();
  const NetworkCase added = release_active_power(bare, {3});
  REQUIRE(added.generator_at(3) != nullptr);
  CHECK(!added.generator_at(3)->has_cost());
  CHECK(added.reactive_bounds(3).is_equality());
  CHECK(*added.reactive_bounds(3).lo == 0.0);
}

TEST_CASE("injections from the admittance matrix") {
  const NetworkCase c = builtin_case("two-bus");
  const auto s = bus_injections(admittance_matrix(c), table_one::two_bus());
  CHECK(s[0].real() == doctest::Approx(table_one::kObjective).epsilon(table_one::kTol / 5.68));
  CHECK(std::abs(s[0].imag() - table_one::kQ1) < table_one::kTol);
  CHECK(std::abs(s[1].imag() - table_one::kQ2) < table_one::kTol);
}
