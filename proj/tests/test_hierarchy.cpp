#include <doctest.h>

#include <algorithm>
#include <set>

#include "data/paper_tables.inc"
#include "support.hpp"

using namespace opfrelax;

namespace {

Exponent from_digits(const std::string& s) {
  Exponent e(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) e.set(i, s[i] - '0');
  return e;
}

std::string slot_digits(const LiftedIndex& idx, const LinearForm& form) {
  REQUIRE(form.terms.size() == 1);
  CHECK(form.terms[0].second == 1.0);
  return idx.exponent(form.terms[0].first).digits();
}

int count_cones(const ConicProgram& p, ConeKind kind, int order = -1) {
  return static_cast<int>(std::count_if(p.cones.begin(), p.cones.end(), [&](const ConeConstraint& c) {
    return c.kind == kind && (order < 0 || c.order == order);
  }));
}

}  // namespace

TEST_CASE("basis sizes and order") {
  const MonomialBasis b = basis(5, 2);
  REQUIRE(b.size() == 21);
  for (std::size_t j = 0; j < 21; ++j) CHECK(b[j].digits() == kMoment2Table[0][j]);
  CHECK(basis_size(5, 2) == 21);
  CHECK(basis_size(19, 3) == 1540);
  CHECK(basis(19, 3).size() == 1540);
  const MonomialBasis zero = basis(2, 0);
  REQUIRE(zero.size() == 1);
  CHECK(zero[0].is_zero());
  CHECK(b.count_up_to(1) == 6);
  CHECK(*b.find(Exponent{0, 1, 1, 0, 0}) == 12);
  CHECK(!b.find(Exponent{3, 0, 0, 0, 0}));
}

TEST_CASE("lifted index") {
  const LiftedIndex idx(5, 2);
  CHECK(idx.num_slots() == basis_size(5, 4));
  CHECK(idx.exponent(idx.slot(Exponent{0, 2, 0, 2, 0})).digits() == "02020");
  CHECK_THROWS_AS(idx.slot(Exponent{0, 5, 0, 0, 0}), std::domain_error);
}

TEST_CASE("applying the Riesz functional") {
  const LiftedIndex idx(3, 1);
  const Polynomial vd2 = Polynomial::variable(3, 1);
  const Polynomial vq2 = Polynomial::variable(3, 2);
  const double vmax_sq = 1.1 * 1.1;
  const LinearForm form = apply_ly(vmax_sq - vd2 * vd2 - vq2 * vq2, idx);
  LinearForm expected;
  expected.terms = {{idx.slot(Exponent{0, 0, 0}), vmax_sq},
                    {idx.slot(Exponent{0, 2, 0}), -1.0},
                    {idx.slot(Exponent{0, 0, 2}), -1.0}};
  std::sort(expected.terms.begin(), expected.terms.end());
  CHECK(form == expected);
  const LinearForm one = apply_ly(Polynomial::constant(3, 1.0), idx);
  REQUIRE(one.terms.size() == 1);
  CHECK(one.terms[0].first == idx.slot(Exponent(3)));
}

TEST_CASE("moment matrix matches the printed 21x21 table") {
  const LiftedIndex idx(5, 2);
  const SymbolicMatrix m = moment_matrix(idx, 2);
  REQUIRE(m.size() == 21);
  int mismatches = 0;
  for (std::size_t i = 0; i < 21; ++i) {
    for (std::size_t j = 0; j < 21; ++j) {
      const std::string got = slot_digits(idx, m.at(i, j));
      if (got == kMoment2Table[i][j]) continue;
      ++mismatches;
      // The printed row for V_d1 carries y^110 where the product V_d1 * V_d1 V_d2 gives y^210.
      CHECK(i == 1);
      CHECK(j == 7);
      CHECK(std::string(kMoment2Table[i][j]) == "11000");
      CHECK(got == "21000");
    }
  }
  CHECK(mismatches == 1);
}

TEST_CASE("moment matrix structure") {
  const LiftedIndex idx(5, 2);
  const SymbolicMatrix m2 = moment_matrix(idx, 2);
  const SymbolicMatrix m1 = moment_matrix(idx, 1);
  for (std::size_t i = 0; i < m1.size(); ++i) {
    for (std::size_t j = 0; j < m1.size(); ++j) CHECK(m1.at(i, j) == m2.at(i, j));
  }
  const std::size_t vd1vd2 = *m2.rows.find(Exponent{1, 1, 0, 0, 0});
  CHECK(m2.at(1, 2) == m2.at(0, vd1vd2));
  const SymbolicMatrix m0 = moment_matrix(LiftedIndex(5, 0), 0);
  REQUIRE(m0.size() == 1);
  CHECK(m0.at(0, 0).eval(std::vector<double>{1.0}) == 1.0);
  CHECK_THROWS(moment_matrix(LiftedIndex(5, 1), 2));
}

TEST_CASE("localizing matrix matches the printed three-term table") {
  const LiftedIndex idx(5, 2);
  const OpfPolynomials polys = build_opf_polynomials(builtin_case("three-bus"));
  const double vmax_sq = 1.7;
  const SymbolicMatrix m = localizing_matrix(vmax_sq - polys.v(2), idx, 1);
  REQUIRE(m.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      LinearForm expected;
      expected.terms = {{idx.slot(from_digits(kLocalizingConstantPart[i][j])), vmax_sq},
                        {idx.slot(from_digits(kLocalizingVd2Part[i][j])), -1.0},
                        {idx.slot(from_digits(kLocalizingVq2Part[i][j])), -1.0}};
      std::sort(expected.terms.begin(), expected.terms.end());
      CHECK(m.at(i, j) == expected);
    }
  }
  const SymbolicMatrix scalar = localizing_matrix(vmax_sq - polys.v(2), idx, 0);
  REQUIRE(scalar.size() == 1);
  CHECK(scalar.at(0, 0) == apply_ly(vmax_sq - polys.v(2), idx));
  const SymbolicMatrix unit = localizing_matrix(Polynomial::constant(5, 1.0), idx, 2);
  CHECK(unit.entries == moment_matrix(idx, 2).entries);
  CHECK_THROWS_AS(localizing_matrix(polys.v(2), idx, 2), std::domain_error);
}

TEST_CASE("parity split") {
  const ParityBlocks b = split_by_parity(basis(5, 2));
  CHECK(b.even.size() == 16);
  CHECK(b.odd.size() == 5);
  const ParityBlocks b1 = split_by_parity(basis(5, 1));
  CHECK(b1.even == std::vector<std::size_t>{0});
  CHECK(b1.odd.size() == 5);
}

TEST_CASE("relaxation tags") {
  CHECK(RelaxationSpec::parse("sdp").kind == RelaxationKind::FirstOrder);
  const auto m = RelaxationSpec::parse("moment:3");
  CHECK(m.kind == RelaxationKind::Moment);
  CHECK(m.order == 3);
  CHECK(RelaxationSpec::parse("mixed:2").to_string() == "mixed:2");
  for (const char* bad : {"moment:0", "mixed:1", "moment", "moment:x", "moment:2x", "sos:2", ""}) {
    CHECK_THROWS_AS(RelaxationSpec::parse(bad), std::invalid_argument);
  }
}

TEST_CASE("first-order program equals the order-one moment program") {
  for (const char* name : {"two-bus", "three-bus"}) {
    const Relaxation a = build_first_order(builtin_case(name));
    const Relaxation b = build_moment(builtin_case(name), 1);
    CHECK(a.program.num_vars == b.program.num_vars);
    CHECK(a.program.objective == b.program.objective);
    CHECK(a.program.equalities == b.program.equalities);
    REQUIRE(a.program.cones.size() == b.program.cones.size());
    for (std::size_t i = 0; i < a.program.cones.size(); ++i) {
      CHECK(a.program.cones[i].kind == b.program.cones[i].kind);
      CHECK(a.program.cones[i].entries == b.program.cones[i].entries);
    }
  }
}

TEST_CASE("even reduction of the moment matrix") {
  const Relaxation r = build_moment(builtin_case("three-bus"), 2);
  CHECK(r.even_reduced);
  CHECK(r.program.num_vars == 1 + 15 + 70);
  CHECK(count_cones(r.program, ConeKind::Psd, 16) == 1);
  CHECK(count_cones(r.program, ConeKind::Psd, 5) == 1);
  CHECK(count_cones(r.program, ConeKind::Psd, 21) == 0);

  const Relaxation full = build_relaxation(builtin_case("three-bus"), {RelaxationKind::Moment, 2}, {.even_reduction = false});
  CHECK_FALSE(full.even_reduced);
  CHECK(count_cones(full.program, ConeKind::Psd, 21) == 1);

  const Relaxation first = build_first_order(builtin_case("three-bus"));
  CHECK(count_cones(first.program, ConeKind::Psd, 5) == 1);
  CHECK(count_cones(first.program, ConeKind::Psd) == 1);
}

TEST_CASE("odd polynomials refuse the even reduction") {
  PolynomialProblem p;
  p.num_vars = 1;
  const Polynomial x = Polynomial::variable(1, 0);
  p.objective = x;
  p.inequalities = {{1.0 - x * x, "box"}};
  const GenericRelaxation r = relax(p, {RelaxationKind::Moment, 1});
  CHECK_FALSE(r.even_reduced);
  CHECK(count_cones(r.program, ConeKind::Psd, 2) == 1);
  const ConicSolution s = solve(r.program);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("mixed programs keep PSD only on the degree-one block") {
  const Relaxation r = build_mixed(builtin_case("three-bus"), 2);
  CHECK(count_cones(r.program, ConeKind::Psd) == 1);
  CHECK(count_cones(r.program, ConeKind::Psd, 5) == 1);
  CHECK(count_cones(r.program, ConeKind::RotatedSecondOrder) > 0);
  for (const auto& c : r.program.cones) {
    if (c.kind == ConeKind::RotatedSecondOrder) CHECK(c.entries.size() == 3);
  }
  const Relaxation m = build_moment(builtin_case("three-bus"), 2);
  CHECK(r.program.num_vars == m.program.num_vars);
}

TEST_CASE("trivial programs") {
  NetworkCase c = builtin_case("two-bus");
  c.buses[1].v_min.reset();
  c.buses[1].v_max.reset();
  c.generators[0].cost_c1 = 0.0;
  c.generators[1].p_min.reset();
  c.generators[1].p_max.reset();
  const Relaxation r = build_first_order(c);
  const ConicSolution s = solve(r.program);
  REQUIRE(s.optimal());
  CHECK(std::abs(s.objective) < 1e-7);
}

TEST_CASE("tracking targets") {
  BuildOptions opt;
  opt.targets = {{2, 0.5}, {3, -0.5}};
  const Relaxation r = build_relaxation(builtin_case("three-bus"), {RelaxationKind::Moment, 2}, opt);
  CHECK(r.network.active_bounds(2).is_free());
  CHECK(r.auxiliary.size() >= 1);
  BuildOptions dup;
  dup.targets = {{2, 0.5}, {2, 0.1}};
  CHECK_THROWS_AS(build_relaxation(builtin_case("three-bus"), {RelaxationKind::Moment, 2}, dup), PreconditionError);
  BuildOptions unknown;
  unknown.targets = {{7, 0.5}};
  CHECK_THROWS_AS(build_relaxation(builtin_case("three-bus"), {RelaxationKind::Moment, 2}, unknown), PreconditionError);
  BuildOptions weightless;
  weightless.targets = {{2, 0.5}};
  weightless.weight = 0.0;
  CHECK_THROWS_AS(build_relaxation(builtin_case("three-bus"), {RelaxationKind::Moment, 2}, weightless), PreconditionError);
}

TEST_CASE("program labels name their constraints") {
  const Relaxation r = build_moment(builtin_case("three-bus"), 2);
  std::set<std::string> labels(r.program.equality_labels.begin(), r.program.equality_labels.end());
  CHECK(labels.count("y0 = 1") == 1);
  CHECK(std::any_of(labels.begin(), labels.end(), [](const std::string& l) { return l.find("P2") == 0; }));
}
