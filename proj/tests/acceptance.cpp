// Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero when a
// criterion fails that was not listed with --known-failures.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "data/paper_tables.inc"
#include "opfrelax/sweep.hpp"
#include "support.hpp"

using namespace opfrelax;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Report {
 public:
  explicit Report(std::ostream& out) : out_(out) {}

  template <typename... Args>
  void note(const char* fmt, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    if (!detail_.empty()) detail_ += "; ";
    detail_ += buf;
  }
  bool check(bool ok, const std::string& what) {
    if (!ok) {
      ok_ = false;
      if (!detail_.empty()) detail_ += "; ";
      detail_ += "failed: " + what;
    }
    return ok;
  }
  Outcome take() {
    Outcome o{ok_, detail_};
    ok_ = true;
    detail_.clear();
    return o;
  }

 private:
  std::ostream& out_;
  bool ok_ = true;
  std::string detail_;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

RelaxationSolution timed_solve(const NetworkCase& c, RelaxationSpec spec, double& seconds) {
  const auto t0 = Clock::now();
  RelaxationSolution s = solve_relaxation(build_relaxation(c, spec));
  seconds = seconds_since(t0);
  return s;
}

double eigen_ratio(const RelaxationSolution& s) {
  if (s.eigenvalues.size() < 2 || !(s.eigenvalues(0) > 0.0)) return INFINITY;
  return std::abs(s.eigenvalues(1)) / s.eigenvalues(0);
}

void check_table_voltages(Report& r, const RelaxationSolution& s, bool with_v3) {
  if (!r.check(s.voltages.has_value(), "no voltages extracted")) return;
  const auto& v = *s.voltages;
  r.note("V2=%.4f%+.4fj", v[1].real(), v[1].imag());
  r.check(testing::near(v[1], table_one::kV2, table_one::kTol), "V2 vs 1.049-0.767j");
  if (with_v3) {
    r.note("V3=%.4f%+.4fj", v[2].real(), v[2].imag());
    r.check(testing::near(v[2], table_one::kV3, table_one::kTol), "V3 vs 0.849-0.586j");
  }
}

Outcome two_bus_sdp(Report& r) {
  double t = 0;
  const RelaxationSolution s = timed_solve(builtin_case("two-bus"), {RelaxationKind::FirstOrder, 1}, t);
  r.check(s.conic.optimal(), "solver status " + to_string(s.conic.status));
  r.note("objective=%.5f rank=%d l2/l1=%.2e", s.objective, s.rank, eigen_ratio(s));
  r.check(s.rank == 1 && eigen_ratio(s) < 1e-5, "rank one");
  r.check(within(s.objective, table_one::kObjective, 0.02), "objective 5.68 +- 0.02");
  check_table_voltages(r, s, false);
  if (r.check(s.report.has_value(), "no feasibility report")) {
    const double q1 = s.report->injections[0].imag();
    const double q2 = s.report->injections[1].imag();
    r.note("Q1=%.4f Q2=%.4f", q1, q2);
    r.check(within(q1, table_one::kQ1, 0.02), "Q1 -7.77 +- 0.02");
    r.check(within(q2, table_one::kQ2, 0.02), "Q2 12.52 +- 0.02");
  }
  r.note("%.3fs", t);
  r.check(t < 5.0, "runtime < 5 s");
  return r.take();
}

Outcome three_bus_gap(Report& r) {
  double t = 0;
  const RelaxationSolution s = timed_solve(builtin_case("three-bus"), {RelaxationKind::FirstOrder, 1}, t);
  r.check(s.conic.optimal(), "solver status " + to_string(s.conic.status));
  const double gap = (table_one::kObjective - s.objective) / table_one::kObjective;
  r.note("bound=%.5f rank=%d gap=%.2f%%", s.objective, s.rank, 100.0 * gap);
  r.check(s.rank > 1, "rank > 1");
  r.check(within(gap, 0.22, 0.02), "gap 22% +- 2%");
  r.note("%.3fs", t);
  r.check(t < 10.0, "runtime < 10 s");
  return r.take();
}

Outcome three_bus_exact(Report& r, RelaxationSpec spec) {
  double t = 0;
  const RelaxationSolution s = timed_solve(builtin_case("three-bus"), spec, t);
  r.check(s.conic.optimal(), "solver status " + to_string(s.conic.status));
  r.note("objective=%.5f rank=%d l2/l1=%.2e", s.objective, s.rank, eigen_ratio(s));
  r.check(s.rank == 1, "rank one");
  r.check(within(s.objective, table_one::kObjective, 0.02), "objective 5.68 +- 0.02");
  check_table_voltages(r, s, true);
  r.note("%.3fs", t);
  r.check(t < 60.0, "runtime < 60 s");
  return r.take();
}

Outcome equivalence(Report& r) {
  const NetworkCase reduced = kron_reduce(builtin_case("three-bus"), 3);
  if (!r.check(reduced.branches.size() == 1, "one equivalent branch")) return r.take();
  const Branch& br = reduced.branches[0];
  r.note("z=%.6f%+.6fj", br.r, br.x);
  r.check(within(br.r, 0.06129, 1e-4) && within(br.x, 0.05117, 1e-4), "0.06129 + j0.05117 +- 1e-4");
  return r.take();
}

Outcome structure(Report& r) {
  const MonomialBasis b = basis(5, 2);
  r.note("|basis(5,2)|=%zu C(22,3)=%llu", b.size(), static_cast<unsigned long long>(basis_size(19, 3)));
  bool ordered = b.size() == 21;
  for (std::size_t j = 0; ordered && j < 21; ++j) ordered = b[j].digits() == kMoment2Table[0][j];
  r.check(ordered, "basis order");
  r.check(basis_size(19, 3) == 1540, "1540");
  return r.take();
}

Outcome monotonicity(Report& r) {
  const NetworkCase c = builtin_case("three-bus");
  const auto obj = [&](RelaxationSpec spec) {
    const RelaxationSolution s = solve_relaxation(build_relaxation(c, spec));
    r.check(s.conic.optimal(), spec.to_string() + " status " + to_string(s.conic.status));
    return s.objective;
  };
  const double mixed = obj({RelaxationKind::Mixed, 2});
  const double m1 = obj({RelaxationKind::Moment, 1});
  const double m2 = obj({RelaxationKind::Moment, 2});
  const double oracle = verify(c, testing::oracle(c)).objective;
  r.note("mixed:2=%.6f moment:1=%.6f moment:2=%.6f oracle=%.6f", mixed, m1, m2, oracle);
  const auto slack = [](double v) { return 1e-4 * (1.0 + std::abs(v)); };
  r.check(mixed <= m2 + slack(m2), "mixed:2 <= moment:2");
  r.check(m1 <= m2 + slack(m2), "moment:1 <= moment:2");
  r.check(m2 <= oracle + slack(oracle), "moment:2 <= oracle");
  return r.take();
}

Outcome lifting(Report& r) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(1.1, 1.4);
  const std::vector<RelaxationSpec> specs = {{RelaxationKind::FirstOrder, 1}, {RelaxationKind::Moment, 1},
                                             {RelaxationKind::Moment, 2},     {RelaxationKind::Moment, 3},
                                             {RelaxationKind::Mixed, 2},      {RelaxationKind::Mixed, 3}};
  double worst = 0.0;
  int checked = 0, skipped = 0;
  for (const char* name : {"two-bus", "three-bus"}) {
    int found = 0;
    while (found < 20 && skipped < 1000) {
      const NetworkCase c = testing::with_v2(name, u(rng));
      const NewtonResult pf = newton_power_flow(c, flat_start(c));
      if (!pf.converged) {
        ++skipped;
        continue;
      }
      ++found;
      for (const auto& spec : specs) {
        const Relaxation rel = build_relaxation(c, spec);
        worst = std::max(worst, max_violation(rel.program, rel.lift(pf.voltages)).worst());
        ++checked;
      }
    }
    r.check(found == 20, std::string("20 setpoints with a power-flow solution on ") + name);
  }
  r.note("%d lifted points, worst violation %.2e (%d setpoints without a solution redrawn)", checked, worst, skipped);
  r.check(worst <= 1e-8, "violation <= 1e-8");
  return r.take();
}

struct HoleAnalysis {
  int converged_moment = 0;
  int exact_moment = 0;
  int converged_mixed = 0;
  int mixed_rank_gt1 = 0;
  int hole_targets = 0;
  int mixed_in_hole = 0;
};

/// A target is inside the hole when no exact moment:2 point was achieved within one grid
/// step of it and exact points exist on all four sides of it.
bool in_hole(const std::vector<std::array<double, 2>>& exact, double p2, double p3, double step) {
  bool left = false, right = false, below = false, above = false;
  for (const auto& e : exact) {
    const double d2 = e[0] - p2;
    const double d3 = e[1] - p3;
    if (std::abs(d2) < step && std::abs(d3) < step) return false;
    if (std::abs(d3) < step) {
      left |= d2 < 0.0;
      right |= d2 > 0.0;
    }
    if (std::abs(d2) < step) {
      below |= d3 < 0.0;
      above |= d3 > 0.0;
    }
  }
  return left && right && below && above;
}

Outcome sweep(Report& r, int jobs) {
  const NetworkCase c = builtin_case("three-bus");
  SweepSpec spec;
  spec.axes = default_sweep_axes();
  spec.jobs = jobs;
  const double step = spec.axes[0].step;
  const auto t0 = Clock::now();
  spec.relaxation = {RelaxationKind::Moment, 2};
  const auto moment = run_sweep(c, spec);
  spec.relaxation = {RelaxationKind::Mixed, 2};
  const auto mixed = run_sweep(c, spec);
  const double t = seconds_since(t0);

  HoleAnalysis h;
  std::vector<std::array<double, 2>> exact;
  for (const auto& rec : moment) {
    if (!rec.converged()) continue;
    ++h.converged_moment;
    if (!rec.exact) continue;
    ++h.exact_moment;
    exact.push_back({rec.achieved[1], rec.achieved[2]});
  }
  std::set<std::pair<double, double>> hole;
  for (const auto& rec : moment) {
    if (in_hole(exact, rec.targets[0], rec.targets[1], step)) hole.insert({rec.targets[0], rec.targets[1]});
  }
  h.hole_targets = static_cast<int>(hole.size());
  for (const auto& rec : mixed) {
    if (!rec.converged()) continue;
    ++h.converged_mixed;
    if (rec.rank <= 1) continue;
    ++h.mixed_rank_gt1;
    h.mixed_in_hole += hole.count({rec.targets[0], rec.targets[1]}) ? 1 : 0;
  }
  const double fraction = h.converged_moment ? static_cast<double>(h.exact_moment) / h.converged_moment : 0.0;
  r.note("moment:2 exact at %d/%d converged (%.1f%%) of %zu", h.exact_moment, h.converged_moment, 100.0 * fraction,
         moment.size());
  r.note("hole targets %d; mixed:2 rank>1 at %d/%d converged, %d inside the hole", h.hole_targets, h.mixed_rank_gt1,
         h.converged_mixed, h.mixed_in_hole);
  r.note("%.1fs with %d workers", t, jobs);
  r.check(fraction >= 0.99, "moment:2 exact at >= 99% of converged points");
  r.check(h.mixed_in_hole >= 1, "a mixed:2 rank>1 point inside the hole");
  r.check(t < 480.0, "runtime < 8 min");
  return r.take();
}

Outcome oracle(Report& r) {
  for (const char* name : {"two-bus", "three-bus"}) {
    const NetworkCase c = builtin_case(name);
    const NewtonResult pf = newton_power_flow(c, flat_start(c));
    if (!r.check(pf.converged, std::string(name) + " flat start converges")) continue;
    r.note("%s: V2=%.4f%+.4fj in %d iterations", name, pf.voltages[1].real(), pf.voltages[1].imag(), pf.iterations);
    r.check(testing::near(pf.voltages[1], table_one::kV2, table_one::kTol), std::string(name) + " V2");
    if (c.num_buses() == 3) r.check(testing::near(pf.voltages[2], table_one::kV3, table_one::kTol), "three-bus V3");
    const FeasibilityReport rep = verify(c, pf.voltages);
    r.check(within(rep.injections[0].real(), table_one::kObjective, table_one::kTol), std::string(name) + " P1");
    r.check(within(rep.injections[0].imag(), table_one::kQ1, table_one::kTol), std::string(name) + " Q1");
  }
  const NetworkCase two = builtin_case("two-bus");
  const NewtonResult high = newton_power_flow(two, flat_start(two));
  const NewtonResult low = newton_power_flow(two, std::vector<Complex>{1.0, std::polar(1.3, -2.0)});
  if (r.check(low.converged && high.converged, "low-voltage start converges")) {
    const double p_high = verify(two, high.voltages).injections[0].real();
    const double p_low = verify(two, low.voltages).injections[0].real();
    r.note("low-voltage V2=%.4f%+.4fj P1=%.4f vs %.4f", low.voltages[1].real(), low.voltages[1].imag(), p_low, p_high);
    r.check(std::abs(low.voltages[1] - high.voltages[1]) > 1e-3, "distinct solution");
    r.check(p_low > p_high, "larger P1");
  }
  return r.take();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  int jobs = 4;
  std::vector<int> known;
  std::vector<int> only;
  app.add_option("--jobs", jobs, "Sweep workers")->check(CLI::PositiveNumber);
  app.add_option("--known-failures", known, "Criteria expected to fail; they are still reported as FAIL");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  Report report(std::cout);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"two-bus SDP exactness", [&] { return two_bus_sdp(report); }},
      {"three-bus SDP gap", [&] { return three_bus_gap(report); }},
      {"three-bus moment order 2 exactness", [&] { return three_bus_exact(report, {RelaxationKind::Moment, 2}); }},
      {"mixed SDP/SOCP order 2 at nominal loading", [&] { return three_bus_exact(report, {RelaxationKind::Mixed, 2}); }},
      {"bus elimination equivalence", [&] { return equivalence(report); }},
      {"structural sizes", [&] { return structure(report); }},
      {"hierarchy monotonicity", [&] { return monotonicity(report); }},
      {"lifting soundness", [&] { return lifting(report); }},
      {"sweep qualitative reproduction", [&] { return sweep(report, jobs); }},
      {"oracle independence", [&] { return oracle(report); }},
  };

  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      report.take();
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected_failure = std::find(known.begin(), known.end(), id) != known.end();
    if (!o.pass && !expected_failure) ++unexpected;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << id << ' ' << criteria[i].first << ": " << o.detail
              << (!o.pass && expected_failure ? " [known failure]" : "") << std::endl;
  }
  return unexpected == 0 ? 0 : 1;
}
