// opfrelax: solve bundled or user OPF cases with the Shor, moment and mixed
// relaxations, and sweep injection grids.
//
// Exit codes: 0 success, 1 solver failure, 2 usage or validation error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "opfrelax/cases.hpp"
#include "opfrelax/hierarchy.hpp"
#include "opfrelax/recover.hpp"
#include "opfrelax/sweep.hpp"

using namespace opfrelax;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kSolverFailure = 1;
constexpr int kUsage = 2;

struct Common {
  std::string case_name;
  std::string relaxation = "sdp";
  double tol = 1e-8;
  double rank_tol = 1e-5;
  std::string backend = "ipm";
  std::string out;
};

struct SolveOptions {
  Common common;
  bool dump_program = false;
  bool dump_polynomials = false;
};

struct SweepOptions {
  Common common;
  std::string sweep;
  std::string format = "csv";
  double weight = 1e3;
  int jobs = 1;
};

void add_common(CLI::App* cmd, Common& c) {
  auto* flag = cmd->add_option("--case", c.case_name, "Bundled case name or path to a case document");
  cmd->add_option("CASE", c.case_name, "Same as --case")->excludes(flag);
  cmd->add_option("--relaxation", c.relaxation, "sdp, moment:K or mixed:K")->capture_default_str();
  cmd->add_option("--tol", c.tol, "Solver tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--rank-tol", c.rank_tol, "Eigenvalue ratio below which a direction does not count")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--backend", c.backend, "Conic solver: ipm or admm")
      ->capture_default_str()
      ->check(CLI::IsMember({"ipm", "admm"}));
  cmd->add_option("--out", c.out, "Output path (default stdout)");
}

RecoverSettings settings_from(const Common& c) {
  RecoverSettings s;
  s.solver.tolerance = c.tol;
  s.solver.backend = c.backend == "admm" ? Backend::Splitting : Backend::InteriorPoint;
  s.rank_tol = c.rank_tol;
  return s;
}

NetworkCase load(const Common& c) {
  if (c.case_name.empty()) throw PreconditionError("no case given (use a bundled name or a path)");
  try {
    return resolve_case(c.case_name);
  } catch (const std::out_of_range& e) {
    throw PreconditionError(e.what());
  }
}

/// Runs fn with stdout or the --out file.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream file(path);
  if (!file) throw PreconditionError("cannot open " + path + " for writing");
  fn(file);
}

Json phasor_json(int bus, Complex v) {
  Json j;
  j["bus"] = bus;
  j["re"] = v.real();
  j["im"] = v.imag();
  j["magnitude"] = std::abs(v);
  j["angle_deg"] = std::arg(v) * 180.0 / std::numbers::pi;
  return j;
}

Json report_json(const FeasibilityReport& r) {
  Json j;
  j["objective"] = r.objective;
  j["max_violation"] = r.max_violation;
  Json inj = Json::array();
  for (std::size_t k = 0; k < r.injections.size(); ++k) {
    inj.push_back({{"bus", k + 1}, {"p", r.injections[k].real()}, {"q", r.injections[k].imag()}});
  }
  j["injections"] = std::move(inj);
  Json rows = Json::array();
  for (const auto& c : r.constraints) {
    rows.push_back({{"constraint", c.label},
                    {"kind", c.equality ? "equality" : "inequality"},
                    {"residual", c.residual},
                    {"violation", c.violation()}});
  }
  j["constraints"] = std::move(rows);
  return j;
}

Json oracle_json(const NetworkCase& network, const RelaxationSolution& sol) {
  Json j;
  NewtonResult nr;
  try {
    nr = newton_power_flow(network, flat_start(network));
  } catch (const PreconditionError& e) {
    j["available"] = false;
    j["message"] = e.what();
    return j;
  }
  j["available"] = true;
  j["converged"] = nr.converged;
  j["iterations"] = nr.iterations;
  j["message"] = nr.message;
  if (!nr.converged) return j;
  const FeasibilityReport rep = verify(network, nr.voltages);
  j["objective"] = rep.objective;
  Json volts = Json::array();
  for (std::size_t k = 0; k < nr.voltages.size(); ++k) volts.push_back(phasor_json(static_cast<int>(k + 1), nr.voltages[k]));
  j["voltages"] = std::move(volts);
  if (rep.objective != 0.0) j["relative_gap"] = (rep.objective - sol.objective) / std::abs(rep.objective);
  if (sol.voltages) {
    double dev = 0.0;
    for (std::size_t k = 0; k < nr.voltages.size(); ++k) {
      const Complex d = (*sol.voltages)[k] - nr.voltages[k];
      dev = std::max({dev, std::abs(d.real()), std::abs(d.imag())});
    }
    j["max_voltage_deviation"] = dev;
  }
  return j;
}

int cmd_solve(const SolveOptions& opt) {
  const NetworkCase network = load(opt.common);
  const RelaxationSpec spec = RelaxationSpec::parse(opt.common.relaxation);

  if (opt.dump_polynomials) {
    const OpfPolynomials polys = build_opf_polynomials(network);
    const auto names = polys.layout.names();
    with_output(opt.common.out, [&](std::ostream& out) {
      for (const Bus& bus : network.buses) {
        const std::string k = std::to_string(bus.id);
        out << "f_V" << k << " = " << polys.v(bus.id).to_string(names) << '\n';
        out << "f_P" << k << " = " << polys.p(bus.id).to_string(names) << '\n';
        out << "f_Q" << k << " = " << polys.q(bus.id).to_string(names) << '\n';
        if (!polys.c(bus.id).is_zero()) out << "f_C" << k << " = " << polys.c(bus.id).to_string(names) << '\n';
      }
      for (std::size_t i = 0; i < network.branches.size(); ++i) {
        const Branch& br = network.branches[i];
        const std::string lm = std::to_string(br.from) + std::to_string(br.to);
        const std::string ml = std::to_string(br.to) + std::to_string(br.from);
        out << "f_P" << lm << " = " << polys.flows[i].p_from.to_string(names) << '\n';
        out << "f_Q" << lm << " = " << polys.flows[i].q_from.to_string(names) << '\n';
        out << "f_P" << ml << " = " << polys.flows[i].p_to.to_string(names) << '\n';
        out << "f_Q" << ml << " = " << polys.flows[i].q_to.to_string(names) << '\n';
      }
    });
    return 0;
  }

  const Relaxation relaxation = build_relaxation(network, spec);
  if (opt.dump_program) {
    with_output(opt.common.out, [&](std::ostream& out) { write_program(out, relaxation.program); });
    return 0;
  }

  const RelaxationSolution sol = solve_relaxation(relaxation, settings_from(opt.common));
  Json doc;
  doc["case"] = network.name;
  doc["relaxation"] = spec.to_string();
  doc["status"] = to_string(sol.conic.status);
  doc["message"] = sol.conic.message;
  doc["objective"] = sol.objective;
  doc["iterations"] = sol.conic.iterations;
  doc["primal_residual"] = sol.conic.primal_residual;
  doc["dual_residual"] = sol.conic.dual_residual;
  doc["gap"] = sol.conic.gap;
  doc["variables"] = relaxation.program.num_vars;
  doc["rank"] = sol.rank;
  doc["eigenvalues"] = std::vector<double>(sol.eigenvalues.data(), sol.eigenvalues.data() + sol.eigenvalues.size());
  doc["exact"] = sol.exact;
  if (sol.voltages) {
    Json volts = Json::array();
    for (std::size_t k = 0; k < sol.voltages->size(); ++k) {
      volts.push_back(phasor_json(static_cast<int>(k + 1), (*sol.voltages)[k]));
    }
    doc["voltages"] = std::move(volts);
  } else {
    doc["voltages"] = nullptr;
  }
  doc["feasibility"] = sol.report ? report_json(*sol.report) : Json(nullptr);
  doc["oracle"] = oracle_json(network, sol);
  with_output(opt.common.out, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  return sol.conic.optimal() ? 0 : kSolverFailure;
}

int cmd_sweep(const SweepOptions& opt) {
  const NetworkCase network = load(opt.common);
  SweepSpec spec;
  spec.relaxation = RelaxationSpec::parse(opt.common.relaxation);
  spec.axes = opt.sweep.empty() ? default_sweep_axes() : parse_sweep_axes(opt.sweep);
  spec.weight = opt.weight;
  spec.settings = settings_from(opt.common);
  spec.jobs = opt.jobs;
  const auto records = run_sweep(network, spec);
  with_output(opt.common.out, [&](std::ostream& out) {
    if (opt.format == "json") write_sweep_json(out, network, spec, records);
    else write_sweep_csv(out, network, spec, records);
  });
  return 0;
}

std::string bound_text(const std::optional<double>& lo, const std::optional<double>& hi) {
  std::ostringstream s;
  if (lo && hi && *lo == *hi) {
    s << "= " << *lo;
    return s.str();
  }
  s << '[';
  if (lo) s << *lo;
  else s << "-inf";
  s << ", ";
  if (hi) s << *hi;
  else s << "+inf";
  s << ']';
  return s.str();
}

int cmd_cases() {
  for (const auto& name : builtin_case_names()) {
    const NetworkCase c = builtin_case(name);
    std::cout << name << '\n';
    std::cout << "  buses\n";
    for (const Bus& b : c.buses) {
      std::cout << "    " << b.id << "  load " << b.load_p << " + j" << b.load_q << "  |V| "
                << bound_text(b.v_min, b.v_max) << (b.is_reference ? "  reference" : "") << '\n';
    }
    std::cout << "  generators\n";
    for (const Generator& g : c.generators) {
      std::cout << "    bus " << g.bus << "  P " << bound_text(g.p_min, g.p_max) << "  Q "
                << bound_text(g.q_min, g.q_max) << "  cost [" << g.cost_c2 << ", " << g.cost_c1 << ", " << g.cost_c0
                << "]\n";
    }
    std::cout << "  branches\n";
    for (const Branch& br : c.branches) {
      std::cout << "    " << br.from << " - " << br.to << "  " << br.r << " + j" << br.x;
      if (br.b_sh != 0.0) std::cout << "  b_sh " << br.b_sh;
      if (br.tau != 1.0 || br.shift != 0.0) std::cout << "  tap " << br.tau << " shift " << br.shift;
      if (br.s_max) std::cout << "  s_max " << *br.s_max;
      std::cout << '\n';
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convex relaxations of small AC optimal power flow problems"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a case with one relaxation and certify the result");
  add_common(solve_cmd, solve_opt.common);
  solve_cmd->add_flag("--dump-program", solve_opt.dump_program, "Write the conic program as text instead of solving");
  solve_cmd->add_flag("--dump-polynomials", solve_opt.dump_polynomials, "Write the OPF polynomials instead of solving");

  SweepOptions sweep_opt;
  sweep_opt.common.relaxation = "moment:2";
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep active-power targets over a grid");
  add_common(sweep_cmd, sweep_opt.common);
  sweep_cmd->add_option("--sweep", sweep_opt.sweep, "Grid, e.g. p2=-6:6:0.25,p3=-4:4:0.25");
  sweep_cmd->add_option("--format", sweep_opt.format, "csv or json")
      ->capture_default_str()
      ->check(CLI::IsMember({"csv", "json"}));
  sweep_cmd->add_option("--weight", sweep_opt.weight, "Tracking weight")->capture_default_str()->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--jobs", sweep_opt.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  app.add_subcommand("cases", "List the bundled cases");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(solve_opt);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_opt);
    return cmd_cases();
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
