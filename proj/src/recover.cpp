#include <algorithm>
#include <cmath>

#include "opfrelax/recover.hpp"

namespace opfrelax {

int numerical_rank(std::span<const double> eigenvalues, double ratio_tol) {
  if (eigenvalues.empty()) return 0;
  const double top = *std::max_element(eigenvalues.begin(), eigenvalues.end());
  if (!(top > 0.0)) return 0;
  return static_cast<int>(
      std::count_if(eigenvalues.begin(), eigenvalues.end(), [&](double l) { return l > ratio_tol * top; }));
}

Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  return eig.eigenvalues().reverse();
}

std::optional<std::vector<Complex>> extract_voltages(const Eigen::MatrixXd& second_moment, const VoltageLayout& layout,
                                                     double ratio_tol) {
  if (static_cast<std::size_t>(second_moment.rows()) != layout.num_vars() ||
      second_moment.rows() != second_moment.cols()) {
    throw std::invalid_argument("extract_voltages: matrix does not match the voltage layout");
  }
  const Eigen::MatrixXd sym = 0.5 * (second_moment + second_moment.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd values = eig.eigenvalues().reverse();
  if (numerical_rank({values.data(), static_cast<std::size_t>(values.size())}, ratio_tol) != 1) return std::nullopt;

  const Eigen::Index top = values.size() - 1;
  Eigen::VectorXd point = std::sqrt(eig.eigenvalues()(top)) * eig.eigenvectors().col(top);
  if (point(static_cast<Eigen::Index>(layout.vd(layout.reference_bus()))) < 0.0) point = -point;
  return layout.to_phasors({point.data(), static_cast<std::size_t>(point.size())});
}

double ConstraintResidual::violation() const {
  return equality ? std::abs(residual) : std::max(0.0, -residual);
}

namespace {

void check_bounds(FeasibilityReport& report, const std::string& name, double value, const Bounds& b) {
  if (b.is_equality()) {
    report.constraints.push_back({name, value - *b.lo, true});
    return;
  }
  if (b.lo) report.constraints.push_back({name + " >= lo", value - *b.lo, false});
  if (b.hi) report.constraints.push_back({name + " <= hi", *b.hi - value, false});
}

}  // namespace

FeasibilityReport verify(const NetworkCase& network, std::span<const Complex> voltages) {
  if (static_cast<int>(voltages.size()) != network.num_buses()) {
    throw std::invalid_argument("verify: expected " + std::to_string(network.num_buses()) + " phasors");
  }
  const OpfPolynomials polys = build_opf_polynomials(network);
  const std::vector<double> x = polys.layout.to_point(voltages);
  FeasibilityReport report;
  for (const Bus& bus : network.buses) {
    const std::string k = std::to_string(bus.id);
    const double p = polys.p(bus.id).eval(x);
    const double q = polys.q(bus.id).eval(x);
    report.injections.emplace_back(p, q);
    check_bounds(report, "V" + k + "^2", polys.v(bus.id).eval(x), network.voltage_sq_bounds(bus.id));
    check_bounds(report, "P" + k, p, network.active_bounds(bus.id));
    check_bounds(report, "Q" + k, q, network.reactive_bounds(bus.id));
  }
  for (std::size_t i = 0; i < network.branches.size(); ++i) {
    const Branch& br = network.branches[i];
    if (!br.s_max) continue;
    const auto& f = polys.flows[i];
    const std::string name = std::to_string(br.from) + "-" + std::to_string(br.to);
    report.constraints.push_back({"|S " + name + "|", *br.s_max - std::hypot(f.p_from.eval(x), f.q_from.eval(x)), false});
    report.constraints.push_back({"|S " + std::to_string(br.to) + "-" + std::to_string(br.from) + "|",
                                  *br.s_max - std::hypot(f.p_to.eval(x), f.q_to.eval(x)), false});
  }
  for (const auto& gen : network.generators) {
    const double p = report.injections[static_cast<std::size_t>(gen.bus - 1)].real();
    report.objective += gen.cost_c2 * p * p + gen.cost_c1 * p + gen.cost_c0;
  }
  for (const auto& c : report.constraints) report.max_violation = std::max(report.max_violation, c.violation());
  return report;
}

RelaxationSolution certify(const Relaxation& relaxation, ConicSolution conic, const RecoverSettings& settings) {
  RelaxationSolution out;
  out.objective = conic.objective;
  out.conic = std::move(conic);
  if (out.conic.x.size() != static_cast<std::size_t>(relaxation.program.num_vars)) return out;
  out.y = relaxation.moments(out.conic.x);
  out.second_moment = relaxation.second_moment_matrix(out.conic.x);
  out.eigenvalues = descending_eigenvalues(0.5 * (out.second_moment + out.second_moment.transpose()));
  out.rank = numerical_rank({out.eigenvalues.data(), static_cast<std::size_t>(out.eigenvalues.size())},
                            settings.rank_tol);
  if (!out.conic.optimal()) return out;
  out.voltages = extract_voltages(out.second_moment, relaxation.polys.layout, settings.rank_tol);
  if (!out.voltages) return out;
  out.report = verify(relaxation.network, *out.voltages);
  out.exact = out.report->feasible(settings.feasibility_tol);
  return out;
}

RelaxationSolution solve_relaxation(const Relaxation& relaxation, const RecoverSettings& settings) {
  return certify(relaxation, solve(relaxation.program, settings.solver), settings);
}

}  // namespace opfrelax
