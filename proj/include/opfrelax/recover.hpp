#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "opfrelax/conic.hpp"
#include "opfrelax/hierarchy.hpp"
#include "opfrelax/network.hpp"

namespace opfrelax {

/// Count of eigenvalues above ratio_tol * max (input sorted descending). Zero for an all-zero spectrum.
int numerical_rank(std::span<const double> eigenvalues, double ratio_tol);

/// Eigenvalues of a symmetric matrix, descending.
Eigen::VectorXd descending_eigenvalues(const Eigen::MatrixXd& m);

/// Phasors from a rank-one L_y{x x'}: sqrt(lambda) * eta mapped through the layout, sign chosen
/// so the reference bus has V_d >= 0. Returns nullopt when the numerical rank is not one.
std::optional<std::vector<Complex>> extract_voltages(const Eigen::MatrixXd& second_moment, const VoltageLayout& layout,
                                                     double ratio_tol);

struct ConstraintResidual {
  std::string label;
  /// Equalities: value - target. Inequalities: slack, nonnegative when satisfied.
  double residual = 0.0;
  bool equality = false;

  double violation() const;
};

struct FeasibilityReport {
  std::vector<ConstraintResidual> constraints;
  std::vector<Complex> injections;  // generation P + jQ per bus
  double max_violation = 0.0;
  double objective = 0.0;

  bool feasible(double tol) const { return max_violation <= tol; }
};

/// Evaluates every constraint of the OPF problem at the given phasors.
FeasibilityReport verify(const NetworkCase& network, std::span<const Complex> voltages);

struct RecoverSettings {
  SolverSettings solver;
  double rank_tol = 1e-5;
  /// Largest constraint violation of the extracted point accepted as exact.
  double feasibility_tol = 1e-3;
};

struct RelaxationSolution {
  ConicSolution conic;
  std::vector<double> y;
  Eigen::MatrixXd second_moment;
  Eigen::VectorXd eigenvalues;
  int rank = 0;
  double objective = 0.0;
  bool exact = false;
  std::optional<std::vector<Complex>> voltages;
  std::optional<FeasibilityReport> report;
};

/// Solves the program and certifies the result (rank, extraction, feasibility of the extracted point).
RelaxationSolution solve_relaxation(const Relaxation& relaxation, const RecoverSettings& settings = {});
/// Certification only, for a program point obtained elsewhere.
RelaxationSolution certify(const Relaxation& relaxation, ConicSolution conic, const RecoverSettings& settings = {});

struct NewtonResult {
  bool converged = false;
  std::vector<Complex> voltages;
  int iterations = 0;
  double mismatch = 0.0;
  std::string message;
};

/// |V| setpoints (or 1) at angle zero.
std::vector<Complex> flat_start(const NetworkCase& network);

/// Newton-Raphson on the polar mismatch equations. The reference bus is the slack; a bus
/// with pinned |V| and P is PV, otherwise one with pinned P and Q is PQ. Stops when the
/// largest mismatch is below tol; a singular Jacobian or non-finite iterate is reported as divergence.
NewtonResult newton_power_flow(const NetworkCase& network, std::span<const Complex> start, double tol = 1e-10,
                               int max_iterations = 50);

}  // namespace opfrelax
