#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "opfrelax/errors.hpp"

namespace opfrelax {

/// Sparse affine function sum_i coef_i * x[var_i] + constant.
struct AffineExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  static AffineExpr variable(int var, double coef = 1.0);
  static AffineExpr constant_value(double value);

  AffineExpr& add(int var, double coef);
  AffineExpr& operator+=(const AffineExpr& other);
  AffineExpr& operator-=(const AffineExpr& other);
  AffineExpr& operator*=(double scale);
  friend AffineExpr operator+(AffineExpr a, const AffineExpr& b) { return a += b; }
  friend AffineExpr operator-(AffineExpr a, const AffineExpr& b) { return a -= b; }
  friend AffineExpr operator*(AffineExpr a, double s) { return a *= s; }
  friend AffineExpr operator*(double s, AffineExpr a) { return a *= s; }

  /// Sorts terms by variable, merges duplicates and drops zero coefficients.
  AffineExpr& normalize();
  bool is_constant() const { return terms.empty(); }
  double eval(std::span<const double> x) const;

  bool operator==(const AffineExpr&) const = default;
};

enum class ConeKind {
  NonNegative,         // every entry >= 0
  SecondOrder,         // e[0] >= ||e[1:]||
  RotatedSecondOrder,  // e[0] * e[1] >= ||e[2:]||^2, e[0], e[1] >= 0
  Psd,                 // packed lower triangle (column-major) of a symmetric matrix
};

std::string to_string(ConeKind kind);

struct ConeConstraint {
  ConeKind kind = ConeKind::NonNegative;
  std::vector<AffineExpr> entries;
  int order = 0;  // matrix order for Psd, otherwise entries.size()
  std::string label;
};

/// Index of entry (i, j), i >= j, in the packed lower triangle of an order-n matrix.
std::size_t packed_index(int n, int i, int j);

/// minimize objective(x) subject to equalities(x) == 0 and cone memberships.
struct ConicProgram {
  int num_vars = 0;
  std::vector<std::string> var_names;
  AffineExpr objective;
  std::vector<AffineExpr> equalities;
  std::vector<std::string> equality_labels;
  std::vector<ConeConstraint> cones;

  int add_variable(std::string name);
  void add_equality(AffineExpr expr, std::string label);
  void add_cone(ConeKind kind, std::vector<AffineExpr> entries, std::string label);
  void add_psd(int order, std::vector<AffineExpr> packed, std::string label);

  /// Throws std::invalid_argument if a slot references a missing variable or a
  /// Psd cone has the wrong number of entries.
  void check() const;
  std::size_t cone_dimension() const;
};

struct Violation {
  double value = 0.0;  // 0 when satisfied, positive amount otherwise
  std::string label;
};

struct ViolationReport {
  Violation equality;
  Violation cone;
  double worst() const { return std::max(equality.value, cone.value); }
};

/// Equality violations are absolute residuals. Cone violations are measured the
/// way the solver's optimality check does: PSD blocks by -min eigenvalue / (1 + ||block||),
/// second-order cones by the negative margin.
ViolationReport max_violation(const ConicProgram& program, std::span<const double> x);

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

std::string to_string(SolveStatus status);

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<double> x;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;

  bool optimal() const { return status == SolveStatus::Optimal; }
};

enum class Backend { InteriorPoint, Splitting };

struct SolverSettings {
  double tolerance = 1e-8;
  int max_iterations = 50000;
  bool scaling = true;
  int verbosity = 0;
  Backend backend = Backend::InteriorPoint;
};

/// Cone product used by the solvers: [nonnegative l | second-order q_1..q_k | psd s_1..s_m],
/// psd blocks packed lower-triangle column-major with off-diagonals scaled by sqrt(2).
struct ConeDims {
  int nonneg = 0;
  std::vector<int> soc;
  std::vector<int> psd;

  int size() const;
  /// Degree of the cone (l + #soc + sum of psd orders).
  int degree() const;
};

/// minimize c'x + c0 subject to A x = b, G x + s = h, s in K.
struct StandardForm {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  double c0 = 0.0;
  ConeDims dims;
};

StandardForm to_standard_form(const ConicProgram& program);

/// Extension point for other conic solvers. Implementations must be reentrant.
class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  /// Solves the standard form; ConicSolution::x holds the standard-form variables.
  virtual ConicSolution solve(const StandardForm& problem, const SolverSettings& settings) const = 0;
};

std::unique_ptr<ConicBackend> make_backend(Backend backend);

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings = {});
ConicSolution solve(const ConicProgram& program, const SolverSettings& settings,
                    const ConicBackend& backend);

/// Euclidean projections (splitting-method kernels). Throw NumericalError on eigensolver failure.
Eigen::MatrixXd project_psd(const Eigen::MatrixXd& block);
Eigen::VectorXd project_soc(const Eigen::VectorXd& v);

/// Sparse text format for external cross-checks.
void write_program(std::ostream& out, const ConicProgram& program);
ConicProgram read_program(std::istream& in);

}  // namespace opfrelax
