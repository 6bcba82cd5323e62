#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "opfrelax/conic.hpp"
#include "opfrelax/network.hpp"
#include "opfrelax/poly.hpp"

namespace opfrelax {

/// Monomials of degree <= degree in graded lexicographic order.
class MonomialBasis {
 public:
  MonomialBasis() = default;
  MonomialBasis(std::size_t num_vars, int degree);

  std::size_t num_vars() const { return num_vars_; }
  int degree() const { return degree_; }
  std::size_t size() const { return monomials_.size(); }
  const Exponent& operator[](std::size_t i) const { return monomials_[i]; }
  const std::vector<Exponent>& monomials() const { return monomials_; }

  std::optional<std::size_t> find(const Exponent& e) const;
  /// Number of leading monomials with degree <= d.
  std::size_t count_up_to(int d) const;

 private:
  std::size_t num_vars_ = 0;
  int degree_ = 0;
  std::vector<Exponent> monomials_;
  std::map<Exponent, std::size_t, GradedLexLess> index_;
};

MonomialBasis basis(std::size_t num_vars, int gamma);

/// C(num_vars + gamma, gamma).
std::uint64_t basis_size(std::uint64_t num_vars, std::uint64_t gamma);

/// One scalar slot y_alpha per exponent of degree <= 2 * order.
class LiftedIndex {
 public:
  LiftedIndex() = default;
  LiftedIndex(std::size_t num_vars, int order);

  std::size_t num_vars() const { return slots_.num_vars(); }
  int order() const { return order_; }
  int max_degree() const { return 2 * order_; }
  std::size_t num_slots() const { return slots_.size(); }
  const Exponent& exponent(std::size_t slot) const { return slots_[slot]; }
  /// Throws std::domain_error naming the exponent when its degree exceeds 2 * order.
  std::size_t slot(const Exponent& e) const;

 private:
  int order_ = 0;
  MonomialBasis slots_;
};

/// Linear function of the slots: sum coef * y[slot].
struct LinearForm {
  std::vector<std::pair<std::size_t, double>> terms;

  double eval(std::span<const double> y) const;
  bool operator==(const LinearForm&) const = default;
};

/// L_y{p}; constants land on the slot of the zero exponent.
LinearForm apply_ly(const Polynomial& p, const LiftedIndex& idx);

/// y_alpha = point^alpha for every slot.
std::vector<double> lift_moments(const LiftedIndex& idx, std::span<const double> point);

/// Square matrix of linear forms, indexed by a row basis.
struct SymbolicMatrix {
  MonomialBasis rows;
  std::vector<LinearForm> entries;  // row-major

  std::size_t size() const { return rows.size(); }
  const LinearForm& at(std::size_t i, std::size_t j) const { return entries[i * size() + j]; }
  Eigen::MatrixXd evaluate(std::span<const double> y) const;
};

/// M_order{y} = L_y{x x'} over basis(num_vars, order).
SymbolicMatrix moment_matrix(const LiftedIndex& idx, int order);
/// M_order{g y} = L_y{g x x'}.
SymbolicMatrix localizing_matrix(const Polynomial& g, const LiftedIndex& idx, int order);

/// Row positions of a matrix basis split by monomial degree parity.
struct ParityBlocks {
  std::vector<std::size_t> even;
  std::vector<std::size_t> odd;
};
ParityBlocks split_by_parity(const MonomialBasis& rows);

/// True iff every polynomial has only even-degree terms (odd moments may then be fixed to zero).
bool even_reduction_applies(std::span<const Polynomial* const> polynomials);

enum class RelaxationKind { FirstOrder, Moment, Mixed };

struct RelaxationSpec {
  RelaxationKind kind = RelaxationKind::Moment;
  int order = 1;

  /// "sdp", "moment:K" or "mixed:K"; throws std::invalid_argument otherwise.
  static RelaxationSpec parse(std::string_view text);
  std::string to_string() const;
};

/// Assembles a lifted conic program: variables for the kept slots, localizing
/// constraints, equality rows and the moment matrix. Mixed programs replace
/// PSD blocks by diagonal and 2x2-minor cones.
class LiftedProgramBuilder {
 public:
  LiftedProgramBuilder(std::size_t num_vars, RelaxationSpec spec, bool even_reduction);

  const LiftedIndex& index() const { return index_; }
  const RelaxationSpec& spec() const { return spec_; }
  bool even_reduced() const { return even_reduced_; }
  /// Program variable of each slot, -1 where the slot is fixed to zero.
  const std::vector<int>& slot_variables() const { return slot_var_; }
  int slot_variable(const Exponent& e) const;

  /// L_y{p} over program variables.
  AffineExpr ly(const Polynomial& p) const;
  AffineExpr ly(const LinearForm& form) const;

  int add_auxiliary(std::string name);
  void add_objective(const AffineExpr& term);
  /// g >= 0 through its localizing matrix of order gamma - ceil(deg g / 2) (skipped if negative).
  void add_inequality(const Polynomial& g, const std::string& label);
  /// g == 0 through every distinct entry of its localizing matrix.
  void add_equality(const Polynomial& g, const std::string& label);
  void add_scalar_equality(AffineExpr expr, const std::string& label);
  void add_cone(ConeKind kind, std::vector<AffineExpr> entries, const std::string& label);
  /// Emits a symmetric matrix constraint (parity split, PSD or minors per the relaxation kind).
  void add_matrix(const SymbolicMatrix& m, const std::string& label, bool relax_to_minors, bool mark = true);

  /// Adds the moment matrix constraints and y_0 = 1, and returns the program.
  ConicProgram finish();
  /// Returns the program as assembled so far (no moment matrix, no normalization row).
  ConicProgram take_program();

 private:
  void mark_used(const AffineExpr& e);
  void emit_block(const SymbolicMatrix& m, const std::vector<std::size_t>& rows, const std::string& label,
                  bool relax_to_minors, bool mark);
  void emit_moment_mixed(const SymbolicMatrix& m);

  RelaxationSpec spec_;
  LiftedIndex index_;
  bool even_reduced_ = false;
  std::vector<int> slot_var_;
  std::vector<bool> used_;
  ConicProgram program_;
};

struct BuildOptions {
  /// Tracking targets (bus id, P target): adds weight * sum (L_y{f_Pk} - target)^2 to the objective.
  std::vector<std::pair<int, double>> targets;
  double weight = 1e3;
  /// Keep the generation cost in the objective next to the tracking term.
  bool include_cost = true;
  bool even_reduction = true;
};

/// A built relaxation with everything needed to interpret its solutions.
struct Relaxation {
  RelaxationSpec spec;
  NetworkCase network;
  OpfPolynomials polys;
  LiftedIndex index;
  bool even_reduced = false;
  std::vector<int> slot_var;
  ConicProgram program;
  /// Auxiliary program variables and the polynomial each equals at a lifted point.
  std::vector<std::pair<int, Polynomial>> auxiliary;

  /// Program point y_alpha = v^alpha (auxiliaries evaluated from their polynomials).
  std::vector<double> lift(std::span<const Complex> voltages) const;
  /// Slot values y (zero for eliminated slots) from a program point.
  std::vector<double> moments(std::span<const double> x) const;
  double ly(const Polynomial& p, std::span<const double> x) const;
  /// L_y{x x'} for the degree-one monomials, the matrix whose rank certifies exactness.
  Eigen::MatrixXd second_moment_matrix(std::span<const double> x) const;
};

Relaxation build_relaxation(const NetworkCase& network, RelaxationSpec spec, const BuildOptions& options = {});
/// First-order relaxation assembled constraint by constraint (scalar bounds, cones, PSD on L_y{x x'}).
Relaxation build_first_order(const NetworkCase& network);
Relaxation build_moment(const NetworkCase& network, int gamma);
Relaxation build_mixed(const NetworkCase& network, int gamma);

/// Generic polynomial problem, relaxed with the same machinery (used for synthetic checks).
struct PolynomialProblem {
  std::size_t num_vars = 0;
  std::vector<std::string> var_names;
  Polynomial objective;
  std::vector<std::pair<Polynomial, std::string>> inequalities;  // g >= 0
  std::vector<std::pair<Polynomial, std::string>> equalities;    // g == 0
};

struct GenericRelaxation {
  ConicProgram program;
  LiftedIndex index;
  std::vector<int> slot_var;
  bool even_reduced = false;
};

GenericRelaxation relax(const PolynomialProblem& problem, RelaxationSpec spec, bool even_reduction = true);

}  // namespace opfrelax
