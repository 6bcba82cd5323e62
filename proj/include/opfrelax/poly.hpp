#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "opfrelax/network.hpp"

namespace opfrelax {

/// Exponent vector alpha of a monomial x^alpha. Entries are stored as 8-bit
/// integers; any operation producing an entry above 255 throws std::overflow_error.
class Exponent {
 public:
  Exponent() = default;
  explicit Exponent(std::size_t num_vars) : powers_(num_vars, 0) {}
  Exponent(std::initializer_list<int> powers);

  static Exponent unit(std::size_t num_vars, std::size_t var, int power = 1);

  std::size_t size() const { return powers_.size(); }
  int operator[](std::size_t i) const { return powers_[i]; }
  void set(std::size_t i, int power);
  int degree() const;
  bool is_zero() const { return degree() == 0; }

  Exponent operator+(const Exponent& other) const;

  bool operator==(const Exponent&) const = default;

  /// Compact digit string, e.g. "01020" (entries above 9 are bracketed).
  std::string digits() const;

 private:
  std::vector<std::uint8_t> powers_;
};

/// Graded lexicographic order: lower total degree first; within a degree a larger
/// power on an earlier variable comes first (x1^2 < x1 x2 < x1 x3 < x2^2 ...).
struct GradedLexLess {
  bool operator()(const Exponent& a, const Exponent& b) const;
};

/// Sparse real polynomial in canonical form: no zero coefficients, one entry per exponent.
class Polynomial {
 public:
  using Terms = std::map<Exponent, double, GradedLexLess>;

  explicit Polynomial(std::size_t num_vars = 0) : num_vars_(num_vars) {}

  static Polynomial constant(std::size_t num_vars, double value);
  static Polynomial variable(std::size_t num_vars, std::size_t var);
  static Polynomial monomial(const Exponent& exponent, double coefficient = 1.0);

  std::size_t num_vars() const { return num_vars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// Total degree; 0 for constants and for the zero polynomial.
  int degree() const;
  double coefficient(const Exponent& exponent) const;
  /// Constant term.
  double constant_term() const;

  void add_term(const Exponent& exponent, double coefficient);

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  Polynomial& operator*=(double scale);
  Polynomial& operator+=(double constant);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator+(Polynomial a, double c) { return a += c; }
  friend Polynomial operator-(Polynomial a, double c) { return a += -c; }
  friend Polynomial operator-(double c, const Polynomial& a) { return (a * -1.0) += c; }
  Polynomial operator-() const { return *this * -1.0; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  bool operator==(const Polynomial& other) const {
    return num_vars_ == other.num_vars_ && terms_ == other.terms_;
  }

  double eval(std::span<const double> point) const;
  Polynomial derivative(std::size_t var) const;
  /// True iff every term has even total degree.
  bool is_even() const;

  /// Human-readable form using the given variable names, e.g. "2*V_d1^2 - V_d1*V_q2 + 1".
  std::string to_string(std::span<const std::string> names) const;
  std::string to_string() const;

 private:
  void require_same_dimension(const Polynomial& other) const;

  std::size_t num_vars_ = 0;
  Terms terms_;
};

/// Variable layout of the voltage polynomials: (V_d1 .. V_dn, V_q of every
/// non-reference bus). The reference bus imaginary part is eliminated (fixed to 0).
class VoltageLayout {
 public:
  VoltageLayout() = default;
  VoltageLayout(int num_buses, int reference_bus);

  int num_buses() const { return num_buses_; }
  int reference_bus() const { return reference_; }
  std::size_t num_vars() const { return static_cast<std::size_t>(2 * num_buses_ - 1); }

  std::size_t vd(int bus_id) const;
  /// Index of V_qk, or nullopt for the reference bus.
  std::optional<std::size_t> vq(int bus_id) const;

  std::vector<std::string> names() const;

  /// Rotates the phasors so the reference angle is zero and flattens them to a point.
  std::vector<double> to_point(std::span<const Complex> voltages) const;
  std::vector<Complex> to_phasors(std::span<const double> point) const;

 private:
  int num_buses_ = 0;
  int reference_ = 1;
};

struct BranchFlowPolynomials {
  Polynomial p_from;  // f_Plm
  Polynomial q_from;  // f_Qlm
  Polynomial p_to;    // f_Pml
  Polynomial q_to;    // f_Qml

  /// f_Slm = f_Plm^2 + f_Qlm^2, built on demand.
  Polynomial s_from() const { return p_from * p_from + q_from * q_from; }
  Polynomial s_to() const { return p_to * p_to + q_to * q_to; }
};

/// Every polynomial of the OPF problem, indexed by bus position (id - 1) and branch position.
struct OpfPolynomials {
  VoltageLayout layout;
  std::vector<Polynomial> voltage_sq;  // f_Vk
  std::vector<Polynomial> active;      // f_Pk (generation = injection + load)
  std::vector<Polynomial> reactive;    // f_Qk
  std::vector<Polynomial> cost;        // f_Ck; zero polynomial where there is no generator
  std::vector<BranchFlowPolynomials> flows;

  const Polynomial& v(int bus_id) const { return voltage_sq.at(static_cast<std::size_t>(bus_id - 1)); }
  const Polynomial& p(int bus_id) const { return active.at(static_cast<std::size_t>(bus_id - 1)); }
  const Polynomial& q(int bus_id) const { return reactive.at(static_cast<std::size_t>(bus_id - 1)); }
  const Polynomial& c(int bus_id) const { return cost.at(static_cast<std::size_t>(bus_id - 1)); }

  std::vector<const Polynomial*> all() const;
};

OpfPolynomials build_opf_polynomials(const NetworkCase& network);

}  // namespace opfrelax
