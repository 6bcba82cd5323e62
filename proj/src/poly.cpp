#include "opfrelax/poly.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace opfrelax {

namespace {

std::uint8_t checked_power(int power) {
  if (power < 0) throw std::invalid_argument("Exponent: negative power");
  if (power > std::numeric_limits<std::uint8_t>::max()) {
    throw std::overflow_error("Exponent: power " + std::to_string(power) + " exceeds 255");
  }
  return static_cast<std::uint8_t>(power);
}

}  // namespace

Exponent::Exponent(std::initializer_list<int> powers) {
  powers_.reserve(powers.size());
  for (int p : powers) powers_.push_back(checked_power(p));
}

Exponent Exponent::unit(std::size_t num_vars, std::size_t var, int power) {
  if (var >= num_vars) throw std::out_of_range("Exponent::unit: variable index out of range");
  Exponent e(num_vars);
  e.set(var, power);
  return e;
}

void Exponent::set(std::size_t i, int power) { powers_.at(i) = checked_power(power); }

int Exponent::degree() const {
  int d = 0;
  for (auto p : powers_) d += p;
  return d;
}

Exponent Exponent::operator+(const Exponent& other) const {
  if (other.size() != size()) throw std::invalid_argument("Exponent: dimension mismatch");
  Exponent out(size());
  for (std::size_t i = 0; i < size(); ++i) out.set(i, powers_[i] + other.powers_[i]);
  return out;
}

std::string Exponent::digits() const {
  std::string s;
  for (auto p : powers_) {
    if (p < 10) s += static_cast<char>('0' + p);
    else s += "[" + std::to_string(p) + "]";
  }
  return s;
}

bool GradedLexLess::operator()(const Exponent& a, const Exponent& b) const {
  const int da = a.degree();
  const int db = b.degree();
  if (da != db) return da < db;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i] != b[i]) return a[i] > b[i];
  }
  return a.size() < b.size();
}

Polynomial Polynomial::constant(std::size_t num_vars, double value) {
  Polynomial p(num_vars);
  p.add_term(Exponent(num_vars), value);
  return p;
}

Polynomial Polynomial::variable(std::size_t num_vars, std::size_t var) {
  return monomial(Exponent::unit(num_vars, var));
}

Polynomial Polynomial::monomial(const Exponent& exponent, double coefficient) {
  Polynomial p(exponent.size());
  p.add_term(exponent, coefficient);
  return p;
}

int Polynomial::degree() const {
  // Terms are graded, so the last key has the largest degree.
  return terms_.empty() ? 0 : terms_.rbegin()->first.degree();
}

double Polynomial::coefficient(const Exponent& exponent) const {
  const auto it = terms_.find(exponent);
  return it == terms_.end() ? 0.0 : it->second;
}

double Polynomial::constant_term() const { return coefficient(Exponent(num_vars_)); }

void Polynomial::add_term(const Exponent& exponent, double coefficient) {
  if (exponent.size() != num_vars_) throw std::invalid_argument("Polynomial: dimension mismatch");
  if (coefficient == 0.0) return;
  auto [it, inserted] = terms_.try_emplace(exponent, coefficient);
  if (!inserted) {
    it->second += coefficient;
    if (it->second == 0.0) terms_.erase(it);
  }
}

void Polynomial::require_same_dimension(const Polynomial& other) const {
  if (other.num_vars_ != num_vars_) {
    throw std::invalid_argument("Polynomial: dimension mismatch (" + std::to_string(num_vars_) +
                                " vs " + std::to_string(other.num_vars_) + ")");
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  require_same_dimension(other);
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  require_same_dimension(other);
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double scale) {
  if (scale == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= scale;
  return *this;
}

Polynomial& Polynomial::operator+=(double constant) {
  add_term(Exponent(num_vars_), constant);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  a.require_same_dimension(b);
  Polynomial out(a.num_vars_);
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) out.add_term(ea + eb, ca * cb);
  }
  return out;
}

double Polynomial::eval(std::span<const double> point) const {
  if (point.size() != num_vars_) {
    throw std::invalid_argument("Polynomial::eval: point has " + std::to_string(point.size()) +
                                " entries, expected " + std::to_string(num_vars_));
  }
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (std::size_t i = 0; i < num_vars_; ++i) {
      for (int k = 0; k < e[i]; ++k) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

Polynomial Polynomial::derivative(std::size_t var) const {
  if (var >= num_vars_) throw std::out_of_range("Polynomial::derivative: variable out of range");
  Polynomial out(num_vars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponent d = e;
    d.set(var, e[var] - 1);
    out.add_term(d, c * e[var]);
  }
  return out;
}

bool Polynomial::is_even() const {
  for (const auto& [e, c] : terms_) {
    if (e.degree() % 2 != 0) return false;
  }
  return true;
}

std::string Polynomial::to_string(std::span<const std::string> names) const {
  if (names.size() != num_vars_) throw std::invalid_argument("Polynomial::to_string: name count");
  if (terms_.empty()) return "0";
  std::ostringstream out;
  out << std::setprecision(10);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    double magnitude = c;
    if (first) {
      if (c < 0) out << "-";
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    magnitude = std::abs(c);
    first = false;
    const bool constant = e.is_zero();
    if (constant || magnitude != 1.0) {
      out << magnitude;
      if (!constant) out << "*";
    }
    bool first_factor = true;
    for (std::size_t i = 0; i < num_vars_; ++i) {
      if (e[i] == 0) continue;
      if (!first_factor) out << "*";
      first_factor = false;
      out << names[i];
      if (e[i] > 1) out << "^" << e[i];
    }
  }
  return out.str();
}

std::string Polynomial::to_string() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < num_vars_; ++i) names.push_back("x" + std::to_string(i + 1));
  return to_string(names);
}

}  // namespace opfrelax
