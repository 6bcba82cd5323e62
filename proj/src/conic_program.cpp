#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "opfrelax/conic.hpp"

namespace opfrelax {

AffineExpr AffineExpr::variable(int var, double coef) {
  AffineExpr e;
  e.add(var, coef);
  return e;
}

AffineExpr AffineExpr::constant_value(double value) {
  AffineExpr e;
  e.constant = value;
  return e;
}

AffineExpr& AffineExpr::add(int var, double coef) {
  if (coef != 0.0) terms.emplace_back(var, coef);
  return *this;
}

AffineExpr& AffineExpr::operator+=(const AffineExpr& other) {
  terms.insert(terms.end(), other.terms.begin(), other.terms.end());
  constant += other.constant;
  return normalize();
}

AffineExpr& AffineExpr::operator-=(const AffineExpr& other) {
  for (const auto& [v, c] : other.terms) terms.emplace_back(v, -c);
  constant -= other.constant;
  return normalize();
}

AffineExpr& AffineExpr::operator*=(double scale) {
  for (auto& t : terms) t.second *= scale;
  constant *= scale;
  return normalize();
}

AffineExpr& AffineExpr::normalize() {
  std::sort(terms.begin(), terms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::pair<int, double>> merged;
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().first == t.first) merged.back().second += t.second;
    else merged.push_back(t);
  }
  std::erase_if(merged, [](const auto& t) { return t.second == 0.0; });
  terms = std::move(merged);
  return *this;
}

double AffineExpr::eval(std::span<const double> x) const {
  double v = constant;
  for (const auto& [i, c] : terms) v += c * x[static_cast<std::size_t>(i)];
  return v;
}

std::string to_string(ConeKind kind) {
  switch (kind) {
    case ConeKind::NonNegative: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
    case ConeKind::RotatedSecondOrder: return "rsoc";
    case ConeKind::Psd: return "psd";
  }
  return "?";
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "?";
}

std::size_t packed_index(int n, int i, int j) {
  if (i < j) std::swap(i, j);
  // Columns 0..j-1 hold n, n-1, ..., n-j+1 entries.
  const auto col_start = static_cast<std::size_t>(j * n - j * (j - 1) / 2);
  return col_start + static_cast<std::size_t>(i - j);
}

int ConicProgram::add_variable(std::string name) {
  var_names.push_back(std::move(name));
  return num_vars++;
}

void ConicProgram::add_equality(AffineExpr expr, std::string label) {
  expr.normalize();
  equalities.push_back(std::move(expr));
  equality_labels.push_back(std::move(label));
}

void ConicProgram::add_cone(ConeKind kind, std::vector<AffineExpr> entries, std::string label) {
  if (kind == ConeKind::Psd) throw std::invalid_argument("add_cone: use add_psd for PSD cones");
  for (auto& e : entries) e.normalize();
  ConeConstraint c;
  c.kind = kind;
  c.order = static_cast<int>(entries.size());
  c.entries = std::move(entries);
  c.label = std::move(label);
  cones.push_back(std::move(c));
}

void ConicProgram::add_psd(int order, std::vector<AffineExpr> packed, std::string label) {
  for (auto& e : packed) e.normalize();
  ConeConstraint c;
  c.kind = ConeKind::Psd;
  c.order = order;
  c.entries = std::move(packed);
  c.label = std::move(label);
  cones.push_back(std::move(c));
}

void ConicProgram::check() const {
  if (static_cast<int>(var_names.size()) != num_vars) {
    throw std::invalid_argument("ConicProgram: variable name table size mismatch");
  }
  auto check_expr = [&](const AffineExpr& e, const std::string& where) {
    for (const auto& [v, c] : e.terms) {
      if (v < 0 || v >= num_vars) {
        throw std::invalid_argument(where + ": references variable " + std::to_string(v) +
                                    " of " + std::to_string(num_vars));
      }
      if (!std::isfinite(c)) throw std::invalid_argument(where + ": non-finite coefficient");
    }
    if (!std::isfinite(e.constant)) throw std::invalid_argument(where + ": non-finite constant");
  };
  check_expr(objective, "objective");
  if (equality_labels.size() != equalities.size()) {
    throw std::invalid_argument("ConicProgram: equality label table size mismatch");
  }
  for (std::size_t i = 0; i < equalities.size(); ++i) check_expr(equalities[i], equality_labels[i]);
  for (const auto& cone : cones) {
    for (const auto& e : cone.entries) check_expr(e, cone.label);
    const auto n = static_cast<std::size_t>(cone.order);
    switch (cone.kind) {
      case ConeKind::Psd:
        if (cone.order < 1 || cone.entries.size() != n * (n + 1) / 2) {
          throw std::invalid_argument(cone.label + ": PSD cone of order " +
                                      std::to_string(cone.order) + " needs " +
                                      std::to_string(n * (n + 1) / 2) + " packed entries");
        }
        break;
      case ConeKind::NonNegative:
        if (cone.entries.empty()) throw std::invalid_argument(cone.label + ": empty cone");
        break;
      case ConeKind::SecondOrder:
        if (cone.entries.empty()) throw std::invalid_argument(cone.label + ": empty cone");
        break;
      case ConeKind::RotatedSecondOrder:
        if (cone.entries.size() < 2) throw std::invalid_argument(cone.label + ": rotated cone needs >= 2 entries");
        break;
    }
  }
}

std::size_t ConicProgram::cone_dimension() const {
  std::size_t d = 0;
  for (const auto& c : cones) d += c.entries.size();
  return d;
}

namespace {

double cone_violation(const ConeConstraint& cone, std::span<const double> x) {
  std::vector<double> v;
  v.reserve(cone.entries.size());
  for (const auto& e : cone.entries) v.push_back(e.eval(x));
  switch (cone.kind) {
    case ConeKind::NonNegative: {
      double worst = 0.0;
      for (double e : v) worst = std::max(worst, -e);
      return worst;
    }
    case ConeKind::SecondOrder: {
      double norm = 0.0;
      for (std::size_t i = 1; i < v.size(); ++i) norm += v[i] * v[i];
      return std::max(0.0, std::sqrt(norm) - v[0]);
    }
    case ConeKind::RotatedSecondOrder: {
      const double u = v[0];
      const double w = v[1];
      double norm = (u - w) * (u - w);
      for (std::size_t i = 2; i < v.size(); ++i) norm += 4.0 * v[i] * v[i];
      return std::max(0.0, 0.5 * (std::sqrt(norm) - (u + w)));
    }
    case ConeKind::Psd: {
      const int n = cone.order;
      Eigen::MatrixXd m(n, n);
      for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) m(i, j) = m(j, i) = v[packed_index(n, i, j)];
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
      const double lambda_min = eig.eigenvalues()(0);
      return std::max(0.0, -lambda_min) / (1.0 + m.norm());
    }
  }
  return 0.0;
}

}  // namespace

ViolationReport max_violation(const ConicProgram& program, std::span<const double> x) {
  if (static_cast<int>(x.size()) != program.num_vars) {
    throw std::invalid_argument("max_violation: point has wrong dimension");
  }
  ViolationReport report;
  for (std::size_t i = 0; i < program.equalities.size(); ++i) {
    const double r = std::abs(program.equalities[i].eval(x));
    if (r > report.equality.value) report.equality = {r, program.equality_labels[i]};
  }
  for (const auto& cone : program.cones) {
    const double r = cone_violation(cone, x);
    if (r > report.cone.value) report.cone = {r, cone.label};
  }
  return report;
}

}  // namespace opfrelax
