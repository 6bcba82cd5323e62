#include <algorithm>
#include <stdexcept>

#include "opfrelax/hierarchy.hpp"

namespace opfrelax {

namespace {

// Exponents of total degree `remaining` over positions pos.., larger powers on earlier variables first.
void generate(std::size_t pos, int remaining, Exponent& current, std::vector<Exponent>& out) {
  if (pos + 1 == current.size()) {
    current.set(pos, remaining);
    out.push_back(current);
    current.set(pos, 0);
    return;
  }
  for (int p = remaining; p >= 0; --p) {
    current.set(pos, p);
    generate(pos + 1, remaining - p, current, out);
  }
  current.set(pos, 0);
}

}  // namespace

MonomialBasis::MonomialBasis(std::size_t num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
  if (num_vars < 1) throw std::invalid_argument("basis: need at least one variable");
  if (degree < 0) throw std::invalid_argument("basis: negative degree");
  Exponent current(num_vars);
  for (int d = 0; d <= degree; ++d) generate(0, d, current, monomials_);
  for (std::size_t i = 0; i < monomials_.size(); ++i) index_.emplace(monomials_[i], i);
}

std::optional<std::size_t> MonomialBasis::find(const Exponent& e) const {
  const auto it = index_.find(e);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t MonomialBasis::count_up_to(int d) const {
  return static_cast<std::size_t>(
      std::count_if(monomials_.begin(), monomials_.end(), [d](const Exponent& e) { return e.degree() <= d; }));
}

MonomialBasis basis(std::size_t num_vars, int gamma) { return MonomialBasis(num_vars, gamma); }

std::uint64_t basis_size(std::uint64_t num_vars, std::uint64_t gamma) {
  std::uint64_t c = 1;
  for (std::uint64_t i = 1; i <= gamma; ++i) c = c * (num_vars + i) / i;
  return c;
}

LiftedIndex::LiftedIndex(std::size_t num_vars, int order) : order_(order), slots_(num_vars, 2 * order) {
  if (order < 0) throw std::invalid_argument("LiftedIndex: negative order");
}

std::size_t LiftedIndex::slot(const Exponent& e) const {
  if (e.size() != num_vars()) throw std::invalid_argument("LiftedIndex: exponent dimension mismatch");
  if (e.degree() > max_degree()) {
    throw std::domain_error("monomial x^" + e.digits() + " has degree " + std::to_string(e.degree()) +
                            ", above the lifted degree " + std::to_string(max_degree()));
  }
  return *slots_.find(e);
}

double LinearForm::eval(std::span<const double> y) const {
  double v = 0.0;
  for (const auto& [s, c] : terms) v += c * y[s];
  return v;
}

LinearForm apply_ly(const Polynomial& p, const LiftedIndex& idx) {
  LinearForm form;
  for (const auto& [e, c] : p.terms()) {
    if (e.degree() > idx.max_degree()) {
      throw std::domain_error("apply_ly: term " + std::to_string(c) + "*x^" + e.digits() + " has degree " +
                              std::to_string(e.degree()) + ", above the lifted degree " +
                              std::to_string(idx.max_degree()));
    }
    form.terms.emplace_back(idx.slot(e), c);
  }
  std::sort(form.terms.begin(), form.terms.end());
  return form;
}

std::vector<double> lift_moments(const LiftedIndex& idx, std::span<const double> point) {
  if (point.size() != idx.num_vars()) throw std::invalid_argument("lift_moments: point dimension mismatch");
  std::vector<double> y(idx.num_slots());
  for (std::size_t s = 0; s < y.size(); ++s) {
    const Exponent& e = idx.exponent(s);
    double v = 1.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (int k = 0; k < e[i]; ++k) v *= point[i];
    }
    y[s] = v;
  }
  return y;
}

Eigen::MatrixXd SymbolicMatrix::evaluate(std::span<const double> y) const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)).eval(y);
    }
  }
  return m;
}

SymbolicMatrix moment_matrix(const LiftedIndex& idx, int order) {
  if (order < 0 || order > idx.order()) {
    throw std::invalid_argument("moment_matrix: order " + std::to_string(order) + " not covered by lifted order " +
                                std::to_string(idx.order()));
  }
  SymbolicMatrix m;
  m.rows = basis(idx.num_vars(), order);
  const std::size_t n = m.rows.size();
  m.entries.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m.entries[i * n + j].terms = {{idx.slot(m.rows[i] + m.rows[j]), 1.0}};
    }
  }
  return m;
}

SymbolicMatrix localizing_matrix(const Polynomial& g, const LiftedIndex& idx, int order) {
  if (order < 0) throw std::invalid_argument("localizing_matrix: negative order");
  if (g.num_vars() != idx.num_vars()) throw std::invalid_argument("localizing_matrix: dimension mismatch");
  SymbolicMatrix m;
  m.rows = basis(idx.num_vars(), order);
  const std::size_t n = m.rows.size();
  m.entries.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const Exponent shift = m.rows[i] + m.rows[j];
      LinearForm form;
      for (const auto& [e, c] : g.terms()) {
        const Exponent total = e + shift;
        if (total.degree() > idx.max_degree()) {
          throw std::domain_error("localizing_matrix: term " + std::to_string(c) + "*x^" + total.digits() +
                                  " has degree " + std::to_string(total.degree()) + ", above the lifted degree " +
                                  std::to_string(idx.max_degree()));
        }
        form.terms.emplace_back(idx.slot(total), c);
      }
      std::sort(form.terms.begin(), form.terms.end());
      m.entries[i * n + j] = form;
      m.entries[j * n + i] = std::move(form);
    }
  }
  return m;
}

ParityBlocks split_by_parity(const MonomialBasis& rows) {
  ParityBlocks out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    (rows[i].degree() % 2 == 0 ? out.even : out.odd).push_back(i);
  }
  return out;
}

bool even_reduction_applies(std::span<const Polynomial* const> polynomials) {
  return std::all_of(polynomials.begin(), polynomials.end(), [](const Polynomial* p) { return p->is_even(); });
}

}  // namespace opfrelax
