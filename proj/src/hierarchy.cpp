#include <algorithm>
#include <charconv>
#include <set>
#include <stdexcept>

#include "opfrelax/hierarchy.hpp"

namespace opfrelax {

RelaxationSpec RelaxationSpec::parse(std::string_view text) {
  const auto bad = [&]() {
    return std::invalid_argument("unknown relaxation '" + std::string(text) +
                                 "' (expected sdp, moment:K with K >= 1, or mixed:K with K >= 2)");
  };
  if (text == "sdp") return {RelaxationKind::FirstOrder, 1};
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw bad();
  const std::string_view head = text.substr(0, colon);
  const std::string_view tail = text.substr(colon + 1);
  int order = 0;
  const auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), order);
  if (ec != std::errc() || ptr != tail.data() + tail.size()) throw bad();
  if (head == "moment" && order >= 1) return {RelaxationKind::Moment, order};
  if (head == "mixed" && order >= 2) return {RelaxationKind::Mixed, order};
  throw bad();
}

std::string RelaxationSpec::to_string() const {
  switch (kind) {
    case RelaxationKind::FirstOrder: return "sdp";
    case RelaxationKind::Moment: return "moment:" + std::to_string(order);
    case RelaxationKind::Mixed: return "mixed:" + std::to_string(order);
  }
  return "?";
}

namespace {

void check_spec(const RelaxationSpec& spec) {
  switch (spec.kind) {
    case RelaxationKind::FirstOrder:
      if (spec.order != 1) throw std::invalid_argument("the first-order relaxation has order 1");
      break;
    case RelaxationKind::Moment:
      if (spec.order < 1) throw std::invalid_argument("moment relaxation needs order >= 1");
      break;
    case RelaxationKind::Mixed:
      if (spec.order < 2) throw std::invalid_argument("mixed relaxation needs order >= 2");
      break;
  }
}

int localizing_order(int gamma, const Polynomial& g) { return gamma - (g.degree() + 1) / 2; }

}  // namespace

LiftedProgramBuilder::LiftedProgramBuilder(std::size_t num_vars, RelaxationSpec spec, bool even_reduction)
    : spec_(spec), even_reduced_(even_reduction) {
  check_spec(spec_);
  index_ = LiftedIndex(num_vars, spec_.order);
  slot_var_.assign(index_.num_slots(), -1);
  for (std::size_t s = 0; s < index_.num_slots(); ++s) {
    const Exponent& e = index_.exponent(s);
    if (even_reduced_ && e.degree() % 2 != 0) continue;
    slot_var_[s] = program_.add_variable("y_" + e.digits());
  }
  used_.assign(static_cast<std::size_t>(program_.num_vars), false);
}

int LiftedProgramBuilder::slot_variable(const Exponent& e) const { return slot_var_[index_.slot(e)]; }

AffineExpr LiftedProgramBuilder::ly(const LinearForm& form) const {
  AffineExpr out;
  for (const auto& [s, c] : form.terms) {
    if (slot_var_[s] >= 0) out.add(slot_var_[s], c);
  }
  return out.normalize();
}

AffineExpr LiftedProgramBuilder::ly(const Polynomial& p) const { return ly(apply_ly(p, index_)); }

int LiftedProgramBuilder::add_auxiliary(std::string name) {
  used_.push_back(false);
  return program_.add_variable(std::move(name));
}

void LiftedProgramBuilder::add_objective(const AffineExpr& term) {
  program_.objective += term;
}

void LiftedProgramBuilder::mark_used(const AffineExpr& e) {
  for (const auto& [v, c] : e.terms) used_[static_cast<std::size_t>(v)] = true;
}

void LiftedProgramBuilder::add_inequality(const Polynomial& g, const std::string& label) {
  const int order = localizing_order(spec_.order, g);
  if (order < 0) return;
  add_matrix(localizing_matrix(g, index_, order), label, spec_.kind == RelaxationKind::Mixed);
}

void LiftedProgramBuilder::add_equality(const Polynomial& g, const std::string& label) {
  const int order = localizing_order(spec_.order, g);
  if (order < 0) return;
  const MonomialBasis rows = basis(index_.num_vars(), order);
  std::set<Exponent, GradedLexLess> shifts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i; j < rows.size(); ++j) shifts.insert(rows[i] + rows[j]);
  }
  for (const Exponent& shift : shifts) {
    AffineExpr row = ly(g * Polynomial::monomial(shift));
    if (row.terms.empty()) continue;
    add_scalar_equality(std::move(row), shift.is_zero() ? label : label + "*x^" + shift.digits());
  }
}

void LiftedProgramBuilder::add_scalar_equality(AffineExpr expr, const std::string& label) {
  mark_used(expr);
  program_.add_equality(std::move(expr), label);
}

void LiftedProgramBuilder::add_cone(ConeKind kind, std::vector<AffineExpr> entries, const std::string& label) {
  for (const auto& e : entries) mark_used(e);
  program_.add_cone(kind, std::move(entries), label);
}

void LiftedProgramBuilder::add_matrix(const SymbolicMatrix& m, const std::string& label, bool relax_to_minors,
                                      bool mark) {
  if (even_reduced_) {
    const ParityBlocks blocks = split_by_parity(m.rows);
    emit_block(m, blocks.even, label + (blocks.odd.empty() ? "" : " even"), relax_to_minors, mark);
    emit_block(m, blocks.odd, label + " odd", relax_to_minors, mark);
  } else {
    std::vector<std::size_t> all(m.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    emit_block(m, all, label, relax_to_minors, mark);
  }
}

void LiftedProgramBuilder::emit_block(const SymbolicMatrix& m, const std::vector<std::size_t>& rows,
                                      const std::string& label, bool relax_to_minors, bool mark) {
  const auto k = static_cast<int>(rows.size());
  if (k == 0) return;
  const auto entry = [&](int i, int j) { return ly(m.at(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(j)])); };
  if (k == 1) {
    AffineExpr e = entry(0, 0);
    if (mark) mark_used(e);
    program_.add_cone(ConeKind::NonNegative, {std::move(e)}, label);
    return;
  }
  if (!relax_to_minors) {
    std::vector<AffineExpr> packed;
    packed.reserve(static_cast<std::size_t>(k * (k + 1) / 2));
    for (int j = 0; j < k; ++j) {
      for (int i = j; i < k; ++i) {
        packed.push_back(entry(i, j));
        if (mark) mark_used(packed.back());
      }
    }
    program_.add_psd(k, std::move(packed), label);
    return;
  }
  std::vector<AffineExpr> diag;
  for (int i = 0; i < k; ++i) {
    diag.push_back(entry(i, i));
    if (mark) mark_used(diag.back());
  }
  program_.add_cone(ConeKind::NonNegative, diag, label + " diag");
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      AffineExpr off = entry(i, j);
      if (off.terms.empty()) continue;
      if (mark) mark_used(off);
      program_.add_cone(ConeKind::RotatedSecondOrder, {diag[static_cast<std::size_t>(i)], diag[static_cast<std::size_t>(j)], std::move(off)},
                        label + " minor " + std::to_string(i) + "," + std::to_string(j));
    }
  }
}

void LiftedProgramBuilder::emit_moment_mixed(const SymbolicMatrix& m) {
  std::vector<std::size_t> linear;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.rows[i].degree() == 1) linear.push_back(i);
  }
  emit_block(m, linear, "moment degree-1", false, false);

  std::vector<std::vector<std::size_t>> groups;
  if (even_reduced_) {
    const ParityBlocks blocks = split_by_parity(m.rows);
    groups = {blocks.even, blocks.odd};
  } else {
    std::vector<std::size_t> all(m.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    groups = {all};
  }
  const auto is_linear = [&](std::size_t i) { return m.rows[i].degree() == 1; };
  const auto used = [&](const AffineExpr& e) {
    return std::all_of(e.terms.begin(), e.terms.end(),
                       [&](const auto& t) { return used_[static_cast<std::size_t>(t.first)]; });
  };

  for (const auto& group : groups) {
    std::vector<AffineExpr> diag;
    for (std::size_t i : group) {
      if (!is_linear(i)) diag.push_back(ly(m.at(i, i)));
    }
    if (!diag.empty()) program_.add_cone(ConeKind::NonNegative, std::move(diag), "moment diag");
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) {
        const std::size_t i = group[a];
        const std::size_t j = group[b];
        if (is_linear(i) && is_linear(j)) continue;
        AffineExpr off = ly(m.at(i, j));
        if (off.terms.empty() || !used(off)) continue;
        program_.add_cone(ConeKind::RotatedSecondOrder, {ly(m.at(i, i)), ly(m.at(j, j)), std::move(off)},
                          "moment minor " + std::to_string(i) + "," + std::to_string(j));
      }
    }
  }
}

ConicProgram LiftedProgramBuilder::finish() {
  const SymbolicMatrix m = moment_matrix(index_, spec_.order);
  if (spec_.kind == RelaxationKind::Mixed) emit_moment_mixed(m);
  else add_matrix(m, "moment", false, false);
  AffineExpr y0 = AffineExpr::variable(slot_var_[0]);
  y0.constant = -1.0;
  program_.add_equality(std::move(y0), "y0 = 1");
  return take_program();
}

ConicProgram LiftedProgramBuilder::take_program() {
  program_.check();
  return std::move(program_);
}

GenericRelaxation relax(const PolynomialProblem& problem, RelaxationSpec spec, bool even_reduction) {
  std::vector<const Polynomial*> polys{&problem.objective};
  for (const auto& [g, label] : problem.inequalities) polys.push_back(&g);
  for (const auto& [g, label] : problem.equalities) polys.push_back(&g);
  const bool even = even_reduction && even_reduction_applies(polys);

  LiftedProgramBuilder b(problem.num_vars, spec, even);
  b.add_objective(b.ly(problem.objective));
  for (const auto& [g, label] : problem.inequalities) b.add_inequality(g, label);
  for (const auto& [g, label] : problem.equalities) b.add_equality(g, label);
  GenericRelaxation out;
  out.index = b.index();
  out.slot_var = b.slot_variables();
  out.even_reduced = b.even_reduced();
  out.program = b.finish();
  return out;
}

}  // namespace opfrelax
