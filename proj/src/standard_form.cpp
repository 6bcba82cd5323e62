#include "detail/svec.hpp"
#include "opfrelax/conic.hpp"

namespace opfrelax {

namespace {

class RowWriter {
 public:
  RowWriter(Eigen::MatrixXd& g, Eigen::VectorXd& h) : g_(g), h_(h) {}

  // s_row = scale * expr(x)  ->  G row = -scale * a, h = scale * constant
  void write(const AffineExpr& expr, double scale = 1.0) {
    for (const auto& [v, c] : expr.terms) g_(row_, v) -= scale * c;
    h_(row_) += scale * expr.constant;
  }
  void next() { ++row_; }
  int row() const { return row_; }

 private:
  Eigen::MatrixXd& g_;
  Eigen::VectorXd& h_;
  int row_ = 0;
};

}  // namespace

StandardForm to_standard_form(const ConicProgram& program) {
  program.check();
  StandardForm sf;
  const int n = program.num_vars;

  sf.c = Eigen::VectorXd::Zero(n);
  for (const auto& [v, c] : program.objective.terms) sf.c(v) += c;
  sf.c0 = program.objective.constant;

  const auto m_eq = static_cast<Eigen::Index>(program.equalities.size());
  sf.a = Eigen::MatrixXd::Zero(m_eq, n);
  sf.b = Eigen::VectorXd::Zero(m_eq);
  for (Eigen::Index i = 0; i < m_eq; ++i) {
    const auto& e = program.equalities[static_cast<std::size_t>(i)];
    for (const auto& [v, c] : e.terms) sf.a(i, v) += c;
    sf.b(i) = -e.constant;
  }

  for (const auto& cone : program.cones) {
    switch (cone.kind) {
      case ConeKind::NonNegative: sf.dims.nonneg += static_cast<int>(cone.entries.size()); break;
      case ConeKind::SecondOrder: sf.dims.soc.push_back(static_cast<int>(cone.entries.size())); break;
      case ConeKind::RotatedSecondOrder: sf.dims.soc.push_back(static_cast<int>(cone.entries.size())); break;
      case ConeKind::Psd: sf.dims.psd.push_back(cone.order); break;
    }
  }
  const int m = sf.dims.size();
  sf.g = Eigen::MatrixXd::Zero(m, n);
  sf.h = Eigen::VectorXd::Zero(m);
  RowWriter rows(sf.g, sf.h);

  for (const auto& cone : program.cones) {
    if (cone.kind != ConeKind::NonNegative) continue;
    for (const auto& e : cone.entries) {
      rows.write(e);
      rows.next();
    }
  }
  for (const auto& cone : program.cones) {
    if (cone.kind == ConeKind::SecondOrder) {
      for (const auto& e : cone.entries) {
        rows.write(e);
        rows.next();
      }
    } else if (cone.kind == ConeKind::RotatedSecondOrder) {
      // u v >= ||w||^2  <=>  (u + v, u - v, 2w) in the second-order cone
      const AffineExpr& u = cone.entries[0];
      const AffineExpr& v = cone.entries[1];
      rows.write(u);
      rows.write(v);
      rows.next();
      rows.write(u);
      rows.write(v, -1.0);
      rows.next();
      for (std::size_t i = 2; i < cone.entries.size(); ++i) {
        rows.write(cone.entries[i], 2.0);
        rows.next();
      }
    }
  }
  for (const auto& cone : program.cones) {
    if (cone.kind != ConeKind::Psd) continue;
    const int order = cone.order;
    for (int j = 0; j < order; ++j) {
      for (int i = j; i < order; ++i) {
        rows.write(cone.entries[packed_index(order, i, j)], i == j ? 1.0 : detail::kSqrt2);
        rows.next();
      }
    }
  }
  return sf;
}

}  // namespace opfrelax
