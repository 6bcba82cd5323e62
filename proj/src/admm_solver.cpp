// Operator splitting (ADMM) on the reduced problem
//   minimize c'w  subject to  G w + s = h,  s in K
// with cone-preserving Ruiz equilibration, over-relaxation and adaptive rho.

#include <algorithm>
#include <cmath>
#include <limits>

#include "detail/backends.hpp"
#include "detail/svec.hpp"

namespace opfrelax::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Kind = ConeBlock::Kind;

VectorXd project_cone(const std::vector<ConeBlock>& blocks, const VectorXd& v) {
  VectorXd out(v.size());
  for (const auto& blk : blocks) {
    const VectorXd seg = v.segment(blk.offset, blk.size);
    switch (blk.kind) {
      case Kind::NonNegative: out.segment(blk.offset, blk.size) = seg.cwiseMax(0.0); break;
      case Kind::SecondOrder: out.segment(blk.offset, blk.size) = project_soc(seg); break;
      case Kind::Psd:
        svec_into(project_psd(smat(seg, blk.order)), out.segment(blk.offset, blk.size));
        break;
    }
  }
  return out;
}

class Splitting final : public ConicBackend {
 public:
  std::string name() const override { return "splitting"; }

  ConicSolution solve(const StandardForm& problem, const SolverSettings& settings) const override {
    ConicSolution sol;
    const ReducedProblem red = reduce(problem, false);
    const auto finish = [&](const VectorXd& w) {
      const VectorXd x = red.x0 + red.basis * w;
      sol.x.assign(x.data(), x.data() + x.size());
      sol.objective = problem.c.dot(x) + problem.c0;
    };
    if (red.decided) {
      sol.status = red.early_status;
      sol.message = red.message;
      finish(VectorXd::Zero(red.basis.cols()));
      return sol;
    }
    const auto blocks = cone_blocks(problem.dims);
    const Eigen::Index p = red.g.cols();
    const Eigen::Index m = red.g.rows();
    if (p == 0 || m == 0) {
      const VectorXd proj = project_cone(blocks, red.h);
      sol.status = (proj - red.h).norm() <= settings.tolerance * (1.0 + red.h.norm())
                       ? SolveStatus::Optimal
                       : SolveStatus::Infeasible;
      sol.message = "no free variables after elimination";
      finish(VectorXd::Zero(p));
      return sol;
    }

    // Equilibration: G~ = D G E with D constant on every cone block.
    VectorXd d = VectorXd::Ones(m);
    VectorXd e = VectorXd::Ones(p);
    MatrixXd g = red.g;
    if (settings.scaling) {
      const double floor = 1e-10 * std::max(1.0, g.cwiseAbs().maxCoeff());
      const auto factor_for = [](double norm, double current) {
        return std::clamp(1.0 / std::sqrt(norm), 1e-4 / current, 1e4 / current);
      };
      for (int pass = 0; pass < 10; ++pass) {
        for (Eigen::Index j = 0; j < p; ++j) {
          const double norm = g.col(j).cwiseAbs().maxCoeff();
          if (norm > floor) {
            const double f = factor_for(norm, e(j));
            g.col(j) *= f;
            e(j) *= f;
          }
        }
        for (const auto& blk : blocks) {
          const double norm = g.middleRows(blk.offset, blk.size).cwiseAbs().maxCoeff();
          if (norm > floor) {
            const double f = factor_for(norm, d(blk.offset));
            g.middleRows(blk.offset, blk.size) *= f;
            d.segment(blk.offset, blk.size) *= f;
          }
        }
      }
    }
    const VectorXd h = d.asDiagonal() * red.h;
    const VectorXd c = e.asDiagonal() * red.c;

    const double relax = 1.6;
    const double sigma = 1e-6;
    double rho = 0.1;
    const MatrixXd gtg = g.transpose() * g;
    auto factor = [&](double r) {
      MatrixXd k = r * gtg;
      k.diagonal().array() += sigma;
      return Eigen::LLT<MatrixXd>(k);
    };
    Eigen::LLT<MatrixXd> kkt = factor(rho);

    VectorXd w = VectorXd::Zero(p);
    VectorXd s = VectorXd::Zero(m);
    VectorXd u = VectorXd::Zero(m);
    VectorXd z_prev = VectorXd::Zero(m);
    VectorXd w_prev = VectorXd::Zero(p);
    VectorXd s_prev = VectorXd::Zero(m);

    const double tol = settings.tolerance;
    const double h_scale = std::max(1.0, red.h.norm());
    const double c_scale = std::max(1.0, red.c.norm());
    const int check_every = 10;

    for (int iter = 1; iter <= settings.max_iterations; ++iter) {
      const VectorXd rhs = sigma * w - c - rho * g.transpose() * (s - h + u);
      w = kkt.solve(rhs);
      const VectorXd gw = g * w;
      const VectorXd gw_relaxed = relax * gw - (1.0 - relax) * (s - h);
      s = project_cone(blocks, h - gw_relaxed - u);
      u += gw_relaxed + s - h;

      if (iter % check_every != 0 && iter != settings.max_iterations) continue;

      // Unscaled iterates.
      const VectorXd w_un = e.asDiagonal() * w;
      const VectorXd s_un = s.array() / d.array();
      const VectorXd z_un = rho * (d.asDiagonal() * u);
      const VectorXd rp = red.g * w_un + s_un - red.h;
      const VectorXd rd = red.g.transpose() * z_un + red.c;
      const double pcost = red.c.dot(w_un) + red.offset;
      const double pres = rp.norm() / h_scale;
      const double dres = rd.norm() / c_scale;
      const double gap = std::abs(red.c.dot(w_un) + red.h.dot(z_un));
      sol.iterations = iter;
      sol.primal_residual = pres;
      sol.dual_residual = dres;
      sol.gap = gap;
      if (settings.verbosity > 0 && iter % 500 == 0) {
        std::fprintf(stderr, "admm %6d  pcost % .9e  pres %.2e  dres %.2e  gap %.2e  rho %.2e\n", iter,
                     pcost, pres, dres, gap, rho);
      }
      if (pres <= tol && dres <= tol && gap <= tol * (1.0 + std::abs(pcost))) {
        sol.status = SolveStatus::Optimal;
        sol.message = "converged";
        finish(w_un);
        return sol;
      }
      // Divergence certificates from successive differences (heuristic thresholds).
      // A certificate direction must also lie in the (self-dual) cone.
      const auto in_cone = [&](const VectorXd& v) {
        return (v - project_cone(blocks, v)).norm() <= 1e-6 * v.norm();
      };
      const VectorXd dz = z_un - z_prev;
      const double hdz = red.h.dot(dz);
      if (hdz < 0.0 && (red.g.transpose() * dz).norm() / -hdz < 1e-6 && dz.norm() > 1e-3 && in_cone(dz)) {
        sol.status = SolveStatus::Infeasible;
        sol.message = "primal infeasibility certificate";
        finish(w_un);
        return sol;
      }
      const VectorXd dw = w_un - w_prev;
      const double cdw = red.c.dot(dw);
      const VectorXd gdw = red.g * dw;
      if (cdw < 0.0 && (gdw + (s_un - s_prev)).norm() / -cdw < 1e-6 && dw.norm() > 1e-3 && in_cone(-gdw)) {
        sol.status = SolveStatus::Unbounded;
        sol.message = "dual infeasibility certificate";
        finish(w_un);
        return sol;
      }
      z_prev = z_un;
      w_prev = w_un;
      s_prev = s_un;

      if (iter % (check_every * 5) == 0 && pres > 0.0 && dres > 0.0) {
        const double ratio = std::sqrt(pres / dres);
        if (ratio > 5.0 || ratio < 0.2) {
          const double new_rho = std::clamp(rho * ratio, 1e-6, 1e6);
          u *= rho / new_rho;
          rho = new_rho;
          kkt = factor(rho);
        }
      }
      if (iter == settings.max_iterations) {
        sol.status = SolveStatus::MaxIterations;
        sol.message = "iteration limit reached";
        finish(w_un);
        return sol;
      }
    }
    sol.status = SolveStatus::MaxIterations;
    sol.message = "iteration limit reached";
    finish(e.asDiagonal() * w);
    return sol;
  }
};

}  // namespace

std::unique_ptr<ConicBackend> make_splitting_backend() { return std::make_unique<Splitting>(); }

}  // namespace opfrelax::detail
