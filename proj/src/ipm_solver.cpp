// Primal-dual interior-point method with Nesterov-Todd scaling and Mehrotra
// predictor-corrector steps, applied after equality elimination (see reduce()).

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "detail/backends.hpp"
#include "detail/svec.hpp"

namespace opfrelax::detail {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Kind = ConeBlock::Kind;

constexpr double kInf = std::numeric_limits<double>::infinity();

double jdot(const VectorXd& a, const VectorXd& b) {
  return a(0) * b(0) - a.tail(a.size() - 1).dot(b.tail(b.size() - 1));
}

/// a0^2 - |a1|^2 without the cancellation of the direct formula.
double jnorm_sq(const VectorXd& a) {
  const double t = a.tail(a.size() - 1).norm();
  return (a(0) - t) * (a(0) + t);
}

/// Smallest eigenvalue of x in the cone's Jordan algebra.
double min_eigenvalue(const ConeBlock& blk, const VectorXd& x) {
  const auto seg = x.segment(blk.offset, blk.size);
  switch (blk.kind) {
    case Kind::NonNegative: return seg.minCoeff();
    case Kind::SecondOrder: return seg(0) - seg.tail(blk.size - 1).norm();
    case Kind::Psd: {
      const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(smat(seg, blk.order), Eigen::EigenvaluesOnly);
      return eig.eigenvalues()(0);
    }
  }
  return 0.0;
}

bool interior(const std::vector<ConeBlock>& blocks, const VectorXd& x) {
  for (const auto& blk : blocks) {
    const auto seg = x.segment(blk.offset, blk.size);
    switch (blk.kind) {
      case Kind::NonNegative:
        if (!(seg.array() > 0.0).all()) return false;
        break;
      case Kind::SecondOrder:
        if (!(jnorm_sq(seg) > 0.0) || !(seg(0) > 0.0)) return false;
        break;
      case Kind::Psd:
        if (Eigen::LLT<MatrixXd>(smat(seg, blk.order)).info() != Eigen::Success) return false;
        break;
    }
  }
  return true;
}

void add_identity(const ConeBlock& blk, VectorXd& x, double scale) {
  auto seg = x.segment(blk.offset, blk.size);
  switch (blk.kind) {
    case Kind::NonNegative: seg.array() += scale; break;
    case Kind::SecondOrder: seg(0) += scale; break;
    case Kind::Psd: {
      int k = 0;
      for (int j = 0; j < blk.order; ++j) {
        seg(k) += scale;
        k += blk.order - j;
      }
      break;
    }
  }
}

/// Nesterov-Todd scaling T with T s = T^{-T} z = lambda.
class Scaling {
 public:
  Scaling(const std::vector<ConeBlock>& blocks, const VectorXd& s, const VectorXd& z)
      : blocks_(blocks), lambda_(s.size()) {
    for (const auto& blk : blocks_) {
      const VectorXd ss = s.segment(blk.offset, blk.size);
      const VectorXd zz = z.segment(blk.offset, blk.size);
      switch (blk.kind) {
        case Kind::NonNegative: {
          if ((ss.array() <= 0.0).any() || (zz.array() <= 0.0).any()) fail("nonnegative iterate left the cone");
          lp_t_ = (zz.array() / ss.array()).sqrt();
          lambda_.segment(blk.offset, blk.size) = (ss.array() * zz.array()).sqrt();
          break;
        }
        case Kind::SecondOrder: {
          const int q = blk.size;
          const double sjs = jnorm_sq(ss);
          const double zjz = jnorm_sq(zz);
          if (!(sjs > 0.0) || !(zjz > 0.0) || ss(0) <= 0.0 || zz(0) <= 0.0) fail("second-order iterate left the cone");
          const VectorXd sb = ss / std::sqrt(sjs);
          const VectorXd zb = zz / std::sqrt(zjz);
          const double gam = std::sqrt(0.5 * (1.0 + zb.dot(sb)));
          VectorXd jz = zb;
          jz.tail(q - 1) *= -1.0;
          const VectorXd wb = (sb + jz) / (2.0 * gam);
          VectorXd v = wb;
          v(0) += 1.0;
          v /= std::sqrt(2.0 * (wb(0) + 1.0));
          const double beta = std::pow(sjs / zjz, 0.25);
          MatrixXd jmat = MatrixXd::Identity(q, q);
          jmat.bottomRightCorner(q - 1, q - 1) *= -1.0;
          const VectorXd jv = jmat * v;
          // W = beta (2 v v' - J) maps z to lambda; T = W^{-1}.
          MatrixXd w = beta * (2.0 * v * v.transpose() - jmat);
          MatrixXd t = (2.0 * jv * jv.transpose() - jmat) / beta;
          lambda_.segment(blk.offset, q) = t * ss;
          soc_t_.push_back(std::move(t));
          soc_tinv_.push_back(std::move(w));
          break;
        }
        case Kind::Psd: {
          const MatrixxdPair p = psd_scaling(ss, zz, blk.order);
          VectorXd lam = VectorXd::Zero(blk.size);
          int k = 0;
          for (int j = 0; j < blk.order; ++j) {
            lam(k) = p.eigen(j);
            k += blk.order - j;
          }
          lambda_.segment(blk.offset, blk.size) = lam;
          psd_lambda_.push_back(p.eigen);
          psd_r_.push_back(p.r);
          psd_rinv_.push_back(p.rinv);
          break;
        }
      }
    }
  }

  const VectorXd& lambda() const { return lambda_; }

  enum class Op { T, TInv, TTrans, TInvTrans };

  template <typename Vec>
  VectorXd apply(Op op, const Vec& x) const {
    VectorXd out(x.size());
    std::size_t soc_i = 0;
    std::size_t psd_i = 0;
    for (const auto& blk : blocks_) {
      const auto seg = x.segment(blk.offset, blk.size);
      switch (blk.kind) {
        case Kind::NonNegative:
          if (op == Op::T || op == Op::TTrans) out.segment(blk.offset, blk.size) = seg.array() * lp_t_;
          else out.segment(blk.offset, blk.size) = seg.array() / lp_t_;
          break;
        case Kind::SecondOrder: {
          const MatrixXd& m = (op == Op::T || op == Op::TTrans) ? soc_t_[soc_i] : soc_tinv_[soc_i];
          out.segment(blk.offset, blk.size) = m * seg;
          ++soc_i;
          break;
        }
        case Kind::Psd: {
          const MatrixXd xm = smat(seg, blk.order);
          const MatrixXd& r = psd_r_[psd_i];
          const MatrixXd& rinv = psd_rinv_[psd_i];
          MatrixXd y;
          switch (op) {
            case Op::T: y = rinv * xm * rinv.transpose(); break;
            case Op::TInv: y = r * xm * r.transpose(); break;
            case Op::TTrans: y = rinv.transpose() * xm * rinv; break;
            case Op::TInvTrans: y = r.transpose() * xm * r; break;
          }
          svec_into(y, out.segment(blk.offset, blk.size));
          ++psd_i;
          break;
        }
      }
    }
    return out;
  }

  /// lambda <> d: the solution u of lambda o u = d.
  VectorXd inverse_product(const VectorXd& d) const {
    VectorXd u(d.size());
    std::size_t psd_i = 0;
    for (const auto& blk : blocks_) {
      const auto lam = lambda_.segment(blk.offset, blk.size);
      const auto seg = d.segment(blk.offset, blk.size);
      auto dst = u.segment(blk.offset, blk.size);
      switch (blk.kind) {
        case Kind::NonNegative: dst = seg.array() / lam.array(); break;
        case Kind::SecondOrder: {
          const int q = blk.size;
          const double l0 = lam(0);
          const double det = l0 * l0 - lam.tail(q - 1).squaredNorm();
          const double u0 = (l0 * seg(0) - lam.tail(q - 1).dot(seg.tail(q - 1))) / det;
          dst(0) = u0;
          dst.tail(q - 1) = (seg.tail(q - 1) - u0 * lam.tail(q - 1)) / l0;
          break;
        }
        case Kind::Psd: {
          const VectorXd& ev = psd_lambda_[psd_i++];
          MatrixXd dm = smat(seg, blk.order);
          for (int i = 0; i < blk.order; ++i) {
            for (int j = 0; j < blk.order; ++j) dm(i, j) *= 2.0 / (ev(i) + ev(j));
          }
          svec_into(dm, dst);
          break;
        }
      }
    }
    return u;
  }

  /// Largest alpha with lambda + alpha d in the cone (infinity if unbounded).
  double max_step(const VectorXd& d) const {
    double alpha = kInf;
    std::size_t psd_i = 0;
    for (const auto& blk : blocks_) {
      const auto lam = lambda_.segment(blk.offset, blk.size);
      const auto seg = d.segment(blk.offset, blk.size);
      double mu_min = 0.0;
      switch (blk.kind) {
        case Kind::NonNegative: mu_min = (seg.array() / lam.array()).minCoeff(); break;
        case Kind::SecondOrder: {
          const VectorXd lv = lam;
          const VectorXd dv = seg;
          const double a = jdot(dv, dv);
          const double b = jdot(lv, dv);
          const double c = jnorm_sq(lv);
          const double disc = std::max(0.0, b * b - a * c);
          mu_min = (b - std::sqrt(disc)) / c;
          break;
        }
        case Kind::Psd: {
          const VectorXd& ev = psd_lambda_[psd_i++];
          MatrixXd dm = smat(seg, blk.order);
          const VectorXd isq = ev.array().rsqrt();
          dm = isq.asDiagonal() * dm * isq.asDiagonal();
          const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(dm, Eigen::EigenvaluesOnly);
          mu_min = eig.eigenvalues()(0);
          break;
        }
      }
      if (mu_min < 0.0) alpha = std::min(alpha, -1.0 / mu_min);
    }
    return alpha;
  }

 private:
  struct MatrixxdPair {
    MatrixXd r;
    MatrixXd rinv;
    VectorXd eigen;
  };

  [[noreturn]] static void fail(const std::string& what) { throw NumericalError("interior point: " + what); }

  static MatrixxdPair psd_scaling(const VectorXd& s, const VectorXd& z, int order) {
    const Eigen::LLT<MatrixXd> ls(smat(s, order));
    const Eigen::LLT<MatrixXd> lz(smat(z, order));
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) fail("semidefinite iterate left the cone");
    const MatrixXd lsm = ls.matrixL();
    const MatrixXd lzm = lz.matrixL();
    const Eigen::JacobiSVD<MatrixXd> svd(lzm.transpose() * lsm, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd ev = svd.singularValues();
    if (ev.minCoeff() <= 0.0) fail("singular semidefinite scaling");
    const VectorXd isq = ev.array().rsqrt();
    MatrixxdPair p;
    p.r = lsm * svd.matrixV() * isq.asDiagonal();
    p.rinv = isq.asDiagonal() * svd.matrixU().transpose() * lzm.transpose();
    p.eigen = ev;
    return p;
  }

  const std::vector<ConeBlock>& blocks_;
  VectorXd lambda_;
  Eigen::ArrayXd lp_t_;
  std::vector<MatrixXd> soc_t_;
  std::vector<MatrixXd> soc_tinv_;
  std::vector<VectorXd> psd_lambda_;
  std::vector<MatrixXd> psd_r_;
  std::vector<MatrixXd> psd_rinv_;
};

/// Jordan product x o y.
VectorXd jordan(const std::vector<ConeBlock>& blocks, const VectorXd& x, const VectorXd& y) {
  VectorXd out(x.size());
  for (const auto& blk : blocks) {
    const auto a = x.segment(blk.offset, blk.size);
    const auto b = y.segment(blk.offset, blk.size);
    auto dst = out.segment(blk.offset, blk.size);
    switch (blk.kind) {
      case Kind::NonNegative: dst = a.array() * b.array(); break;
      case Kind::SecondOrder:
        dst(0) = a.dot(b);
        dst.tail(blk.size - 1) = a(0) * b.tail(blk.size - 1) + b(0) * a.tail(blk.size - 1);
        break;
      case Kind::Psd: {
        const MatrixXd am = smat(a, blk.order);
        const MatrixXd bm = smat(b, blk.order);
        svec_into(0.5 * (am * bm + bm * am), dst);
        break;
      }
    }
  }
  return out;
}

struct Iterate {
  VectorXd x, s, z;
};

struct Metrics {
  double pres = kInf;
  double dres = kInf;
  double gap = kInf;
  double pcost = 0.0;
  double score(double) const { return std::max({pres, dres, gap / (1.0 + std::abs(pcost))}); }
};

class InteriorPoint final : public ConicBackend {
 public:
  std::string name() const override { return "interior-point"; }

  ConicSolution solve(const StandardForm& problem, const SolverSettings& settings) const override {
    ConicSolution sol;
    ReducedProblem red = reduce(problem, settings.scaling);
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
      // Nothing left to optimize: the point is fixed.
      const VectorXd s = red.h;
      double worst = 0.0;
      for (const auto& blk : blocks) worst = std::max(worst, -min_eigenvalue(blk, s));
      sol.status = worst <= settings.tolerance * (1.0 + s.norm()) ? SolveStatus::Optimal : SolveStatus::Infeasible;
      sol.message = "no free variables after elimination";
      finish(VectorXd::Zero(p));
      return sol;
    }

    Iterate best;
    try {
      run(red, blocks, problem.dims.degree(), settings, sol, best);
    } catch (const NumericalError& e) {
      sol.status = SolveStatus::NumericalFailure;
      sol.message = e.what();
    }
    finish(best.x.size() == p ? best.x : VectorXd::Zero(p));
    return sol;
  }

 private:
  void run(const ReducedProblem& red, const std::vector<ConeBlock>& blocks, int degree,
           const SolverSettings& settings, ConicSolution& sol, Iterate& best) const {
    const MatrixXd& g = red.g;
    const VectorXd& h = red.h;
    const VectorXd& c = red.c;
    const double tol = settings.tolerance;
    const double h_scale = std::max(1.0, h.norm());
    const double c_scale = std::max(1.0, c.norm());
    const int max_iter = std::min(settings.max_iterations, 400);

    // Least-squares starting point, shifted into the cone.
    const Eigen::ColPivHouseholderQR<MatrixXd> qr(g);
    Iterate it;
    it.x = qr.solve(h);
    it.s = h - g * it.x;
    const MatrixXd gtg = g.transpose() * g;
    it.z = -g * gtg.ldlt().solve(c);
    for (VectorXd* v : {&it.s, &it.z}) {
      for (const auto& blk : blocks) {
        const double e = min_eigenvalue(blk, *v);
        const double norm = v->segment(blk.offset, blk.size).norm();
        if (e <= 1e-8 * std::max(1.0, norm)) add_identity(blk, *v, 1.0 - e);
      }
    }

    best = it;
    double best_score = kInf;
    Metrics best_metrics;

    for (int iter = 0; iter <= max_iter; ++iter) {
      const VectorXd rx = g.transpose() * it.z + c;
      const VectorXd rz = g * it.x + it.s - h;
      Metrics mt;
      mt.pcost = c.dot(it.x) + red.offset;
      mt.pres = rz.norm() / h_scale;
      mt.dres = rx.norm() / c_scale;
      mt.gap = it.s.dot(it.z);
      sol.iterations = iter;

      const double score = mt.score(tol);
      if (score < best_score) {
        best_score = score;
        best = it;
        best_metrics = mt;
        sol.primal_residual = mt.pres;
        sol.dual_residual = mt.dres;
        sol.gap = mt.gap;
      }
      if (settings.verbosity > 0) {
        std::fprintf(stderr, "ipm %3d  pcost % .9e  pres %.2e  dres %.2e  gap %.2e\n", iter, mt.pcost,
                     mt.pres, mt.dres, mt.gap);
      }
      if (mt.pres <= tol && mt.dres <= tol && mt.gap <= tol * (1.0 + std::abs(mt.pcost))) {
        record(sol, SolveStatus::Optimal, mt, "converged");
        return;
      }
      // Divergence certificates (heuristic thresholds).
      const double hz = h.dot(it.z);
      if (hz < 0.0 && (g.transpose() * it.z).norm() / -hz < tol) {
        record(sol, SolveStatus::Infeasible, mt, "primal infeasibility certificate");
        best = it;
        return;
      }
      const double cx = c.dot(it.x);
      if (cx < 0.0 && (g * it.x + it.s).norm() / -cx < tol) {
        record(sol, SolveStatus::Unbounded, mt, "dual infeasibility certificate");
        best = it;
        return;
      }
      if (iter == max_iter) break;

      const Scaling sc(blocks, it.s, it.z);
      const VectorXd& lam = sc.lambda();
      MatrixXd gs(g.rows(), g.cols());
      for (Eigen::Index j = 0; j < g.cols(); ++j) gs.col(j) = sc.apply(Scaling::Op::T, g.col(j));
      // H = Gs'Gs = R'R from a QR factorization of Gs, which avoids squaring its condition number.
      const Eigen::HouseholderQR<MatrixXd> qr(gs);
      MatrixXd rmat = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
      const double rmax = rmat.diagonal().cwiseAbs().maxCoeff();
      if (!(rmax > 0.0) || !std::isfinite(rmax)) throw NumericalError("interior point: singular Newton system");
      for (Eigen::Index j = 0; j < rmat.cols(); ++j) {
        if (std::abs(rmat(j, j)) < 1e-13 * rmax) rmat(j, j) = rmat(j, j) < 0.0 ? -1e-13 * rmax : 1e-13 * rmax;
      }
      const auto hsolve = [&](const VectorXd& b) -> VectorXd {
        const VectorXd y = rmat.transpose().triangularView<Eigen::Lower>().solve(b);
        return rmat.triangularView<Eigen::Upper>().solve(y);
      };
      const VectorXd trz = sc.apply(Scaling::Op::T, rz);

      struct Direction {
        VectorXd dx, ds, dz;  // ds, dz in scaled coordinates
      };
      const auto solve_newton = [&](const VectorXd& d_s) {
        const VectorXd q = sc.inverse_product(d_s);
        const VectorXd w = trz + q;
        const VectorXd rhs = -rx - gs.transpose() * w;
        Direction dir;
        dir.dx = hsolve(rhs);
        for (int refine = 0; refine < 2; ++refine) {
          const VectorXd resid = rhs - gs.transpose() * (gs * dir.dx);
          dir.dx += hsolve(resid);
        }
        dir.dz = gs * dir.dx + w;
        dir.ds = q - dir.dz;
        return dir;
      };

      const VectorXd lam_sq = jordan(blocks, lam, lam);
      const Direction aff = solve_newton(-lam_sq);
      const double alpha_aff = std::min({1.0, sc.max_step(aff.ds), sc.max_step(aff.dz)});
      const double mu = lam.squaredNorm() / degree;
      const double sigma = std::pow(std::clamp(1.0 - alpha_aff, 0.0, 1.0), 3);

      VectorXd d_s = -lam_sq - jordan(blocks, aff.ds, aff.dz);
      VectorXd e = VectorXd::Zero(lam.size());
      for (const auto& blk : blocks) add_identity(blk, e, 1.0);
      d_s += sigma * mu * e;
      const Direction dir = solve_newton(d_s);
      const double alpha_max = std::min(sc.max_step(dir.ds), sc.max_step(dir.dz));
      double alpha = std::min(1.0, 0.99 * alpha_max);
      const VectorXd step_s = sc.apply(Scaling::Op::TInv, dir.ds);
      const VectorXd step_z = sc.apply(Scaling::Op::TTrans, dir.dz);
      // Rounding can push a boundary-hugging iterate out of its cone; back off until both stay inside.
      while (alpha > 1e-12 && !(interior(blocks, it.s + alpha * step_s) && interior(blocks, it.z + alpha * step_z))) {
        alpha *= 0.5;
      }
      if (!(alpha > 1e-12)) throw NumericalError("interior point: step length collapsed");

      it.x += alpha * dir.dx;
      it.s += alpha * step_s;
      it.z += alpha * step_z;
    }
    record(sol, SolveStatus::MaxIterations, best_metrics, "iteration limit reached");
  }

  static void record(ConicSolution& sol, SolveStatus status, const Metrics& mt, const std::string& msg) {
    sol.status = status;
    sol.primal_residual = mt.pres;
    sol.dual_residual = mt.dres;
    sol.gap = mt.gap;
    sol.message = msg;
  }
};

}  // namespace

std::unique_ptr<ConicBackend> make_interior_point_backend() { return std::make_unique<InteriorPoint>(); }

}  // namespace opfrelax::detail
