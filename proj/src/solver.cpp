#include <cmath>

#include "detail/backends.hpp"

namespace opfrelax {

namespace detail {

std::vector<ConeBlock> cone_blocks(const ConeDims& dims) {
  std::vector<ConeBlock> blocks;
  int offset = 0;
  if (dims.nonneg > 0) {
    blocks.push_back({ConeBlock::Kind::NonNegative, offset, dims.nonneg, 0});
    offset += dims.nonneg;
  }
  for (int q : dims.soc) {
    blocks.push_back({ConeBlock::Kind::SecondOrder, offset, q, 0});
    offset += q;
  }
  for (int k : dims.psd) {
    const int size = k * (k + 1) / 2;
    blocks.push_back({ConeBlock::Kind::Psd, offset, size, k});
    offset += size;
  }
  return blocks;
}

namespace {

double rank_threshold(const Eigen::VectorXd& singular_values, Eigen::Index rows, Eigen::Index cols) {
  const double top = singular_values.size() > 0 ? singular_values(0) : 0.0;
  return std::max(1e-12, 1e-11 * top * static_cast<double>(std::max(rows, cols)));
}

}  // namespace

ReducedProblem reduce(const StandardForm& problem, bool scale_columns) {
  ReducedProblem out;
  const Eigen::Index n = problem.c.size();

  // Equality rows: x = x0 + N z.
  out.x0 = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd null_basis = Eigen::MatrixXd::Identity(n, n);
  if (problem.a.rows() > 0 && n > 0) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(problem.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double thr = rank_threshold(sv, problem.a.rows(), n);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > thr) ++rank;
    const Eigen::VectorXd ub = svd.matrixU().leftCols(rank).transpose() * problem.b;
    out.x0 = svd.matrixV().leftCols(rank) * (ub.array() / sv.head(rank).array()).matrix();
    const double residual = (problem.a * out.x0 - problem.b).norm();
    if (residual > 1e-8 * (1.0 + problem.b.norm())) {
      out.decided = true;
      out.early_status = SolveStatus::Infeasible;
      out.message = "inconsistent equality constraints (residual " + std::to_string(residual) + ")";
      return out;
    }
    null_basis = svd.matrixV().rightCols(n - rank);
  } else if (problem.a.rows() > 0) {
    if (problem.b.norm() > 1e-8) {
      out.decided = true;
      out.early_status = SolveStatus::Infeasible;
      out.message = "inconsistent equality constraints";
      return out;
    }
  }

  Eigen::MatrixXd g = problem.g * null_basis;
  Eigen::VectorXd c = null_basis.transpose() * problem.c;
  out.h = problem.h - problem.g * out.x0;
  out.offset = problem.c.dot(out.x0) + problem.c0;

  // Directions that do not touch any cone leave the slack unchanged; they must not move the objective.
  if (g.cols() > 0) {
    Eigen::MatrixXd range_basis;
    if (g.rows() > 0) {
      const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeFullV);
      const Eigen::VectorXd& sv = svd.singularValues();
      const double thr = rank_threshold(sv, g.rows(), g.cols());
      Eigen::Index rank = 0;
      while (rank < sv.size() && sv(rank) > thr) ++rank;
      const Eigen::MatrixXd free_dirs = svd.matrixV().rightCols(g.cols() - rank);
      if (free_dirs.cols() > 0 && (free_dirs.transpose() * c).norm() > 1e-9 * (1.0 + c.norm())) {
        out.decided = true;
        out.early_status = SolveStatus::Unbounded;
        out.message = "objective decreases along a direction free of constraints";
        return out;
      }
      range_basis = svd.matrixV().leftCols(rank);
    } else {
      if (c.norm() > 1e-12) {
        out.decided = true;
        out.early_status = SolveStatus::Unbounded;
        out.message = "unconstrained variables with nonzero cost";
        return out;
      }
      range_basis = Eigen::MatrixXd(g.cols(), 0);
    }
    null_basis = null_basis * range_basis;
    g = g * range_basis;
    c = range_basis.transpose() * c;
  }

  if (scale_columns) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      const double norm = g.col(j).norm();
      if (norm > 0.0) {
        g.col(j) /= norm;
        c(j) /= norm;
        null_basis.col(j) /= norm;
      }
    }
  }
  out.basis = std::move(null_basis);
  out.g = std::move(g);
  out.c = std::move(c);
  return out;
}

}  // namespace detail

std::unique_ptr<ConicBackend> make_backend(Backend backend) {
  switch (backend) {
    case Backend::InteriorPoint: return detail::make_interior_point_backend();
    case Backend::Splitting: return detail::make_splitting_backend();
  }
  throw std::invalid_argument("make_backend: unknown backend");
}

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings) {
  const auto backend = make_backend(settings.backend);
  return solve(program, settings, *backend);
}

ConicSolution solve(const ConicProgram& program, const SolverSettings& settings,
                    const ConicBackend& backend) {
  if (!(settings.tolerance > 0.0)) throw std::invalid_argument("SolverSettings: tolerance must be positive");
  const StandardForm sf = to_standard_form(program);
  ConicSolution sol = backend.solve(sf, settings);
  if (static_cast<int>(sol.x.size()) == program.num_vars) {
    sol.objective = program.objective.eval(sol.x);
  }
  return sol;
}

}  // namespace opfrelax
