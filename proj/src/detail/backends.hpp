#pragma once

#include <memory>

#include "opfrelax/conic.hpp"

namespace opfrelax::detail {

std::unique_ptr<ConicBackend> make_interior_point_backend();
std::unique_ptr<ConicBackend> make_splitting_backend();

/// A single cone of the product, located inside the stacked slack vector.
struct ConeBlock {
  enum class Kind { NonNegative, SecondOrder, Psd } kind;
  int offset = 0;
  int size = 0;   // entries in the stacked vector
  int order = 0;  // matrix order for Psd
};

std::vector<ConeBlock> cone_blocks(const ConeDims& dims);

/// Result of eliminating equality rows and redundant directions:
/// x = x0 + basis * w, where the reduced problem is
/// minimize c'w + offset subject to g w + s = h, s in K.
struct ReducedProblem {
  Eigen::VectorXd x0;
  Eigen::MatrixXd basis;
  Eigen::MatrixXd g;
  Eigen::VectorXd h;
  Eigen::VectorXd c;
  double offset = 0.0;
  SolveStatus early_status = SolveStatus::Optimal;  // Infeasible/Unbounded when detected in reduction
  bool decided = false;
  std::string message;
};

ReducedProblem reduce(const StandardForm& problem, bool scale_columns);

}  // namespace opfrelax::detail
