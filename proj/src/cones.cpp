#include <numeric>

#include "opfrelax/conic.hpp"

namespace opfrelax {

int ConeDims::size() const {
  int n = nonneg + std::accumulate(soc.begin(), soc.end(), 0);
  for (int k : psd) n += k * (k + 1) / 2;
  return n;
}

int ConeDims::degree() const {
  return nonneg + static_cast<int>(soc.size()) + std::accumulate(psd.begin(), psd.end(), 0);
}

Eigen::MatrixXd project_psd(const Eigen::MatrixXd& block) {
  if (block.rows() != block.cols()) throw std::invalid_argument("project_psd: block is not square");
  const Eigen::MatrixXd sym = 0.5 * (block + block.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericalError("project_psd: eigendecomposition failed");
  const Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::VectorXd project_soc(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("project_soc: empty vector");
  const double t = v(0);
  const double norm = v.tail(v.size() - 1).norm();
  if (norm <= t) return v;
  if (norm <= -t) return Eigen::VectorXd::Zero(v.size());
  const double scale = 0.5 * (t + norm);
  Eigen::VectorXd out(v.size());
  out(0) = scale;
  out.tail(v.size() - 1) = (scale / norm) * v.tail(v.size() - 1);
  return out;
}

}  // namespace opfrelax
