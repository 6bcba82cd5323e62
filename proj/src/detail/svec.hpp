#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace opfrelax::detail {

inline constexpr double kSqrt2 = 1.41421356237309504880;

inline int svec_size(int n) { return n * (n + 1) / 2; }

/// Symmetric matrix from a scaled packed vector (lower triangle, column-major,
/// off-diagonals multiplied by sqrt(2)).
template <typename Vec>
Eigen::MatrixXd smat(const Vec& v, int n) {
  Eigen::MatrixXd m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    m(j, j) = v(k++);
    for (int i = j + 1; i < n; ++i) {
      m(i, j) = m(j, i) = v(k++) / kSqrt2;
    }
  }
  return m;
}

template <typename Vec>
void svec_into(const Eigen::MatrixXd& m, Vec&& out) {
  const auto n = static_cast<int>(m.rows());
  int k = 0;
  for (int j = 0; j < n; ++j) {
    out(k++) = m(j, j);
    for (int i = j + 1; i < n; ++i) out(k++) = kSqrt2 * 0.5 * (m(i, j) + m(j, i));
  }
}

inline Eigen::VectorXd svec(const Eigen::MatrixXd& m) {
  Eigen::VectorXd v(svec_size(static_cast<int>(m.rows())));
  svec_into(m, v);
  return v;
}

}  // namespace opfrelax::detail
