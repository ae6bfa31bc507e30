#pragma once

// Shared helpers for the unit suites: deterministic random matrices and the
// standard-Kronecker oracle used against skron.

#include <random>

#include <Eigen/Dense>

namespace testutil {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline std::mt19937_64 rng(unsigned seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo = -1.0, double hi = 1.0) {
  // Fixed 53-bit mapping keeps the stream implementation-independent.
  const double u = static_cast<double>(g() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline MatrixXd random_matrix(std::mt19937_64& g, int rows, int cols) {
  MatrixXd A(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) A(i, j) = uniform(g);
  return A;
}

inline MatrixXd random_symmetric(std::mt19937_64& g, int m) {
  MatrixXd A = random_matrix(g, m, m);
  return 0.5 * (A + A.transpose());
}

// SPD with spectrum bounded away from zero.
inline MatrixXd random_spd(std::mt19937_64& g, int m, double ridge = 0.5) {
  MatrixXd R = random_matrix(g, m, m);
  return R * R.transpose() + ridge * MatrixXd::Identity(m, m);
}

// Full-column-rank m x k matrix (resamples on the measure-zero failure case).
inline MatrixXd random_full_rank(std::mt19937_64& g, int m, int k) {
  for (;;) {
    MatrixXd K = random_matrix(g, m, k);
    if (K.jacobiSvd().singularValues().minCoeff() > 1e-8) return K;
  }
}

inline MatrixXd kron(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

inline VectorXd vec(const MatrixXd& A) {
  return Eigen::Map<const VectorXd>(A.data(), A.size());
}

// Random point on the open simplex.
inline VectorXd random_simplex_point(std::mt19937_64& g, int n) {
  VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = uniform(g, 0.05, 1.0);
  return w / w.sum();
}

}  // namespace testutil
