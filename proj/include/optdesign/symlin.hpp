#pragma once

// Symmetric-matrix calculus kernel: svec/smat, symmetric Kronecker products,
// the Q operator, divided-difference matrices and matrix functions through
// eigendecomposition. Everything here is a pure function of its inputs.

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "optdesign/errors.hpp"

namespace optdesign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense symmetric matrix. Symmetrized on construction so that
// (i,j) == (j,i) holds exactly thereafter.
class SymMatrix {
public:
  explicit SymMatrix(Matrix m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols() || mat_.rows() < 1)
      throw DimensionMismatch("SymMatrix requires a square matrix of order >= 1");
    mat_ = ((mat_ + mat_.transpose()) / 2.0).eval();
  }

  static SymMatrix identity(int m) { return SymMatrix(Matrix::Identity(m, m)); }
  static SymMatrix zero(int m) { return SymMatrix(Matrix::Zero(m, m)); }

  int order() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

private:
  Matrix mat_;
};

inline long svec_length(int m) { return static_cast<long>(m) * (m + 1) / 2; }

// Order m with m(m+1)/2 == len, or LengthNotTriangular.
inline int svec_order(long len) {
  const int m = static_cast<int>((std::sqrt(8.0 * static_cast<double>(len) + 1.0) - 1.0) / 2.0 + 0.5);
  if (m < 1 || svec_length(m) != len)
    throw LengthNotTriangular("no integer m satisfies m(m+1)/2 == " + std::to_string(len));
  return m;
}

// svec(U) = (u11, sqrt2 u21, ..., sqrt2 um1, u22, sqrt2 u32, ..., umm):
// column-major lower triangle, off-diagonals scaled by sqrt(2).
inline Vector svec(const SymMatrix& U) {
  const int m = U.order();
  Vector x(svec_length(m));
  long idx = 0;
  for (int c = 0; c < m; ++c) {
    x[idx++] = U(c, c);
    for (int r = c + 1; r < m; ++r) x[idx++] = std::numbers::sqrt2 * U(r, c);
  }
  return x;
}

// Inverse of svec.
inline SymMatrix smat(const Vector& x) {
  const int m = svec_order(x.size());
  Matrix U(m, m);
  long idx = 0;
  for (int c = 0; c < m; ++c) {
    U(c, c) = x[idx++];
    for (int r = c + 1; r < m; ++r) {
      const double v = x[idx++] / std::numbers::sqrt2;
      U(r, c) = v;
      U(c, r) = v;
    }
  }
  return SymMatrix(std::move(U));
}

// (G (x)_s H) svec(U) = 1/2 svec(G U H^T + H U G^T). G, H need not be symmetric.
inline Vector skron_apply(const Matrix& G, const Matrix& H, const Vector& x) {
  const int m = svec_order(x.size());
  if (G.rows() != m || G.cols() != m || H.rows() != m || H.cols() != m)
    throw DimensionMismatch("skron_apply: operand orders do not match svec order");
  const Matrix U = smat(x).mat();
  const Matrix R = G * U * H.transpose();
  return svec(SymMatrix(0.5 * (R + R.transpose())));
}

// Dense m(m+1)/2-order matrix of G (x)_s H, column by column. Oracle-grade
// helper; solver code applies the operator instead.
inline Matrix skron_materialize(const Matrix& G, const Matrix& H) {
  if (G.rows() != G.cols() || H.rows() != H.cols() || G.rows() != H.rows())
    throw DimensionMismatch("skron_materialize: operands must be square of equal order");
  const int m = static_cast<int>(G.rows());
  const long len = svec_length(m);
  Matrix out(len, len);
  Vector e = Vector::Zero(len);
  for (long j = 0; j < len; ++j) {
    e[j] = 1.0;
    out.col(j) = skron_apply(G, H, e);
    e[j] = 0.0;
  }
  return out;
}

// The unique Q with Q vec(U) = svec(U) and Q^T svec(U) = vec(U) for symmetric
// U. Satisfies Q Q^T = I.
inline Matrix q_operator(int m) {
  const long len = svec_length(m);
  Matrix Q = Matrix::Zero(len, static_cast<long>(m) * m);
  long idx = 0;
  for (int c = 0; c < m; ++c) {
    Q(idx, static_cast<long>(c) * m + c) = 1.0;
    ++idx;
    for (int r = c + 1; r < m; ++r) {
      Q(idx, static_cast<long>(c) * m + r) = 1.0 / std::numbers::sqrt2;
      Q(idx, static_cast<long>(r) * m + c) = 1.0 / std::numbers::sqrt2;
      ++idx;
    }
  }
  return Q;
}

// Scalar function with derivative, as fed to divided_difference/sym_function.
// Points outside the domain must map to NaN/Inf so callers can detect them.
struct ScalarFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::string name;
};

inline ScalarFunction scalar_identity() {
  return {[](double t) { return t; }, [](double) { return 1.0; }, "t"};
}

inline ScalarFunction scalar_inverse() {
  return {[](double t) { return 1.0 / t; }, [](double t) { return -1.0 / (t * t); }, "t^-1"};
}

inline ScalarFunction scalar_log() {
  return {[](double t) { return std::log(t); }, [](double t) { return 1.0 / t; }, "log t"};
}

// c * t^a.
inline ScalarFunction scalar_power(double a, double c = 1.0) {
  return {[a, c](double t) { return c * std::pow(t, a); },
          [a, c](double t) { return c * a * std::pow(t, a - 1.0); },
          (c == 1.0 ? "" : std::to_string(c) + "*") + "t^" + std::to_string(a)};
}

// Eigendecomposition V diag(d) V^T with d sorted descending and V orthogonal.
struct EigenDecomposition {
  Matrix vectors;
  Vector values;
};

inline EigenDecomposition eigh(const SymMatrix& X) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(X.mat());
  if (es.info() != Eigen::Success)
    throw EigenFailure("symmetric eigensolver did not converge (order " +
                       std::to_string(X.order()) + ")");
  // Eigen sorts ascending; flip to descending.
  return {es.eigenvectors().rowwise().reverse(), es.eigenvalues().reverse()};
}

// Divided-difference matrix S^{g,d}: (g(d_i)-g(d_j))/(d_i-d_j) off the
// coincidence set, g'(d_i) on it. Eigenvalues d_i, d_j count as equal when
// |d_i - d_j| <= 1e-12 max(1, |d_i|, |d_j|); the derivative branch is the
// limit of the quotient there.
inline Matrix divided_difference(const ScalarFunction& g, const Vector& d) {
  const int m = static_cast<int>(d.size());
  Matrix S(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double tol = 1e-12 * std::max({1.0, std::abs(d[i]), std::abs(d[j])});
      const double s = (std::abs(d[i] - d[j]) <= tol)
                           ? g.df(d[i])
                           : (g.f(d[i]) - g.f(d[j])) / (d[i] - d[j]);
      if (!std::isfinite(s))
        throw FunctionUndefined(g.name + " undefined near eigenvalue pair (" +
                                std::to_string(d[i]) + ", " + std::to_string(d[j]) + ")");
      S(i, j) = s;
      S(j, i) = s;
    }
  }
  return S;
}

// g applied to the spectrum: V diag(g(d)) V^T.
inline SymMatrix sym_function(const SymMatrix& X, const ScalarFunction& g) {
  const EigenDecomposition ed = eigh(X);
  Vector gd(ed.values.size());
  for (int i = 0; i < ed.values.size(); ++i) {
    gd[i] = g.f(ed.values[i]);
    if (!std::isfinite(gd[i]))
      throw DomainViolation(g.name + " undefined at eigenvalue " + std::to_string(ed.values[i]));
  }
  return SymMatrix(ed.vectors * gd.asDiagonal() * ed.vectors.transpose());
}

}  // namespace optdesign
