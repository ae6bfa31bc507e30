#pragma once

// Optimality-criterion oracles. Each criterion exposes its value, the matrix
// gradient of Phi, the svec-space gradient of phi, and the svec-space Hessian
// of phi in factored low-rank form together with its analytic rank.
//
//   A      Phi(X) = tr(K^T X^-1 K)
//   c      Phi(X) = c^T X^-1 c            (A with a single column)
//   D      Phi(X) = log det(K^T X^-1 K)
//   PMean  Phi(X) = tr((K^T X^-1 K)^-p),  p < 0
//
// Identity K dispatches to the simplified formulas; general K uses the
// factored ones. The two scalar functions feeding the divided-difference
// matrices differ between those paths and are kept as named constructors
// below to make the switch impossible to miss.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "optdesign/errors.hpp"
#include "optdesign/symlin.hpp"

namespace optdesign {

enum class CriterionKind { A, C, D, PMean };

inline const char* to_string(CriterionKind k) {
  switch (k) {
    case CriterionKind::A: return "A";
    case CriterionKind::C: return "c";
    case CriterionKind::D: return "D";
    case CriterionKind::PMean: return "pmean";
  }
  return "?";
}

class CriterionSpec {
public:
  static CriterionSpec a(int m) { return CriterionSpec(CriterionKind::A, m, {}, 0.0); }
  static CriterionSpec a(Matrix K) {
    const int m = static_cast<int>(K.rows());
    return CriterionSpec(CriterionKind::A, m, std::move(K), 0.0);
  }
  static CriterionSpec c(Vector cvec) {
    const int m = static_cast<int>(cvec.size());
    return CriterionSpec(CriterionKind::C, m, Matrix(cvec), 0.0);
  }
  static CriterionSpec d(int m) { return CriterionSpec(CriterionKind::D, m, {}, 0.0); }
  static CriterionSpec d(Matrix K) {
    const int m = static_cast<int>(K.rows());
    return CriterionSpec(CriterionKind::D, m, std::move(K), 0.0);
  }
  static CriterionSpec pmean(int m, double p) {
    return CriterionSpec(CriterionKind::PMean, m, {}, p);
  }
  static CriterionSpec pmean(Matrix K, double p) {
    const int m = static_cast<int>(K.rows());
    return CriterionSpec(CriterionKind::PMean, m, std::move(K), p);
  }

  CriterionKind kind() const { return kind_; }
  int m() const { return m_; }
  int k() const { return k_; }
  bool identity_k() const { return identity_k_; }
  double p() const { return p_; }

  // Identity path returns an empty matrix; callers branch on identity_k().
  const Matrix& k_matrix() const { return K_; }

private:
  CriterionSpec(CriterionKind kind, int m, std::optional<Matrix> K, double p)
      : kind_(kind), m_(m), p_(p) {
    if (m_ < 1) throw DimensionMismatch("criterion order must be >= 1");
    if (kind_ == CriterionKind::PMean && !(p_ < 0.0))
      throw ConfigError("pmean criterion requires p < 0");
    if (K && K->size() > 0) {
      K_ = std::move(*K);
      identity_k_ = false;
      k_ = static_cast<int>(K_.cols());
      if (K_.rows() != m_) throw DimensionMismatch("K must have m rows");
      if (k_ < 1 || k_ > m_)
        throw ConfigError("K must have k columns with 1 <= k <= m, got k=" + std::to_string(k_));
      if (kind_ == CriterionKind::C && k_ != 1)
        throw ConfigError("c-criterion requires a single coefficient column");
      const Vector sv = K_.jacobiSvd().singularValues();
      if (sv[sv.size() - 1] <= 1e-10 * sv[0])
        throw RankDeficient("K is not of full column rank (sigma_min/sigma_max = " +
                            std::to_string(sv[sv.size() - 1] / sv[0]) + ")");
    } else {
      identity_k_ = true;
      k_ = m_;
      if (kind_ == CriterionKind::C && m_ != 1)
        throw ConfigError("c-criterion requires an explicit coefficient vector");
    }
  }

  CriterionKind kind_;
  int m_ = 0;
  int k_ = 0;
  bool identity_k_ = true;
  Matrix K_;
  double p_ = 0.0;
};

// Divided-difference inputs for the p-th mean Hessian. General K applies the
// kernel to the spectrum of K^T X^-1 K with g(t) = t^(-p-1); identity K
// applies it to the spectrum of X itself with g(t) = p t^(p-1).
inline ScalarFunction pmean_dd_general_k(double p) { return scalar_power(-p - 1.0); }
inline ScalarFunction pmean_dd_identity_k(double p) { return scalar_power(p - 1.0, p); }

struct CriterionEval {
  double value = 0.0;
  SymMatrix grad_matrix;  // gradient of Phi at X, always <= 0 in the PSD order
  Vector grad_svec;       // svec(grad_matrix) == gradient of phi at svec(X)
};

// Truncated eigendecomposition of the svec-space Hessian:
// hessian == basis * diag(weights) * basis^T with exactly `rank` columns.
struct HessianFactor {
  Matrix basis;
  Vector weights;
  int rank = 0;

  Matrix reconstruct() const {
    return basis * weights.asDiagonal() * basis.transpose();
  }
};

// rank of the svec-space Hessian: m(m+1)/2 - (m-k)(m-k+1)/2.
inline int analytic_rank(const CriterionSpec& spec) {
  const int m = spec.m(), k = spec.k();
  return static_cast<int>(svec_length(m) - svec_length(m - k));
}

namespace detail {

// Cholesky-based inverse; failure to factor defines "not positive definite".
inline Matrix spd_inverse(const SymMatrix& X, const char* who) {
  Eigen::LLT<Matrix> llt(X.mat());
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefinite(std::string(who) + ": Cholesky factorization failed");
  return llt.solve(Matrix::Identity(X.order(), X.order()));
}

inline void require_well_conditioned(const Vector& eigs_desc, const char* who) {
  const double lmax = eigs_desc[0];
  const double lmin = eigs_desc[eigs_desc.size() - 1];
  if (!(lmin > 0.0) || lmax / lmin > 1e14)
    throw SingularInformationMatrix(std::string(who) +
                                    ": K^T X^-1 K numerically singular");
}

// smat of the j-th svec basis vector.
inline Matrix svec_basis_matrix(int m, long j) {
  Matrix E = Matrix::Zero(m, m);
  long idx = 0;
  for (int c = 0; c < m; ++c) {
    if (idx == j) {
      E(c, c) = 1.0;
      return E;
    }
    ++idx;
    for (int r = c + 1; r < m; ++r) {
      if (idx == j) {
        E(r, c) = E(c, r) = 1.0 / std::numbers::sqrt2;
        return E;
      }
      ++idx;
    }
  }
  throw DimensionMismatch("svec basis index out of range");
}

}  // namespace detail

inline double value(const CriterionSpec& spec, const SymMatrix& X) {
  if (X.order() != spec.m()) throw DimensionMismatch("criterion order != matrix order");
  const Matrix Xinv = detail::spd_inverse(X, "value");
  switch (spec.kind()) {
    case CriterionKind::A:
    case CriterionKind::C: {
      if (spec.identity_k()) return Xinv.trace();
      const Matrix& K = spec.k_matrix();
      return (K.array() * (Xinv * K).array()).sum();
    }
    case CriterionKind::D: {
      if (spec.identity_k()) {
        Eigen::LLT<Matrix> llt(X.mat());
        return -2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      }
      const Matrix& K = spec.k_matrix();
      const Matrix Y = K.transpose() * Xinv * K;
      Eigen::LLT<Matrix> llt(0.5 * (Y + Y.transpose()));
      if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("value: K^T X^-1 K not positive definite");
      return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    }
    case CriterionKind::PMean: {
      const double p = spec.p();
      if (spec.identity_k()) {
        // (X^-1)^(-p) = X^p.
        const Vector d = eigh(X).values;
        if (d[d.size() - 1] <= 0.0)
          throw NotPositiveDefinite("value: nonpositive eigenvalue under pmean");
        return d.array().pow(p).sum();
      }
      const Matrix& K = spec.k_matrix();
      const Matrix Y = K.transpose() * Xinv * K;
      const Vector d = eigh(SymMatrix(Y)).values;
      if (d[d.size() - 1] <= 0.0)
        throw NotPositiveDefinite("value: K^T X^-1 K not positive definite");
      return d.array().pow(-p).sum();
    }
  }
  throw Error("unreachable criterion kind");
}

inline CriterionEval grad(const CriterionSpec& spec, const SymMatrix& X) {
  if (X.order() != spec.m()) throw DimensionMismatch("criterion order != matrix order");
  const Matrix Xinv = detail::spd_inverse(X, "grad");

  Matrix gradPhi;
  double val = 0.0;
  switch (spec.kind()) {
    case CriterionKind::A:
    case CriterionKind::C: {
      if (spec.identity_k()) {
        val = Xinv.trace();
        gradPhi = -(Xinv * Xinv);
      } else {
        const Matrix& K = spec.k_matrix();
        const Matrix Z = Xinv * K;  // X^-1 K
        val = (K.array() * Z.array()).sum();
        gradPhi = -(Z * Z.transpose());
      }
      break;
    }
    case CriterionKind::D: {
      if (spec.identity_k()) {
        val = value(spec, X);
        gradPhi = -Xinv;
      } else {
        const Matrix& K = spec.k_matrix();
        const Matrix Z = Xinv * K;
        const Matrix Y = K.transpose() * Z;
        const EigenDecomposition ey = eigh(SymMatrix(Y));
        detail::require_well_conditioned(ey.values, "grad[D]");
        val = ey.values.array().log().sum();
        const Matrix W = ey.vectors * ey.values.cwiseInverse().asDiagonal() *
                         ey.vectors.transpose();
        gradPhi = -(Z * W * Z.transpose());
      }
      break;
    }
    case CriterionKind::PMean: {
      const double p = spec.p();
      if (spec.identity_k()) {
        const EigenDecomposition ex = eigh(X);
        if (ex.values[ex.values.size() - 1] <= 0.0)
          throw NotPositiveDefinite("grad: nonpositive eigenvalue under pmean");
        detail::require_well_conditioned(ex.values, "grad[pmean]");
        val = ex.values.array().pow(p).sum();
        gradPhi = p * (ex.vectors * ex.values.array().pow(p - 1.0).matrix().asDiagonal() *
                       ex.vectors.transpose());
      } else {
        const Matrix& K = spec.k_matrix();
        const Matrix Z = Xinv * K;
        const Matrix Y = K.transpose() * Z;
        const EigenDecomposition ey = eigh(SymMatrix(Y));
        if (ey.values[ey.values.size() - 1] <= 0.0)
          throw NotPositiveDefinite("grad: K^T X^-1 K not positive definite");
        detail::require_well_conditioned(ey.values, "grad[pmean]");
        val = ey.values.array().pow(-p).sum();
        const Matrix Ypow = ey.vectors * ey.values.array().pow(-p - 1.0).matrix().asDiagonal() *
                            ey.vectors.transpose();
        gradPhi = p * (Z * Ypow * Z.transpose());
      }
      break;
    }
  }

  SymMatrix G(std::move(gradPhi));
  Vector gs = svec(G);
  return {val, std::move(G), std::move(gs)};
}

// Materialized svec-space Hessian, assembled column by column against the
// svec basis. Order m(m+1)/2 stays at most 15 for every benchmark space.
inline Matrix hessian_dense(const CriterionSpec& spec, const SymMatrix& X) {
  if (X.order() != spec.m()) throw DimensionMismatch("criterion order != matrix order");
  const int m = spec.m();
  const long len = svec_length(m);
  const Matrix Xinv = detail::spd_inverse(X, "hessian");
  Matrix Hess(len, len);

  const auto fill_columns = [&](auto&& column_matrix) {
    for (long j = 0; j < len; ++j) {
      const Matrix Ej = detail::svec_basis_matrix(m, j);
      Hess.col(j) = svec(SymMatrix(column_matrix(Ej)));
    }
  };

  switch (spec.kind()) {
    case CriterionKind::A:
    case CriterionKind::C: {
      const Matrix N = spec.identity_k()
                           ? Matrix(Xinv * Xinv)
                           : Matrix((Xinv * spec.k_matrix()) *
                                    (Xinv * spec.k_matrix()).transpose());
      // 2 X^-1 (x)_s N.
      fill_columns([&](const Matrix& Ej) -> Matrix {
        const Matrix T = Xinv * Ej * N;
        return T + T.transpose();
      });
      break;
    }
    case CriterionKind::D: {
      if (spec.identity_k()) {
        // W = X collapses the two terms to X^-1 (x)_s X^-1.
        fill_columns([&](const Matrix& Ej) -> Matrix { return Xinv * Ej * Xinv; });
      } else {
        const Matrix& K = spec.k_matrix();
        const Matrix Z = Xinv * K;
        const Matrix Y = K.transpose() * Z;
        const EigenDecomposition ey = eigh(SymMatrix(Y));
        const Matrix W = ey.vectors * ey.values.cwiseInverse().asDiagonal() *
                         ey.vectors.transpose();
        const Matrix N = Z * W * Z.transpose();
        fill_columns([&](const Matrix& Ej) -> Matrix {
          const Matrix T = Xinv * Ej * N;
          return T + T.transpose() - N * Ej * N;
        });
      }
      break;
    }
    case CriterionKind::PMean: {
      const double p = spec.p();
      if (spec.identity_k()) {
        const EigenDecomposition ex = eigh(X);
        if (ex.values[ex.values.size() - 1] <= 0.0)
          throw NotPositiveDefinite("hessian: nonpositive eigenvalue under pmean");
        const Matrix S = divided_difference(pmean_dd_identity_k(p), ex.values);
        const Matrix& V = ex.vectors;
        fill_columns([&](const Matrix& Ej) -> Matrix {
          return V * S.cwiseProduct(V.transpose() * Ej * V) * V.transpose();
        });
      } else {
        const Matrix& K = spec.k_matrix();
        const Matrix Z = Xinv * K;
        const Matrix Y = K.transpose() * Z;
        const EigenDecomposition ey = eigh(SymMatrix(Y));
        if (ey.values[ey.values.size() - 1] <= 0.0)
          throw NotPositiveDefinite("hessian: K^T X^-1 K not positive definite");
        const Matrix S = divided_difference(pmean_dd_general_k(p), ey.values);
        const Matrix B = Z * ey.vectors;  // X^-1 K V
        const Matrix G = B * ey.values.array().pow(-p - 1.0).matrix().asDiagonal() *
                         B.transpose();
        fill_columns([&](const Matrix& Ej) -> Matrix {
          const Matrix T1 = B * S.cwiseProduct(B.transpose() * Ej * B) * B.transpose();
          const Matrix T2 = G * Ej * Xinv;
          return -p * (T1 + T2 + T2.transpose());
        });
      }
      break;
    }
  }
  return 0.5 * (Hess + Hess.transpose());
}

// Full eigendecomposition of the materialized Hessian, truncated to exactly
// the analytic rank. Eigenvalues below -1e-8 lambda_max signal a formula bug
// (convexity guarantees PSD); a surviving eigenvalue past the analytic rank
// signals one too.
inline HessianFactor hessian(const CriterionSpec& spec, const SymMatrix& X) {
  const Matrix Hd = hessian_dense(spec, X);
  const EigenDecomposition ed = eigh(SymMatrix(Hd));
  const long len = Hd.rows();
  const int r = analytic_rank(spec);
  const double lmax = ed.values[0];
  if (!(lmax > 0.0)) throw NegativeCurvature("criterion Hessian has no positive eigenvalue");
  if (ed.values[len - 1] < -1e-8 * lmax)
    throw NegativeCurvature("criterion Hessian eigenvalue " +
                            std::to_string(ed.values[len - 1]) + " below -1e-8 lambda_max");
  if (r < len && ed.values[r] > 1e-8 * lmax)
    throw Error("criterion Hessian numerical rank exceeds the analytic rank " +
                std::to_string(r));
  HessianFactor factor;
  factor.rank = r;
  factor.weights = ed.values.head(r).cwiseMax(0.0);
  factor.basis = ed.vectors.leftCols(r);
  return factor;
}

// C_K(X) = (K^T X^-1 K)^-1, the k x k information matrix.
inline SymMatrix information_matrix(const CriterionSpec& spec, const SymMatrix& X) {
  if (X.order() != spec.m()) throw DimensionMismatch("criterion order != matrix order");
  if (spec.identity_k()) {
    detail::spd_inverse(X, "information_matrix");  // positivity gate
    return X;
  }
  const Matrix Xinv = detail::spd_inverse(X, "information_matrix");
  const Matrix& K = spec.k_matrix();
  const Matrix Y = K.transpose() * Xinv * K;
  return SymMatrix(detail::spd_inverse(SymMatrix(Y), "information_matrix"));
}

}  // namespace optdesign
