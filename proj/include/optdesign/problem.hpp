#pragma once

// Finite design spaces, problem assembly and the svec design matrix
// M = [svec(A_1) ... svec(A_n)] that powers both solvers. A problem is
// immutable after assembly and safe to share across threads.

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "optdesign/criteria.hpp"
#include "optdesign/errors.hpp"
#include "optdesign/symlin.hpp"

namespace optdesign {

enum class SpaceFamily { Chi1, Chi2, Chi3, Chi4 };

inline const char* to_string(SpaceFamily f) {
  switch (f) {
    case SpaceFamily::Chi1: return "chi1";
    case SpaceFamily::Chi2: return "chi2";
    case SpaceFamily::Chi3: return "chi3";
    case SpaceFamily::Chi4: return "chi4";
  }
  return "?";
}

// Regression vectors stored column-wise: points.col(i) = x_{i+1}.
struct DesignSpace {
  Matrix points;
  std::string label;

  int m() const { return static_cast<int>(points.rows()); }
  int n() const { return static_cast<int>(points.cols()); }
};

// The four benchmark families, with s_i = 3i/n, r_i = 2i/n - 1, t_i = i/n
// for i = 1..n. chi3 is the n x n grid of (r_i, t_j) pairs, point index
// (i-1)n + j, so its design holds n^2 points of dimension 5; the others hold
// n points of dimension 4.
inline DesignSpace generate_space(SpaceFamily family, int n) {
  if (n < 1) throw ConfigError("design space size must be >= 1");
  DesignSpace space;
  space.label = to_string(family);
  switch (family) {
    case SpaceFamily::Chi1: {
      space.points.resize(4, n);
      for (int i = 1; i <= n; ++i) {
        const double s = 3.0 * i / n;
        const double e1 = std::exp(-s), e2 = std::exp(-2.0 * s);
        space.points.col(i - 1) << e1, s * e1, e2, s * e2;
      }
      break;
    }
    case SpaceFamily::Chi2: {
      space.points.resize(4, n);
      for (int i = 1; i <= n; ++i) {
        const double s = 3.0 * i / n;
        space.points.col(i - 1) << 1.0, s, s * s, s * s * s;
      }
      break;
    }
    case SpaceFamily::Chi3: {
      space.points.resize(5, static_cast<long>(n) * n);
      for (int i = 1; i <= n; ++i) {
        const double r = 2.0 * i / n - 1.0;
        for (int j = 1; j <= n; ++j) {
          const double t = static_cast<double>(j) / n;
          space.points.col(static_cast<long>(i - 1) * n + (j - 1)) << 1.0, r, r * r, t, r * t;
        }
      }
      break;
    }
    case SpaceFamily::Chi4: {
      space.points.resize(4, n);
      for (int i = 1; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        space.points.col(i - 1) << t, t * t, std::sin(2.0 * std::numbers::pi * t),
            std::cos(2.0 * std::numbers::pi * t);
      }
      break;
    }
  }
  return space;
}

// Weights on the full simplex (w >= 0, sum w = 1).
struct FullWeights {
  Vector v;
};

// Free part of the reduced parametrization (w_tilde >= 0, sum w_tilde <= 1);
// the eliminated coordinate is 1 - sum.
struct ReducedWeights {
  Vector v;
};

inline void check_on_simplex(const FullWeights& w) {
  if (w.v.size() < 1 || w.v.minCoeff() < 0.0 || std::abs(w.v.sum() - 1.0) > 1e-12)
    throw NotOnSimplex("full weights must be nonnegative and sum to 1");
}

inline FullWeights lift(const ReducedWeights& wt) {
  const long n1 = wt.v.size();
  if (n1 > 0 && (wt.v.minCoeff() < 0.0 || wt.v.sum() > 1.0 + 1e-12))
    throw NotOnSimplex("reduced weights must be nonnegative with sum <= 1");
  Vector w(n1 + 1);
  w.head(n1) = wt.v;
  w[n1] = 1.0 - wt.v.sum();
  return {std::move(w)};
}

inline ReducedWeights reduce(const FullWeights& w) {
  check_on_simplex(w);
  return {w.v.head(w.v.size() - 1)};
}

// P^T y = (y_1 - y_n, ..., y_{n-1} - y_n); P itself is never materialized.
inline Vector apply_p_transpose(const Vector& y) {
  const long n = y.size();
  return y.head(n - 1).array() - y[n - 1];
}

class DesignProblem {
public:
  // Rank-one atoms A_i = x_i x_i^T from a design space.
  static DesignProblem assemble(const DesignSpace& space, CriterionSpec criterion) {
    if (criterion.m() != space.m())
      throw DimensionMismatch("criterion order " + std::to_string(criterion.m()) +
                              " != design point dimension " + std::to_string(space.m()));
    const int m = space.m();
    const int n = space.n();
    Matrix M(svec_length(m), n);
    for (int i = 0; i < n; ++i) {
      const Vector& x = space.points.col(i);
      if (x.squaredNorm() == 0.0)
        throw ZeroAtom("design point " + std::to_string(i + 1) + " is zero");
      M.col(i) = svec(SymMatrix(x * x.transpose()));
    }
    DesignProblem problem(std::move(M), std::move(criterion), space.label);
    problem.points_ = space.points;
    return problem;
  }

  // Explicit PSD atoms.
  static DesignProblem from_atoms(const std::vector<SymMatrix>& atoms,
                                  CriterionSpec criterion, std::string label = "atoms") {
    if (atoms.empty()) throw ConfigError("problem needs at least one information atom");
    const int m = atoms.front().order();
    if (criterion.m() != m)
      throw DimensionMismatch("criterion order != atom order");
    Matrix M(svec_length(m), static_cast<long>(atoms.size()));
    for (size_t i = 0; i < atoms.size(); ++i) {
      const SymMatrix& A = atoms[i];
      if (A.order() != m) throw DimensionMismatch("atoms must share one order");
      const double norm = A.mat().norm();
      if (norm == 0.0) throw ZeroAtom("atom " + std::to_string(i + 1) + " is zero");
      const double min_eig = eigh(A).values.minCoeff();
      if (min_eig < -1e-10 * norm)
        throw DegenerateDesign("atom " + std::to_string(i + 1) +
                               " is not positive semidefinite");
      M.col(static_cast<long>(i)) = svec(A);
    }
    DesignProblem problem(std::move(M), std::move(criterion), std::move(label));
    problem.atoms_ = atoms;
    return problem;
  }

  int n() const { return static_cast<int>(svec_design_.cols()); }
  int m() const { return criterion_.m(); }
  const std::string& label() const { return label_; }
  const CriterionSpec& criterion() const { return criterion_; }

  // M = [svec(A_1) ... svec(A_n)], dense column-major, built once.
  const Matrix& svec_design() const { return svec_design_; }

  SymMatrix atom(int i) const {
    if (atoms_) return (*atoms_)[static_cast<size_t>(i)];
    return smat(svec_design_.col(i));
  }

  // Source data, retained so files round-trip exactly.
  const std::optional<Matrix>& points() const { return points_; }
  const std::optional<std::vector<SymMatrix>>& atoms() const { return atoms_; }

  // Same design, different criterion (multi-seed K sweeps reuse the design
  // matrix instead of re-assembling it).
  DesignProblem with_criterion(CriterionSpec criterion) const {
    if (criterion.m() != m()) throw DimensionMismatch("criterion order != problem order");
    DesignProblem copy = *this;
    copy.criterion_ = std::move(criterion);
    return copy;
  }

  Vector moment_svec(const FullWeights& w) const {
    check_on_simplex(w);
    if (w.v.size() != n()) throw DimensionMismatch("weight length != n");
    return svec_design_ * w.v;
  }

  SymMatrix moment_matrix(const FullWeights& w) const { return smat(moment_svec(w)); }

private:
  DesignProblem(Matrix M, CriterionSpec criterion, std::string label)
      : svec_design_(std::move(M)), criterion_(std::move(criterion)), label_(std::move(label)) {
    // Operational form of the positivity assumption: the uniform-weight
    // moment matrix must be SPD.
    const int nn = n();
    const SymMatrix uniform = smat(svec_design_ * Vector::Constant(nn, 1.0 / nn));
    Eigen::LLT<Matrix> llt(uniform.mat());
    if (llt.info() != Eigen::Success)
      throw DegenerateDesign("uniform-weight moment matrix is not positive definite");
  }

  Matrix svec_design_;
  CriterionSpec criterion_;
  std::string label_;
  std::optional<Matrix> points_;
  std::optional<std::vector<SymMatrix>> atoms_;
};

}  // namespace optdesign
