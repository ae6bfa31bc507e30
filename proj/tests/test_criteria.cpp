#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "optdesign/criteria.hpp"
#include "test_util.hpp"

using namespace optdesign;

namespace {

// Central finite differences of value() in svec coordinates.
Vector fd_gradient(const CriterionSpec& spec, const SymMatrix& X, double h = 1e-5) {
  const Vector x = svec(X);
  Vector g(x.size());
  for (long j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    g[j] = (value(spec, smat(xp)) - value(spec, smat(xm))) / (2.0 * h);
  }
  return g;
}

// Central finite differences of grad() in svec coordinates.
Matrix fd_hessian(const CriterionSpec& spec, const SymMatrix& X, double h = 1e-5) {
  const Vector x = svec(X);
  Matrix H(x.size(), x.size());
  for (long j = 0; j < x.size(); ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    H.col(j) = (grad(spec, smat(xp)).grad_svec - grad(spec, smat(xm)).grad_svec) / (2.0 * h);
  }
  return H;
}

std::vector<CriterionSpec> spec_sweep(std::mt19937_64& g, int m) {
  std::vector<CriterionSpec> specs;
  specs.push_back(CriterionSpec::a(m));
  specs.push_back(CriterionSpec::d(m));
  specs.push_back(CriterionSpec::pmean(m, -0.5));
  specs.push_back(CriterionSpec::pmean(m, -2.0));
  specs.push_back(CriterionSpec::c(testutil::random_full_rank(g, m, 1).col(0)));
  for (int k = 1; k <= m; ++k) {
    Matrix K = testutil::random_full_rank(g, m, k);
    specs.push_back(CriterionSpec::a(K));
    specs.push_back(CriterionSpec::d(K));
    specs.push_back(CriterionSpec::pmean(K, -0.75));
    specs.push_back(CriterionSpec::pmean(K, -1.1));
  }
  return specs;
}

}  // namespace

TEST_CASE("criterion values on closed-form cases", "[criteria]") {
  for (int m : {2, 3, 5}) {
    CHECK(value(CriterionSpec::a(m), SymMatrix::identity(m)) == Catch::Approx(m));
    CHECK(value(CriterionSpec::d(m), SymMatrix::identity(m)) ==
          Catch::Approx(0.0).margin(1e-14));
  }

  const SymMatrix X49(Eigen::Vector2d(4, 9).asDiagonal().toDenseMatrix());
  CHECK(value(CriterionSpec::pmean(2, -0.5), X49) == Catch::Approx(5.0 / 6.0).epsilon(1e-12));

  const SymMatrix X25(Eigen::Vector2d(2, 5).asDiagonal().toDenseMatrix());
  CHECK(value(CriterionSpec::c(Eigen::Vector2d(1, 0)), X25) == Catch::Approx(0.5).epsilon(1e-12));

  Matrix notpd = Eigen::Vector2d(1, -1).asDiagonal();
  CHECK_THROWS_AS(value(CriterionSpec::a(2), SymMatrix(notpd)), NotPositiveDefinite);
}

TEST_CASE("criterion spec validation", "[criteria]") {
  CHECK_THROWS_AS(CriterionSpec::pmean(3, 0.5), ConfigError);
  CHECK_THROWS_AS(CriterionSpec::pmean(3, 0.0), ConfigError);

  Matrix K(3, 2);
  K << 1, 2, 1, 2, 1, 2;  // rank one
  CHECK_THROWS_AS(CriterionSpec::a(K), RankDeficient);

  CHECK(CriterionSpec::c(Eigen::Vector3d(1, 0, 0)).k() == 1);
}

TEST_CASE("gradient closed forms", "[criteria]") {
  const int m = 3;
  CHECK(grad(CriterionSpec::a(m), SymMatrix::identity(m))
            .grad_svec.isApprox(-svec(SymMatrix::identity(m)), 1e-14));

  auto g = testutil::rng(201);
  const SymMatrix X(testutil::random_spd(g, m));
  const Matrix Xinv = X.mat().inverse();
  CHECK(grad(CriterionSpec::d(m), X).grad_svec.isApprox(-svec(SymMatrix(Xinv)), 1e-12));

  const SymMatrix X23(Eigen::Vector2d(2, 3).asDiagonal().toDenseMatrix());
  const Vector expected =
      -2.0 * svec(SymMatrix(Eigen::Vector2d(std::pow(2.0, -3), std::pow(3.0, -3))
                                .asDiagonal()
                                .toDenseMatrix()));
  CHECK(grad(CriterionSpec::pmean(2, -2.0), X23).grad_svec.isApprox(expected, 1e-12));
}

TEST_CASE("pmean with p = -1 coincides with the A-criterion", "[criteria]") {
  auto g = testutil::rng(202);
  for (int m : {2, 4}) {
    const Matrix K = testutil::random_full_rank(g, m, std::max(1, m / 2));
    const SymMatrix X(testutil::random_spd(g, m));
    const auto ea = grad(CriterionSpec::a(K), X);
    const auto ep = grad(CriterionSpec::pmean(K, -1.0), X);
    CHECK(ep.value == Catch::Approx(ea.value).epsilon(1e-12));
    CHECK((ep.grad_svec - ea.grad_svec).norm() <= 1e-12 * ea.grad_svec.norm());

    const Matrix Ha = hessian_dense(CriterionSpec::a(K), X);
    const Matrix Hp = hessian_dense(CriterionSpec::pmean(K, -1.0), X);
    CHECK((Ha - Hp).norm() <= 1e-10 * Ha.norm());

    const Matrix Ra = hessian(CriterionSpec::a(K), X).reconstruct();
    const Matrix Rp = hessian(CriterionSpec::pmean(K, -1.0), X).reconstruct();
    CHECK((Ra - Rp).norm() <= 1e-10 * Ra.norm());
  }
}

TEST_CASE("c-criterion equals A with one column", "[criteria]") {
  auto g = testutil::rng(203);
  const int m = 4;
  const Vector cvec = testutil::random_full_rank(g, m, 1).col(0);
  const SymMatrix X(testutil::random_spd(g, m));
  const auto ec = grad(CriterionSpec::c(cvec), X);
  const auto ea = grad(CriterionSpec::a(Matrix(cvec)), X);
  CHECK(ec.value == Catch::Approx(ea.value).epsilon(1e-13));
  CHECK(ec.grad_svec.isApprox(ea.grad_svec, 1e-13));
}

TEST_CASE("gradients match finite differences of the value", "[criteria]") {
  auto g = testutil::rng(204);
  for (int m : {2, 3, 4}) {
    for (const CriterionSpec& spec : spec_sweep(g, m)) {
      for (int trial = 0; trial < 3; ++trial) {
        const SymMatrix X(testutil::random_spd(g, m, 1.0));
        const auto ev = grad(spec, X);
        const Vector fd = fd_gradient(spec, X);
        CHECK((ev.grad_svec - fd).norm() <= 1e-6 * std::max(1.0, fd.norm()));

        // The matrix gradient is negative semidefinite at SPD X.
        const Vector eigs = eigh(ev.grad_matrix).values;
        CHECK(eigs[0] <= 1e-10 * eigs.cwiseAbs().maxCoeff());
      }
    }
  }
}

TEST_CASE("hessians match finite differences of the gradient", "[criteria]") {
  auto g = testutil::rng(205);
  for (int m : {2, 3, 4}) {
    for (const CriterionSpec& spec : spec_sweep(g, m)) {
      const SymMatrix X(testutil::random_spd(g, m, 1.0));
      const Matrix H = hessian_dense(spec, X);
      const Matrix fd = fd_hessian(spec, X);
      CHECK((H - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
    }
  }
}

TEST_CASE("hessian closed forms and factorization", "[criteria]") {
  const int m = 3;
  const long len = svec_length(m);

  // A at the identity: 2 (I (x)_s I) = 2I.
  const HessianFactor f = hessian(CriterionSpec::a(m), SymMatrix::identity(m));
  CHECK(f.rank == len);
  CHECK(f.weights.isApprox(Vector::Constant(len, 2.0), 1e-12));
  CHECK(f.reconstruct().isApprox(2.0 * Matrix::Identity(len, len), 1e-12));

  // D with identity K: X^-1 (x)_s X^-1, cross-checked against the general-K path.
  auto g = testutil::rng(206);
  const SymMatrix X(testutil::random_spd(g, m));
  const Matrix Xinv = X.mat().inverse();
  const Matrix Hfast = hessian_dense(CriterionSpec::d(m), X);
  CHECK((Hfast - skron_materialize(Xinv, Xinv)).norm() <= 1e-10 * Hfast.norm());
  const Matrix Hgeneral = hessian_dense(CriterionSpec::d(Matrix(Matrix::Identity(m, m))), X);
  CHECK((Hfast - Hgeneral).norm() <= 1e-10 * Hfast.norm());

  // Factor reconstruction against the untruncated matrix.
  for (int k : {1, 2, 3}) {
    const Matrix K = testutil::random_full_rank(g, m, k);
    for (const CriterionSpec& spec :
         {CriterionSpec::a(K), CriterionSpec::d(K), CriterionSpec::pmean(K, -0.75)}) {
      const Matrix Hd = hessian_dense(spec, X);
      const HessianFactor factor = hessian(spec, X);
      CHECK(factor.rank == analytic_rank(spec));
      CHECK((factor.reconstruct() - Hd).norm() <= 1e-9 * Hd.norm());
      CHECK(factor.weights.minCoeff() >= 0.0);
      CHECK((factor.basis.transpose() * factor.basis - Matrix::Identity(factor.rank, factor.rank))
                .norm() <= 1e-10 * factor.rank);
      for (int i = 0; i + 1 < factor.rank; ++i)
        CHECK(factor.weights[i] >= factor.weights[i + 1]);
    }
  }
}

TEST_CASE("analytic rank formula and numerical rank agree", "[criteria]") {
  CHECK(analytic_rank(CriterionSpec::a(4)) == 10);
  CHECK(analytic_rank(CriterionSpec::pmean(testutil::random_full_rank(
                          *std::make_unique<std::mt19937_64>(1), 4, 3), -0.5)) == 9);
  CHECK(analytic_rank(CriterionSpec::c(Eigen::VectorXd::Unit(5, 0))) == 5);

  auto g = testutil::rng(207);
  for (int m : {3, 4}) {
    const SymMatrix X(testutil::random_spd(g, m));
    for (int k = 1; k <= m; ++k) {
      const Matrix K = testutil::random_full_rank(g, m, k);
      for (const CriterionSpec& spec :
           {CriterionSpec::a(K), CriterionSpec::d(K), CriterionSpec::pmean(K, -1.5)}) {
        const Vector eigs = eigh(SymMatrix(hessian_dense(spec, X))).values;
        const double lmax = eigs[0];
        int numerical_rank = 0;
        for (long i = 0; i < eigs.size(); ++i)
          if (eigs[i] > 1e-8 * lmax) ++numerical_rank;
        CHECK(numerical_rank == analytic_rank(spec));
      }
    }
  }
}

TEST_CASE("information matrix", "[criteria]") {
  auto g = testutil::rng(208);
  const SymMatrix X(testutil::random_spd(g, 3));
  CHECK(information_matrix(CriterionSpec::a(3), X).mat().isApprox(X.mat(), 0.0));

  const SymMatrix X25(Eigen::Vector2d(2, 5).asDiagonal().toDenseMatrix());
  const SymMatrix info = information_matrix(CriterionSpec::c(Eigen::Vector2d(1, 0)), X25);
  CHECK(info.order() == 1);
  CHECK(info(0, 0) == Catch::Approx(2.0).epsilon(1e-12));

  // Composing Psi with the information matrix reproduces the criterion value.
  const int m = 4, k = 2;
  const Matrix K = testutil::random_full_rank(g, m, k);
  const SymMatrix X4(testutil::random_spd(g, m));
  const Matrix C = information_matrix(CriterionSpec::a(K), X4).mat();
  CHECK(C.inverse().trace() == Catch::Approx(value(CriterionSpec::a(K), X4)).epsilon(1e-11));
  CHECK(-std::log(C.determinant()) ==
        Catch::Approx(value(CriterionSpec::d(K), X4)).epsilon(1e-11));
  const double p = -0.5;
  const Vector dC = eigh(SymMatrix(C)).values;
  CHECK(dC.array().pow(p).sum() ==
        Catch::Approx(value(CriterionSpec::pmean(K, p), X4)).epsilon(1e-11));
}

TEST_CASE("criterion values decrease along the PSD order", "[criteria]") {
  auto g = testutil::rng(209);
  const int m = 4;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix X1 = testutil::random_spd(g, m);
    const Matrix Z = testutil::random_matrix(g, m, 2);
    const Matrix X2 = X1 + Z * Z.transpose();
    const Matrix K = testutil::random_full_rank(g, m, 2);
    for (const CriterionSpec& spec :
         {CriterionSpec::a(K), CriterionSpec::d(K), CriterionSpec::pmean(K, -0.5),
          CriterionSpec::pmean(K, -2.0)}) {
      CHECK(value(spec, SymMatrix(X2)) <= value(spec, SymMatrix(X1)) + 1e-12);
    }
  }
}

TEST_CASE("nearly singular information matrix is rejected", "[criteria]") {
  Matrix X = Eigen::Vector2d(1.0, 1e-15).asDiagonal();
  const Matrix K = Matrix::Identity(2, 2);
  CHECK_THROWS_AS(grad(CriterionSpec::pmean(K, -0.5), SymMatrix(X)),
                  SingularInformationMatrix);
}
