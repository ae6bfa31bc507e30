#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "optdesign/problem.hpp"
#include "test_util.hpp"

using namespace optdesign;

TEST_CASE("design space generators follow the benchmark formulas", "[problem]") {
  const DesignSpace c2 = generate_space(SpaceFamily::Chi2, 3);
  REQUIRE(c2.n() == 3);
  REQUIRE(c2.m() == 4);
  CHECK(c2.points.col(0).isApprox(Eigen::Vector4d(1, 1, 1, 1), 1e-15));  // s_1 = 1

  const DesignSpace c1 = generate_space(SpaceFamily::Chi1, 3);
  const double e3 = std::exp(-3.0), e6 = std::exp(-6.0);
  CHECK(c1.points.col(2).isApprox(Eigen::Vector4d(e3, 3 * e3, e6, 3 * e6), 1e-15));

  const DesignSpace c3 = generate_space(SpaceFamily::Chi3, 2);
  REQUIRE(c3.n() == 4);
  REQUIRE(c3.m() == 5);
  // Point (i=1, j=2): r_1 = 0, t_2 = 1.
  Eigen::VectorXd expected(5);
  expected << 1, 0, 0, 1, 0;
  CHECK(c3.points.col(1).isApprox(expected, 1e-15));

  const DesignSpace c4 = generate_space(SpaceFamily::Chi4, 4);
  CHECK((c4.points.col(3) - Eigen::Vector4d(1, 1, 0, 1)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("generators are deterministic", "[problem]") {
  for (SpaceFamily f :
       {SpaceFamily::Chi1, SpaceFamily::Chi2, SpaceFamily::Chi3, SpaceFamily::Chi4}) {
    const DesignSpace a = generate_space(f, 7);
    const DesignSpace b = generate_space(f, 7);
    CHECK(a.points == b.points);
  }
}

TEST_CASE("assembly builds svec columns and validates the design", "[problem]") {
  DesignSpace single;
  single.points = Eigen::Vector2d(1, 0);
  single.label = "single";
  // One rank-one atom is degenerate for a 2x2 moment matrix.
  CHECK_THROWS_AS(DesignProblem::assemble(single, CriterionSpec::a(2)), DegenerateDesign);

  // Same point as a 1-dimensional problem: fine.
  DesignSpace one_dim;
  one_dim.points = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const DesignProblem p1 = DesignProblem::assemble(one_dim, CriterionSpec::a(1));
  CHECK(p1.svec_design()(0, 0) == 4.0);

  const DesignProblem chi2 =
      DesignProblem::assemble(generate_space(SpaceFamily::Chi2, 100), CriterionSpec::a(4));
  CHECK(chi2.n() == 100);
  // Column i equals svec(x_i x_i^T).
  const Vector x = generate_space(SpaceFamily::Chi2, 100).points.col(17);
  CHECK(chi2.svec_design().col(17).isApprox(svec(SymMatrix(x * x.transpose())), 1e-15));

  // Duplicated points are allowed and produce equal columns.
  DesignSpace dup;
  dup.points.resize(2, 3);
  dup.points.col(0) << 1, 0;
  dup.points.col(1) << 1, 0;
  dup.points.col(2) << 0, 1;
  const DesignProblem pdup = DesignProblem::assemble(dup, CriterionSpec::a(2));
  CHECK(pdup.svec_design().col(0) == pdup.svec_design().col(1));

  // Zero design point.
  DesignSpace zero;
  zero.points = Matrix::Zero(2, 2);
  zero.points.col(0) << 1, 1;
  CHECK_THROWS_AS(DesignProblem::assemble(zero, CriterionSpec::a(2)), ZeroAtom);
}

TEST_CASE("explicit PSD atoms", "[problem]") {
  auto g = testutil::rng(301);
  std::vector<SymMatrix> atoms;
  for (int i = 0; i < 3; ++i) atoms.push_back(SymMatrix(testutil::random_spd(g, 3)));
  const DesignProblem p = DesignProblem::from_atoms(atoms, CriterionSpec::d(3));
  CHECK(p.n() == 3);
  CHECK(p.atom(1).mat().isApprox(atoms[1].mat(), 1e-14));

  atoms.push_back(SymMatrix(Eigen::Vector3d(1, 1, -1).asDiagonal().toDenseMatrix()));
  CHECK_THROWS_AS(DesignProblem::from_atoms(atoms, CriterionSpec::d(3)), DegenerateDesign);
}

TEST_CASE("moment matrix", "[problem]") {
  auto g = testutil::rng(302);
  std::vector<SymMatrix> atoms{SymMatrix(testutil::random_spd(g, 3)),
                               SymMatrix(testutil::random_spd(g, 3))};
  const DesignProblem p = DesignProblem::from_atoms(atoms, CriterionSpec::a(3));

  CHECK(p.moment_matrix({Eigen::Vector2d(1, 0)}).mat().isApprox(atoms[0].mat(), 1e-14));
  CHECK(p.moment_matrix({Eigen::Vector2d(0.5, 0.5)})
            .mat()
            .isApprox(0.5 * (atoms[0].mat() + atoms[1].mat()), 1e-14));

  // chi2(10) uniform weights against direct summation.
  const DesignSpace space = generate_space(SpaceFamily::Chi2, 10);
  const DesignProblem chi2 = DesignProblem::assemble(space, CriterionSpec::a(4));
  Matrix direct = Matrix::Zero(4, 4);
  for (int i = 0; i < 10; ++i)
    direct += space.points.col(i) * space.points.col(i).transpose() / 10.0;
  CHECK((chi2.moment_matrix({Vector::Constant(10, 0.1)}).mat() - direct).norm() <=
        1e-14 * direct.norm());
}

TEST_CASE("svec design consistency over random weights", "[problem]") {
  auto g = testutil::rng(303);
  const DesignSpace space = generate_space(SpaceFamily::Chi4, 40);
  const DesignProblem p = DesignProblem::assemble(space, CriterionSpec::a(4));
  for (int trial = 0; trial < 50; ++trial) {
    const Vector w = testutil::random_simplex_point(g, 40);
    Matrix direct = Matrix::Zero(4, 4);
    for (int i = 0; i < 40; ++i)
      direct += w[i] * (space.points.col(i) * space.points.col(i).transpose());
    CHECK((p.moment_matrix({w}).mat() - direct).norm() <= 1e-13 * direct.norm());
  }
}

TEST_CASE("reduce and lift", "[problem]") {
  CHECK(lift(ReducedWeights{Vector(0)}).v.isApprox(Vector::Ones(1), 0.0));

  Eigen::Vector3d w(0.2, 0.3, 0.5);
  const ReducedWeights r = reduce({w});
  CHECK(r.v.isApprox(Eigen::Vector2d(0.2, 0.3), 0.0));
  CHECK(lift(r).v.isApprox(w, 1e-15));

  CHECK_THROWS_AS(reduce({Eigen::Vector3d(0.2, 0.3, 0.4)}), NotOnSimplex);
  CHECK_THROWS_AS(reduce({Eigen::Vector3d(-0.1, 0.6, 0.5)}), NotOnSimplex);
  CHECK_THROWS_AS(lift(ReducedWeights{Eigen::Vector2d(0.8, 0.8)}), NotOnSimplex);

  auto g = testutil::rng(304);
  const Vector y = testutil::random_matrix(g, 6, 1).col(0);
  const Vector pty = apply_p_transpose(y);
  for (int i = 0; i < 5; ++i) CHECK(pty[i] == y[i] - y[5]);
}

TEST_CASE("trace identity ties criterion gradients to the design matrix", "[problem]") {
  // d_i(w) = -tr(gradPhi(M(w)) A_i) == -(M^T gradphi)_i.
  auto g = testutil::rng(305);
  const DesignSpace space = generate_space(SpaceFamily::Chi2, 25);
  for (const CriterionSpec& spec :
       {CriterionSpec::a(4), CriterionSpec::d(4), CriterionSpec::pmean(4, -0.75)}) {
    const DesignProblem p = DesignProblem::assemble(space, spec);
    const Vector w = testutil::random_simplex_point(g, 25);
    const CriterionEval ev = grad(spec, p.moment_matrix({w}));
    const Vector via_design = -(p.svec_design().transpose() * ev.grad_svec);
    for (int i = 0; i < p.n(); ++i) {
      const double via_trace = -(ev.grad_matrix.mat() * p.atom(i).mat()).trace();
      // Rounding in either route scales with the factor norms, not the result.
      const double scale = ev.grad_matrix.mat().norm() * p.atom(i).mat().norm();
      CHECK(std::abs(via_design[i] - via_trace) <= 1e-12 * std::max(1.0, scale));
    }
  }
}
