#include <cmath>

#include <gtest/gtest.h>

#include "gscatter/diagnostics.hpp"
#include "gscatter/errors.hpp"
#include "gscatter/estimator.hpp"
#include "gscatter/mfunc.hpp"
#include "test_support.hpp"

namespace gscatter {
namespace {

using testing::matrix_near;

// Tight enough that distances between solutions agree to ~1e-9; the default
// residual tolerance only pins the estimate to ~1e-5.
SolverOptions tight() {
  SolverOptions o;
  o.tol = 1e-22;
  o.max_iter = 5000;
  return o;
}

// Atoms spanning ℝ³ that violate the condition on span(e₁, e₂):
// I = (1/3)·2 − (3/4)·1 < 0.
EmpiricalMeasure planar_plus_vertical() {
  std::vector<SubspacePoint> pts;
  for (double a : {0.0, 0.7, 1.9}) {
    Matrix x(3, 1);
    x << std::cos(a), std::sin(a), 0.0;
    pts.push_back(SubspacePoint::from_basis(x));
  }
  pts.push_back(SubspacePoint::coordinate(3, 2, 1));
  return EmpiricalMeasure::uniform(pts);
}

TEST(FixedPoint, ThreeLinesGiveIdentity) {
  const auto res = fixed_point_solve(testing::three_lines());
  EXPECT_EQ(res.status, SolverStatus::kConverged);
  EXPECT_LE(res.residual, 1e-12);
  EXPECT_TRUE(matrix_near(res.estimate.matrix(), Matrix::Identity(2, 2), 1e-6));
}

TEST(FixedPoint, GaussianSampleConverges) {
  Rng rng = make_stream(17, 0);
  const auto star = random_scatter(3, rng);
  const auto meas = sample_empirical(star, 2, 60, rng);
  const auto res = fixed_point_solve(meas);
  EXPECT_EQ(res.status, SolverStatus::kConverged);
  EXPECT_LE(res.residual, 1e-12);
  EXPECT_NEAR(res.estimate.matrix().determinant(), 1.0, 1e-10);
  EXPECT_TRUE(matrix_near(res.estimate.matrix(), res.estimate.matrix().transpose(), 0.0));
}

TEST(FixedPoint, OrthogonalLinesHaveAFamilyOfSolutions) {
  const auto meas = testing::orthogonal_lines();
  for (double a : {0.1, 0.5, 1.0, 3.0, 40.0}) {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = a;
    d(1, 1) = 1.0 / a;
    EXPECT_LE(residual(meas, ScatterMatrix::from_matrix(d)), 1e-12) << a;
  }
  Rng rng = make_stream(3, 0);
  const auto res = fixed_point_solve(meas, random_scatter(2, rng));
  EXPECT_EQ(res.status, SolverStatus::kConverged);
  EXPECT_LE(res.residual, 1e-12);
  EXPECT_EQ(classify_existence(meas).verdict, Verdict::kLimit);
}

TEST(FixedPoint, NonSpanningAtomsRaise) {
  EXPECT_THROW(fixed_point_solve(testing::planar_lines()), ExistenceError);
  EXPECT_THROW(riemannian_descent(testing::planar_lines()), ExistenceError);
}

TEST(FixedPoint, ViolatingSubspaceDivergesToBoundary) {
  const auto meas = planar_plus_vertical();
  const auto res = fixed_point_solve(meas);
  ASSERT_EQ(res.status, SolverStatus::kDivergedToBoundary);
  ASSERT_FALSE(res.flag.empty());
  const auto plane = SubspacePoint::coordinate(3, 0, 2);
  bool found = false;
  for (const auto& step : res.flag.steps) {
    if (step.subspace.dim() == 2 && same_span(step.subspace, plane, 1e-4)) found = true;
  }
  EXPECT_TRUE(found);
}

TEST(FixedPoint, DampingStillConverges) {
  Rng rng = make_stream(5, 0);
  const auto meas = testing::random_measure(3, 1, 12, rng);
  SolverOptions o;
  o.damping = 0.5;
  o.max_iter = 2000;
  const auto damped = fixed_point_solve(meas, std::nullopt, o);
  const auto full = fixed_point_solve(meas);
  EXPECT_EQ(damped.status, SolverStatus::kConverged);
  EXPECT_LE(distance(damped.estimate, full.estimate), 1e-4);
}

TEST(FixedPoint, InvalidOptionsRejected) {
  SolverOptions o;
  o.damping = 0.0;
  EXPECT_THROW(fixed_point_solve(testing::three_lines(), std::nullopt, o), UsageError);
  o.damping = 1.0;
  o.tol = -1.0;
  EXPECT_THROW(fixed_point_solve(testing::three_lines(), std::nullopt, o), UsageError);
}

TEST(FixedPoint, TraceRecordsDistanceFromStart) {
  Rng rng = make_stream(8, 0);
  const auto meas = testing::random_measure(3, 2, 10, rng);
  const auto res = fixed_point_solve(meas);
  ASSERT_FALSE(res.trace.empty());
  EXPECT_EQ(res.trace.back().iteration, res.iterations);
  EXPECT_NEAR(res.trace.back().distance, distance(ScatterMatrix::identity(3), res.estimate), 1e-12);
}

TEST(Descent, ThreeLinesAgreeWithFixedPoint) {
  const auto fp = fixed_point_solve(testing::three_lines(), std::nullopt, tight());
  const auto gd = riemannian_descent(testing::three_lines(), std::nullopt, tight());
  EXPECT_EQ(gd.status, SolverStatus::kConverged);
  EXPECT_LE(distance(fp.estimate, gd.estimate), 1e-8);
}

TEST(Descent, AgreesWithFixedPointOnRandomInstances) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(101, i);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(i % 3);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(i % static_cast<std::uint64_t>(m - 1));
    const auto meas = testing::random_measure(m, r, static_cast<std::size_t>(2 * m * m), rng);
    const auto fp = fixed_point_solve(meas, std::nullopt, tight());
    const auto gd = riemannian_descent(meas, std::nullopt, tight());
    ASSERT_EQ(fp.status, SolverStatus::kConverged) << i;
    ASSERT_EQ(gd.status, SolverStatus::kConverged) << i;
    EXPECT_LE(distance(fp.estimate, gd.estimate), 1e-6) << i;
  }
}

TEST(Descent, LikelihoodIsMonotone) {
  for (std::uint64_t i = 0; i < 10; ++i) {
    Rng rng = make_stream(202, i);
    const auto meas = testing::random_measure(3, 1 + static_cast<Eigen::Index>(i % 2), 14, rng);
    const auto res = riemannian_descent(meas, random_scatter(3, rng, 1.5));
    ASSERT_GE(res.trace.size(), 2u);
    for (std::size_t k = 1; k < res.trace.size(); ++k) {
      const double prev = res.trace[k - 1].loglik;
      EXPECT_LE(res.trace[k].loglik, prev + 1e-13 * (1.0 + std::abs(prev))) << i << " step " << k;
    }
  }
}

TEST(Descent, GaussianMeasureRecoversSigma) {
  Rng rng = make_stream(9, 0);
  const auto star = random_scatter(2, rng, 0.5);
  const Measure meas = GaussianMeasure{star, 1};
  SolverOptions o;
  o.tol = 1e-16;
  Rng mc_rng = make_stream(9, 1);
  const auto res = riemannian_descent(meas, std::nullopt, o, MonteCarlo{20000, &mc_rng});
  EXPECT_EQ(res.status, SolverStatus::kConverged);
  EXPECT_LE(distance(res.estimate, star), 0.1);
}

TEST(Estimator, Equivariance) {
  for (std::uint64_t i = 0; i < 5; ++i) {
    Rng rng = make_stream(303, i);
    const auto meas = testing::random_measure(3, 2, 15, rng);
    const Matrix a = random_special_linear(3, rng);
    const auto start = random_scatter(3, rng, 0.5);
    const auto base = fixed_point_solve(meas, start, tight());
    const auto moved = fixed_point_solve(meas.transformed(a), congruence(a, start), tight());
    ASSERT_EQ(base.status, SolverStatus::kConverged);
    ASSERT_EQ(moved.status, SolverStatus::kConverged);
    EXPECT_LE(distance(moved.estimate, congruence(a, base.estimate)), 1e-8) << i;
  }
}

TEST(Estimator, RestartsReachTheSameEstimate) {
  Rng rng = make_stream(404, 0);
  const auto meas = testing::random_measure(4, 2, 20, rng);
  const auto ref = fixed_point_solve(meas, std::nullopt, tight());
  ASSERT_EQ(ref.status, SolverStatus::kConverged);
  for (int k = 0; k < 10; ++k) {
    const auto res = fixed_point_solve(meas, random_scatter(4, rng, 1.0), tight());
    ASSERT_EQ(res.status, SolverStatus::kConverged);
    EXPECT_LE(distance(res.estimate, ref.estimate), 1e-6) << k;
  }
}

TEST(Residual, EqualsFourTimesH) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(505, i);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(i % 4);
    const auto meas = testing::random_measure(m, 1 + static_cast<Eigen::Index>(i % static_cast<std::uint64_t>(m - 1)),
                                              7, rng);
    const auto sigma = random_scatter(m, rng);
    EXPECT_NEAR(residual(meas, sigma), 4.0 * h_value(meas, sigma), 1e-12) << i;
  }
}

TEST(Residual, SingleAtomAtIdentity) {
  for (Eigen::Index m = 2; m <= 5; ++m) {
    for (Eigen::Index r = 1; r < m; ++r) {
      const auto meas = EmpiricalMeasure::uniform({SubspacePoint::coordinate(m, 0, r)});
      const double rd = static_cast<double>(r);
      EXPECT_NEAR(residual(meas, ScatterMatrix::identity(m)), rd - rd * rd / static_cast<double>(m), 1e-12);
    }
  }
}

TEST(Residual, MonteCarloOverloadNeedsSamplesForGaussian) {
  const Measure meas = GaussianMeasure{ScatterMatrix::identity(3), 1};
  EXPECT_THROW(residual(meas, ScatterMatrix::identity(3)), UsageError);
  const Measure emp = testing::three_lines();
  EXPECT_NEAR(residual(emp, ScatterMatrix::identity(2)), 0.0, 1e-12);
}

}  // namespace
}  // namespace gscatter
