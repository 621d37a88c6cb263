#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "gscatter/diagnostics.hpp"
#include "gscatter/errors.hpp"
#include "gscatter/estimator.hpp"
#include "gscatter/linalg.hpp"
#include "gscatter/mfunc.hpp"
#include "test_support.hpp"

namespace gscatter {
namespace {

using testing::matrix_near;

// Independent I_P(V): intersections from the rank of the stacked bases via a
// full-pivot LU, not through SubspacePoint's orthonormal bases.
double i_value_oracle(const EmpiricalMeasure& meas, const Matrix& v) {
  const double m = static_cast<double>(meas.ambient());
  const double r = static_cast<double>(meas.dim());
  double acc = 0.0;
  for (std::size_t j = 0; j < meas.size(); ++j) {
    const Matrix& x = meas.points()[j].basis();
    Matrix stacked(v.rows(), v.cols() + x.cols());
    stacked << v, x;
    Eigen::FullPivLU<Matrix> lu(stacked);
    lu.setThreshold(1e-9);
    acc += meas.weights()[j] * static_cast<double>(v.cols() + x.cols() - lu.rank());
  }
  return r / m * static_cast<double>(v.cols()) - acc;
}

// w = g S g⁻¹ with S symmetric trace-zero is self-Σ-adjoint for Σ = g².
Matrix random_velocity(const ScatterMatrix& sigma, Rng& rng) {
  const auto root = sym_sqrt(sigma);
  Matrix s = testing::gaussian_matrix(sigma.dim(), sigma.dim(), rng);
  s = linalg::symmetrize(s);
  s -= (s.trace() / static_cast<double>(sigma.dim())) * Matrix::Identity(sigma.dim(), sigma.dim());
  return root.root * s * root.inverse;
}

// Random nested flag with α_k ∈ [0.5, 1.5] and strictly increasing dimensions.
VelocityFlag random_flag(Eigen::Index m, Rng& rng) {
  std::uniform_real_distribution<double> alpha(0.5, 1.5);
  std::bernoulli_distribution keep(0.5);
  const Matrix basis = testing::gaussian_matrix(m, m, rng);
  std::vector<Eigen::Index> dims;
  for (Eigen::Index d = 1; d < m; ++d) {
    if (keep(rng)) dims.push_back(d);
  }
  if (dims.empty()) dims.push_back(1 + static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m - 1)));
  VelocityFlag flag;
  for (auto d : dims) flag.steps.push_back(FlagStep{alpha(rng), SubspacePoint::from_basis(basis.leftCols(d))});
  return flag;
}

TEST(IValue, HandCountedExamples) {
  const auto meas = testing::orthogonal_lines();
  EXPECT_NEAR(i_value(meas, SubspacePoint::coordinate(2, 0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(i_value(meas, testing::line2(0.4)), 0.5, 1e-15);
  const auto planar = testing::planar_lines();
  EXPECT_LT(i_value(planar, SubspacePoint::coordinate(3, 0, 2)), 0.0);
  EXPECT_NEAR(i_value(planar, SubspacePoint::coordinate(3, 0, 2)), -1.0 / 3.0, 1e-15);
}

TEST(IValue, StaysInItsRange) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng = make_stream(11, i);
    const Eigen::Index m = 3 + static_cast<Eigen::Index>(i % 3);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(i % static_cast<std::uint64_t>(m - 1));
    auto meas = testing::random_measure(m, r, 6, rng);
    const auto cands = candidate_subspaces(meas);
    for (const auto& c : cands.items) {
      const double d = static_cast<double>(c.subspace.dim());
      const double val = i_value(meas, c.subspace);
      const double rm = static_cast<double>(r) / static_cast<double>(m);
      EXPECT_LE(val, rm * d + 1e-12);
      EXPECT_GE(val, rm * d - std::min(static_cast<double>(r), d) - 1e-12);
    }
  }
}

TEST(IValue, DependsOnlyOnSpans) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(12, i);
    const auto meas = testing::random_measure(4, 2, 5, rng);
    const auto cands = candidate_subspaces(meas);
    std::vector<SubspacePoint> rebased;
    for (const auto& p : meas.points()) {
      rebased.push_back(SubspacePoint::from_basis(p.basis() * testing::gaussian_matrix(2, 2, rng)));
    }
    const auto meas2 = EmpiricalMeasure::uniform(rebased);
    for (const auto& c : cands.items) {
      const Eigen::Index d = c.subspace.dim();
      const auto v2 = SubspacePoint::from_basis(c.subspace.basis() * testing::gaussian_matrix(d, d, rng));
      EXPECT_EQ(i_value(meas, c.subspace), i_value(meas2, v2));
    }
  }
}

TEST(Candidates, ThreeLinesInThePlane) {
  const auto cands = candidate_subspaces(testing::three_lines());
  EXPECT_EQ(cands.items.size(), 3u);
  EXPECT_FALSE(cands.truncated);
}

TEST(Candidates, SharedLineOfTwoPlanes) {
  Matrix a(3, 2), b(3, 2);
  a << 1, 0, 0, 1, 0, 0;
  b << 1, 0, 0, 0, 0, 1;
  const auto meas = EmpiricalMeasure::uniform({SubspacePoint::from_basis(a), SubspacePoint::from_basis(b)});
  const auto cands = candidate_subspaces(meas);
  const auto shared = SubspacePoint::coordinate(3, 0, 1);
  const bool found = std::any_of(cands.items.begin(), cands.items.end(), [&](const SubspaceCandidate& c) {
    return c.subspace.dim() == 1 && same_span(c.subspace, shared);
  });
  EXPECT_TRUE(found);
  EXPECT_TRUE(std::all_of(cands.items.begin(), cands.items.end(), [](const SubspaceCandidate& c) {
    return c.subspace.dim() > 0 && c.subspace.dim() < 3;
  }));
}

TEST(Candidates, GenericPlanesHaveNoNegativeValue) {
  Rng rng = make_stream(23, 0);
  const auto meas = testing::random_measure(4, 2, 5, rng);
  CandidateOptions o;
  o.max_subset = 2;
  const auto cands = candidate_subspaces(meas, o);
  ASSERT_FALSE(cands.items.empty());
  for (const auto& c : cands.items) {
    EXPECT_GE(i_value_oracle(meas, c.subspace.basis()), 0.0);
    EXPECT_NEAR(i_value(meas, c.subspace), i_value_oracle(meas, c.subspace.basis()), 1e-15);
  }
}

TEST(Candidates, AtomsAlwaysIncludedAndDeduplicated) {
  const auto line = SubspacePoint::coordinate(3, 0, 1);
  Matrix x(3, 1);
  x << 2.0, 0.0, 0.0;
  const auto meas = EmpiricalMeasure::uniform({line, SubspacePoint::from_basis(x), SubspacePoint::coordinate(3, 1, 1)});
  const auto cands = candidate_subspaces(meas);
  int copies = 0;
  for (const auto& c : cands.items) {
    if (c.subspace.dim() == 1 && same_span(c.subspace, line)) ++copies;
  }
  EXPECT_EQ(copies, 1);
}

TEST(Candidates, CapIsReported) {
  // 12 generic lines in ℝ⁴ give 66 pairwise planes.
  Rng rng = make_stream(24, 0);
  const auto meas = testing::random_measure(4, 1, 12, rng);
  CandidateOptions o;
  o.max_candidates = 20;
  const auto cands = candidate_subspaces(meas, o);
  EXPECT_TRUE(cands.truncated);
  EXPECT_LE(cands.items.size(), 20u);
}

TEST(Classify, GaussianSampleIsUnique) {
  Rng rng = make_stream(31, 0);
  const auto meas = sample_empirical(ScatterMatrix::identity(3), 2, 60, rng);
  const auto rep = classify_existence(meas);
  EXPECT_EQ(rep.verdict, Verdict::kUnique);
  EXPECT_GT(rep.min_i, 1e-9);
}

TEST(Classify, OrthogonalLinesAreALimit) {
  const auto rep = classify_existence(testing::orthogonal_lines());
  ASSERT_EQ(rep.verdict, Verdict::kLimit);
  EXPECT_TRUE(rep.complement_ok);
  ASSERT_EQ(rep.zeros.size(), 2u);
  const auto e1 = SubspacePoint::coordinate(2, 0, 1);
  const auto e2 = SubspacePoint::coordinate(2, 1, 1);
  const bool a = same_span(rep.zeros[0].subspace, e1) && same_span(rep.zeros[1].subspace, e2);
  const bool b = same_span(rep.zeros[0].subspace, e2) && same_span(rep.zeros[1].subspace, e1);
  EXPECT_TRUE(a || b);
}

TEST(Classify, PlanarLinesHaveNoEstimate) {
  const auto rep = classify_existence(testing::planar_lines());
  ASSERT_EQ(rep.verdict, Verdict::kNoEstimate);
  ASSERT_TRUE(rep.witness.has_value());
  EXPECT_TRUE(same_span(rep.witness->subspace, SubspacePoint::coordinate(3, 0, 2)));
  EXPECT_LT(rep.witness_value, -1e-9);
  EXPECT_NEAR(rep.witness_value, i_value_oracle(testing::planar_lines(), rep.witness->subspace.basis()), 1e-15);
}

TEST(Classify, ZeroWithoutComplementIsInconclusive) {
  // I(span e₁) = 1/3 − 1/3 = 0, but no scanned complement splits every atom.
  Matrix x(3, 1), y(3, 1);
  x << 0.0, 1.0, 1.0;
  y << 0.0, 1.0, -2.0;
  const auto meas = EmpiricalMeasure::uniform(
      {SubspacePoint::coordinate(3, 0, 1), SubspacePoint::from_basis(x), SubspacePoint::from_basis(y)});
  const auto rep = classify_existence(meas);
  EXPECT_TRUE(rep.verdict == Verdict::kLimit || rep.verdict == Verdict::kInconclusive);
  EXPECT_FALSE(rep.zeros.empty());
  EXPECT_NEAR(rep.min_i, 0.0, 1e-9);
}

TEST(Classify, UserSuppliedWitnessIsUsed) {
  // With the generated lattice capped at one candidate, the supplied plane is
  // what exposes the violation.
  const auto meas = testing::planar_lines();
  ExistenceOptions o;
  o.candidates.max_candidates = 1;
  o.extra.push_back(SubspaceCandidate{SubspacePoint::coordinate(3, 0, 2), Provenance::kUserSupplied});
  const auto rep = classify_existence(meas, o);
  EXPECT_EQ(rep.verdict, Verdict::kNoEstimate);
}

TEST(Classify, UniqueWithFrequencyOneAboveThreshold) {
  // m = 3, r = 2: n > m²/(r(m−r)) = 4.5.
  int unique = 0;
  for (std::uint64_t t = 0; t < 200; ++t) {
    Rng rng = make_stream(41, t);
    const auto star = random_scatter(3, rng);
    const auto meas = sample_empirical(star, 2, 6, rng);
    if (classify_existence(meas).verdict == Verdict::kUnique) ++unique;
  }
  EXPECT_EQ(unique, 200);
}

TEST(Decompose, BusemannRayDirection) {
  for (Eigen::Index m = 2; m <= 5; ++m) {
    for (Eigen::Index r = 1; r < m; ++r) {
      const Matrix a = busemann_ray_direction(m, r);
      const auto flag = decompose_velocity(ScatterMatrix::identity(m), a);
      ASSERT_EQ(flag.steps.size(), 1u);
      EXPECT_NEAR(flag.steps[0].alpha, a(0, 0) - a(m - 1, m - 1), 1e-12);
      EXPECT_TRUE(same_span(flag.steps[0].subspace, SubspacePoint::coordinate(m, 0, r)));
    }
  }
}

TEST(Decompose, ThreeEigenvaluesGiveNestedPairs) {
  Matrix w = Matrix::Zero(4, 4);
  w.diagonal() << 2.0, 0.5, 0.5, -3.0;
  const auto sigma = ScatterMatrix::identity(4);
  const auto flag = decompose_velocity(sigma, w);
  ASSERT_EQ(flag.steps.size(), 2u);
  EXPECT_EQ(flag.steps[0].subspace.dim(), 1);
  EXPECT_EQ(flag.steps[1].subspace.dim(), 3);
  EXPECT_NEAR(flag.steps[0].alpha, 1.5, 1e-12);
  EXPECT_NEAR(flag.steps[1].alpha, 3.5, 1e-12);
  EXPECT_EQ(dim_intersection(flag.steps[0].subspace, flag.steps[1].subspace), 1);
  EXPECT_TRUE(matrix_near(reconstruct_velocity(flag, sigma), w, 1e-12));
}

TEST(Decompose, ZeroVelocityGivesEmptyFlag) {
  Rng rng = make_stream(51, 0);
  EXPECT_TRUE(decompose_velocity(random_scatter(3, rng), Matrix::Zero(3, 3)).empty());
}

TEST(Decompose, RejectsInvalidVelocity) {
  const auto sigma = ScatterMatrix::identity(3);
  Matrix w = Matrix::Identity(3, 3);
  EXPECT_THROW(decompose_velocity(sigma, w), DomainError);
  Matrix n = Matrix::Zero(3, 3);
  n(0, 1) = 1.0;
  EXPECT_THROW(decompose_velocity(sigma, n), DomainError);
}

TEST(Decompose, ReconstructionOnRandomInputs) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng = make_stream(52, i);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(i % 5);
    const auto sigma = random_scatter(m, rng);
    const Matrix w = random_velocity(sigma, rng);
    const auto flag = decompose_velocity(sigma, w);
    EXPECT_TRUE(matrix_near(reconstruct_velocity(flag, sigma), w, 1e-8)) << i;
    for (std::size_t k = 0; k < flag.steps.size(); ++k) {
      EXPECT_GT(flag.steps[k].alpha, 0.0);
      if (k > 0) {
        EXPECT_GT(flag.steps[k].subspace.dim(), flag.steps[k - 1].subspace.dim());
        EXPECT_EQ(dim_intersection(flag.steps[k - 1].subspace, flag.steps[k].subspace, 1e-8),
                  flag.steps[k - 1].subspace.dim());
      }
    }
  }
}

TEST(Decompose, RecoversAConstructedFlag) {
  for (std::uint64_t i = 0; i < 30; ++i) {
    Rng rng = make_stream(53, i);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(i % 4);
    const auto sigma = random_scatter(m, rng);
    const auto flag = random_flag(m, rng);
    const auto back = decompose_velocity(sigma, reconstruct_velocity(flag, sigma));
    ASSERT_EQ(back.steps.size(), flag.steps.size()) << i;
    for (std::size_t k = 0; k < flag.steps.size(); ++k) {
      EXPECT_NEAR(back.steps[k].alpha, flag.steps[k].alpha, 1e-9);
      EXPECT_TRUE(same_span(back.steps[k].subspace, flag.steps[k].subspace, 1e-7));
    }
  }
}

TEST(Slope, CaseOneMeasureIsPositive) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(61, i);
    const auto meas = testing::random_measure(3, 2, 10, rng);
    const auto sigma = random_scatter(3, rng);
    EXPECT_GT(asymptotic_slope(meas, sigma, random_velocity(sigma, rng)), 0.0) << i;
  }
}

TEST(Slope, LimitDirectionIsFlat) {
  Matrix w = Matrix::Zero(2, 2);
  w.diagonal() << 0.5, -0.5;
  EXPECT_NEAR(asymptotic_slope(testing::orthogonal_lines(), ScatterMatrix::identity(2), w), 0.0, 1e-15);
}

TEST(Slope, MatchesLargeTimeFiniteDifference) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    Rng rng = make_stream(62, i);
    const Eigen::Index m = 2 + static_cast<Eigen::Index>(i % 3);
    const Eigen::Index r = 1 + static_cast<Eigen::Index>(i % static_cast<std::uint64_t>(m - 1));
    const auto meas = testing::random_measure(m, r, static_cast<std::size_t>(2 * m * m), rng);
    const auto sigma = random_scatter(m, rng, 0.5);
    const auto flag = random_flag(m, rng);
    const Matrix w = reconstruct_velocity(flag, sigma);
    // exp(tw)Σ is the geodesic with velocity wΣ.
    const auto tangent = tangent_project(sigma, linalg::symmetrize(w * sigma.matrix()));
    const double h = 1e-3;
    const double fd =
        (loglik_on_geodesic(meas, tangent, 30.0 + h) - loglik_on_geodesic(meas, tangent, 30.0 - h)) / (2.0 * h);
    EXPECT_NEAR(fd, asymptotic_slope(meas, sigma, w), 1e-4) << i;
    EXPECT_NEAR(asymptotic_slope(meas, sigma, w), 0.5 * flag_functional(meas, flag), 1e-12);
  }
}

TEST(BoundaryFlag, NoEstimateRunExposesThePlane) {
  std::vector<SubspacePoint> pts;
  for (double a : {0.0, 0.7, 1.9}) {
    Matrix x(3, 1);
    x << std::cos(a), std::sin(a), 0.0;
    pts.push_back(SubspacePoint::from_basis(x));
  }
  pts.push_back(SubspacePoint::coordinate(3, 2, 1));
  const auto meas = EmpiricalMeasure::uniform(pts);
  const auto res = fixed_point_solve(meas);
  ASSERT_EQ(res.status, SolverStatus::kDivergedToBoundary);
  bool negative = false;
  for (const auto& step : res.flag.steps) {
    if (i_value(meas, step.subspace, 1e-6) < 0.0) negative = true;
  }
  EXPECT_TRUE(negative);
  EXPECT_LE(flag_functional(meas, res.flag, 1e-6), 0.0);
}

TEST(BoundaryFlag, ConvergedRunHasNoFlag) {
  const auto res = fixed_point_solve(testing::three_lines(), ScatterMatrix::identity(2));
  const std::vector<ScatterMatrix> still{res.estimate, res.estimate, res.estimate};
  EXPECT_THROW(boundary_flag(still), EmptyFlagError);
  Rng rng = make_stream(71, 0);
  const auto start = random_scatter(2, rng);
  const std::vector<ScatterMatrix> settled{start, res.estimate, res.estimate, res.estimate};
  EXPECT_THROW(boundary_flag(settled), EmptyFlagError);
}

TEST(BoundaryFlag, SyntheticEscapeRecoversSubspace) {
  for (Eigen::Index m = 3; m <= 5; ++m) {
    for (Eigen::Index r = 1; r < m; ++r) {
      Rng rng = make_stream(72, static_cast<std::uint64_t>(10 * m + r));
      const Matrix a = busemann_ray_direction(m, r);
      std::vector<ScatterMatrix> iterates;
      for (int k = 0; k <= 20; ++k) {
        const Matrix noise = Matrix::Identity(m, m) + 1e-3 * testing::gaussian_matrix(m, m, rng);
        iterates.push_back(congruence(noise, ScatterMatrix::normalized(linalg::sym_exp(static_cast<double>(k) * a))));
      }
      const auto flag = boundary_flag(iterates, 0.05);
      ASSERT_EQ(flag.steps.size(), 1u);
      EXPECT_TRUE(same_span(flag.steps[0].subspace, SubspacePoint::coordinate(m, 0, r), 1e-2));
    }
  }
}

}  // namespace
}  // namespace gscatter
