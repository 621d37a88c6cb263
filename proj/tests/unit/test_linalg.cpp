#include <cmath>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"
#include "test_support.hpp"

namespace gscatter {
namespace {

using testing::gaussian_matrix;
using testing::matrix_near;

Matrix random_spd(Eigen::Index m, Rng& rng) {
  const Matrix a = gaussian_matrix(m, m, rng);
  return a * a.transpose() + 0.5 * Matrix::Identity(m, m);
}

TEST(Linalg, ExpLogRoundTrip) {
  Rng rng = make_stream(1, 0);
  const Matrix s = linalg::symmetrize(gaussian_matrix(4, 4, rng));
  EXPECT_TRUE(matrix_near(linalg::sym_log(linalg::sym_exp(s)), s, 1e-12));
  const Matrix p = random_spd(4, rng);
  EXPECT_TRUE(matrix_near(linalg::sym_exp(linalg::sym_log(p)), p, 1e-10));
}

TEST(Linalg, SqrtAndPower) {
  Rng rng = make_stream(1, 1);
  const Matrix p = random_spd(3, rng);
  const Matrix g = linalg::sym_sqrt(p);
  EXPECT_TRUE(matrix_near(g * g, p, 1e-10));
  EXPECT_TRUE(matrix_near(linalg::sym_pow(p, 0.5), g, 1e-12));
  EXPECT_TRUE(matrix_near(linalg::sym_pow(p, -1.0) * p, Matrix::Identity(3, 3), 1e-10));
}

TEST(Linalg, LogRejectsIndefinite) {
  Matrix s(2, 2);
  s << 1.0, 0.0, 0.0, -1.0;
  EXPECT_THROW(linalg::sym_log(s), DomainError);
}

TEST(Linalg, VecKronIdentity) {
  Rng rng = make_stream(1, 2);
  const Matrix a = gaussian_matrix(3, 3, rng);
  const Matrix x = gaussian_matrix(3, 3, rng);
  const Matrix b = gaussian_matrix(3, 3, rng);
  const Vector lhs = linalg::vec(a * x * b);
  const Vector rhs = linalg::kron(b.transpose(), a) * linalg::vec(x);
  EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Linalg, VecKronIdentityTriple) {
  const Matrix id = Matrix::Identity(3, 3);
  EXPECT_TRUE(matrix_near(linalg::kron(id, id), Matrix::Identity(9, 9), 0.0));
  EXPECT_TRUE(matrix_near(linalg::unvec(linalg::vec(id), 3), id, 0.0));
}

TEST(Linalg, VecIsColumnMajor) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  Vector expected(4);
  expected << 1, 3, 2, 4;
  EXPECT_TRUE(matrix_near(linalg::vec(a), expected, 0.0));
}

TEST(Linalg, TracePairing) {
  Rng rng = make_stream(1, 3);
  for (int k = 0; k < 10; ++k) {
    const Matrix a = linalg::symmetrize(gaussian_matrix(4, 4, rng));
    const Matrix b = linalg::symmetrize(gaussian_matrix(4, 4, rng));
    EXPECT_NEAR(linalg::vec(a).dot(linalg::vec(b)), (a * b).trace(), 1e-12);
  }
}

TEST(Linalg, UnvecRejectsBadLength) { EXPECT_THROW(linalg::unvec(Vector::Zero(5), 2), UsageError); }

TEST(Linalg, PinvContract) {
  Rng rng = make_stream(1, 4);
  const Matrix u = gaussian_matrix(5, 3, rng);
  const Matrix a = u * u.transpose();  // rank 3
  const Matrix p = linalg::pinv(a, 1e-10);
  EXPECT_TRUE(matrix_near(a * p * a, a, 1e-9));
  EXPECT_TRUE(matrix_near(p * a * p, p, 1e-9));
  EXPECT_TRUE(matrix_near(a * p, (a * p).transpose(), 1e-9));
}

TEST(Linalg, RankAndBases) {
  Matrix a(3, 2);
  a << 1, 2, 2, 4, 0, 0;
  EXPECT_EQ(linalg::numerical_rank(a, 1e-10), 1);
  const Matrix q = linalg::orthonormal_basis(a, 1e-10);
  ASSERT_EQ(q.cols(), 1);
  const Matrix c = linalg::orthogonal_complement(q, 1e-10);
  ASSERT_EQ(c.cols(), 2);
  EXPECT_LE((q.transpose() * c).norm(), 1e-12);
}

TEST(Streams, DeterministicAndDistinct) {
  Rng a = make_stream(42, 7);
  Rng b = make_stream(42, 7);
  Rng c = make_stream(42, 8);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
}

}  // namespace
}  // namespace gscatter
