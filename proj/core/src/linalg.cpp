#include "gscatter/linalg.hpp"

#include <cmath>
#include <string>

#include "gscatter/errors.hpp"

namespace gscatter {

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

namespace linalg {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix spectral_apply(const Matrix& s, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(s));
  if (es.info() != Eigen::Success) {
    throw DomainError("symmetric eigendecomposition failed");
  }
  Vector d = es.eigenvalues().unaryExpr(f);
  const Matrix& q = es.eigenvectors();
  return q * d.asDiagonal() * q.transpose();
}

Matrix sym_exp(const Matrix& s) {
  return spectral_apply(s, [](double x) { return std::exp(x); });
}

Matrix sym_log(const Matrix& s) {
  return spectral_apply(s, [](double x) {
    if (!(x > 0.0)) throw DomainError("matrix logarithm of a non positive-definite matrix");
    return std::log(x);
  });
}

Matrix sym_sqrt(const Matrix& s) { return sym_pow(s, 0.5); }

Matrix sym_pow(const Matrix& s, double p) {
  return spectral_apply(s, [p](double x) {
    if (!(x > 0.0)) throw DomainError("matrix power of a non positive-definite matrix");
    return std::pow(x, p);
  });
}

Matrix spd_inverse(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  return llt.solve(Matrix::Identity(s.rows(), s.cols()));
}

int numerical_rank(const Matrix& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rel_tol * sv(0)) ++rank;
  }
  return rank;
}

Matrix orthonormal_basis(const Matrix& a, double rel_tol) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(0) > 0.0 && sv(i) > rel_tol * sv(0)) ++rank;
  }
  return svd.matrixU().leftCols(rank);
}

Matrix orthogonal_complement(const Matrix& a, double rel_tol) {
  const Eigen::Index m = a.rows();
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(0) > 0.0 && sv(i) > rel_tol * sv(0)) ++rank;
  }
  return svd.matrixU().rightCols(m - rank);
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0) {
    throw UsageError("unvec: length " + std::to_string(v.size()) + " is not a multiple of " +
                     std::to_string(rows));
  }
  return Eigen::Map<const Matrix>(v.data(), rows, v.size() / rows);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix pinv(const Matrix& a, double rel_cutoff) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  Vector inv = Vector::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(0) > 0.0 && sv(i) > rel_cutoff * sv(0)) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace linalg
}  // namespace gscatter
