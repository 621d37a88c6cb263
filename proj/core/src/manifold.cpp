#include "gscatter/manifold.hpp"

#include <cmath>
#include <sstream>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"

namespace gscatter {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> checked_eigen(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() < 2) {
    throw DomainError("scatter matrix must be square with dimension >= 2");
  }
  if (!m.allFinite()) throw DomainError("scatter matrix has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw DomainError("eigendecomposition failed");
  const Vector& ev = es.eigenvalues();
  if (!(ev(0) > 0.0)) {
    std::ostringstream os;
    os << "matrix is not positive definite (smallest eigenvalue " << ev(0) << ")";
    throw DomainError(os.str());
  }
  if (ev(ev.size() - 1) / ev(0) > tol::kMaxCondition) {
    std::ostringstream os;
    os << "condition number " << ev(ev.size() - 1) / ev(0) << " exceeds guard " << tol::kMaxCondition;
    throw DomainError(os.str());
  }
  return es;
}

void require_same_base(const ScatterMatrix& a, const ScatterMatrix& b) {
  if (a.dim() != b.dim() || !a.approx_equal(b, tol::kBaseMatch * std::max(1.0, a.matrix().cwiseAbs().maxCoeff()))) {
    throw UsageError("tangent vectors are attached to different base points");
  }
}

}  // namespace

ScatterMatrix::ScatterMatrix(Matrix value, Vector eigenvalues, Matrix eigenvectors)
    : value_(std::move(value)), eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)) {
  inverse_ = eigenvectors_ * eigenvalues_.cwiseInverse().asDiagonal() * eigenvectors_.transpose();
  inverse_ = linalg::symmetrize(inverse_);
}

ScatterMatrix ScatterMatrix::from_matrix(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("scatter matrix must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry * scale) {
    throw DomainError("scatter matrix is not symmetric");
  }
  Matrix sym = linalg::symmetrize(m);
  auto es = checked_eigen(sym);
  const double det = es.eigenvalues().prod();
  if (std::abs(det - 1.0) > tol::kUnimodular) {
    std::ostringstream os;
    os << "scatter matrix determinant " << det << " differs from 1";
    throw DomainError(os.str());
  }
  return ScatterMatrix(std::move(sym), es.eigenvalues(), es.eigenvectors());
}

ScatterMatrix ScatterMatrix::normalized(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("scatter matrix must be square");
  Matrix sym = linalg::symmetrize(m);
  auto es = checked_eigen(sym);
  const double log_det = es.eigenvalues().array().log().sum();
  const double scale = std::exp(-log_det / static_cast<double>(m.rows()));
  return ScatterMatrix(sym * scale, es.eigenvalues() * scale, es.eigenvectors());
}

ScatterMatrix ScatterMatrix::identity(Eigen::Index m) {
  if (m < 2) throw DomainError("dimension must be >= 2");
  return ScatterMatrix(Matrix::Identity(m, m), Vector::Ones(m), Matrix::Identity(m, m));
}

bool ScatterMatrix::approx_equal(const ScatterMatrix& other, double tolerance) const {
  return dim() == other.dim() && (value_ - other.value_).cwiseAbs().maxCoeff() <= tolerance;
}

TangentVector TangentVector::from_matrix(const ScatterMatrix& base, const Matrix& value) {
  if (value.rows() != base.dim() || value.cols() != base.dim()) {
    throw UsageError("tangent vector dimension does not match its base point");
  }
  const double scale = std::max(1.0, value.cwiseAbs().maxCoeff());
  if ((value - value.transpose()).cwiseAbs().maxCoeff() > tol::kSymmetry * scale) {
    throw DomainError("tangent vector is not symmetric");
  }
  const Matrix w = base.inverse() * value;
  if (std::abs(w.trace()) > tol::kTangentTrace * std::max(1.0, w.norm())) {
    throw DomainError("tangent vector violates the trace condition tr(Σ⁻¹V) = 0");
  }
  return TangentVector(base, linalg::symmetrize(value));
}

TangentVector TangentVector::zero(const ScatterMatrix& base) {
  return TangentVector(base, Matrix::Zero(base.dim(), base.dim()));
}

TangentVector TangentVector::operator*(double s) const { return TangentVector(base_, value_ * s); }

TangentVector TangentVector::operator+(const TangentVector& other) const {
  require_same_base(base_, other.base_);
  return TangentVector(base_, value_ + other.value_);
}

TangentVector TangentVector::operator-(const TangentVector& other) const {
  require_same_base(base_, other.base_);
  return TangentVector(base_, value_ - other.value_);
}

double TangentVector::norm() const { return std::sqrt(std::max(0.0, inner(*this, *this))); }

SquareRoot sym_sqrt(const ScatterMatrix& sigma) {
  const Matrix& q = sigma.eigenvectors();
  const Vector s = sigma.eigenvalues().cwiseSqrt();
  return SquareRoot{linalg::symmetrize(q * s.asDiagonal() * q.transpose()),
                    linalg::symmetrize(q * s.cwiseInverse().asDiagonal() * q.transpose())};
}

double inner(const TangentVector& a, const TangentVector& b) {
  require_same_base(a.base(), b.base());
  const Matrix& si = a.base().inverse();
  return (si * a.matrix()).cwiseProduct((si * b.matrix()).transpose()).sum();
}

ScatterMatrix geodesic(const ScatterMatrix& sigma, const TangentVector& w, double t) {
  require_same_base(sigma, w.base());
  const SquareRoot g = sym_sqrt(sigma);
  const Matrix v = g.inverse * w.matrix() * g.inverse;
  return ScatterMatrix::normalized(g.root * linalg::sym_exp(t * v) * g.root);
}

double distance(const ScatterMatrix& a, const ScatterMatrix& b) {
  const SquareRoot g = sym_sqrt(a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(g.inverse * b.matrix() * g.inverse),
                                           Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().array().log().square().sum());
}

TangentVector log_map(const ScatterMatrix& from, const ScatterMatrix& to) {
  const SquareRoot g = sym_sqrt(from);
  const Matrix v = linalg::sym_log(g.inverse * to.matrix() * g.inverse);
  return tangent_project(from, g.root * v * g.root);
}

TangentVector tangent_project(const ScatterMatrix& sigma, const Matrix& s) {
  if (s.rows() != sigma.dim() || s.cols() != sigma.dim()) {
    throw UsageError("tangent_project: dimension mismatch");
  }
  const Matrix sym = linalg::symmetrize(s);
  const double t = (sigma.inverse().cwiseProduct(sym)).sum() / static_cast<double>(sigma.dim());
  return TangentVector(sigma, sym - t * sigma.matrix());
}

TangentVector random_unit_tangent(const ScatterMatrix& sigma, Rng& rng) {
  std::normal_distribution<double> normal;
  const Eigen::Index m = sigma.dim();
  Matrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) s(i, j) = normal(rng);
  }
  s = linalg::symmetrize(s);
  s.diagonal().array() -= s.trace() / static_cast<double>(m);
  const double n = s.norm();
  if (n == 0.0) return random_unit_tangent(sigma, rng);
  const SquareRoot g = sym_sqrt(sigma);
  return tangent_project(sigma, g.root * (s / n) * g.root);
}

Matrix random_special_linear(Eigen::Index m, Rng& rng) {
  std::normal_distribution<double> normal;
  for (;;) {
    Matrix a(m, m);
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = 0; i < m; ++i) a(i, j) = normal(rng);
    }
    double det = a.determinant();
    if (std::abs(det) < 1e-3) continue;
    if (det < 0) {
      a.col(0) *= -1.0;
      det = -det;
    }
    return a / std::pow(det, 1.0 / static_cast<double>(m));
  }
}

ScatterMatrix random_scatter(Eigen::Index m, Rng& rng, double spread) {
  std::normal_distribution<double> normal;
  Matrix s(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) s(i, j) = normal(rng);
  }
  s = linalg::symmetrize(s) * (spread / std::sqrt(static_cast<double>(m)));
  s.diagonal().array() -= s.trace() / static_cast<double>(m);
  return ScatterMatrix::normalized(linalg::sym_exp(s));
}

ScatterMatrix congruence(const Matrix& a, const ScatterMatrix& sigma) {
  if (a.rows() != sigma.dim() || a.cols() != sigma.dim()) throw UsageError("congruence: dimension mismatch");
  return ScatterMatrix::normalized(a * sigma.matrix() * a.transpose());
}

}  // namespace gscatter
