#include "gscatter/grassmann.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"

namespace gscatter {

namespace {

// log det of an SPD r×r matrix; DomainError when Cholesky fails.
double spd_log_det(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw DomainError("Gram matrix XᵀΣ⁻¹X is not positive definite");
  const Matrix& l = llt.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

void check_dims(const SubspacePoint& u, const ScatterMatrix& sigma) {
  if (u.ambient() != sigma.dim()) {
    std::ostringstream os;
    os << "subspace lives in R^" << u.ambient() << " but scatter matrix is " << sigma.dim() << "x" << sigma.dim();
    throw UsageError(os.str());
  }
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) z(i, j) = normal(rng);
  }
  return z;
}

}  // namespace

SubspacePoint SubspacePoint::from_basis(const Matrix& x, double rank_tol) {
  const Eigen::Index m = x.rows();
  const Eigen::Index r = x.cols();
  if (r <= 0 || r >= m) {
    std::ostringstream os;
    os << "subspace dimension must satisfy 0 < r < m, got m=" << m << ", r=" << r;
    throw DomainError(os.str());
  }
  if (!x.allFinite()) throw DomainError("subspace basis has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  if (!(sv(0) > 0.0) || !(sv(r - 1) > rank_tol * sv(0))) {
    throw DomainError("subspace basis is rank deficient");
  }
  return SubspacePoint(x, svd.matrixU());
}

SubspacePoint SubspacePoint::coordinate(Eigen::Index m, Eigen::Index first, Eigen::Index count) {
  if (first < 0 || count <= 0 || first + count > m) throw UsageError("coordinate subspace out of range");
  Matrix x = Matrix::Zero(m, count);
  for (Eigen::Index i = 0; i < count; ++i) x(first + i, i) = 1.0;
  return from_basis(x);
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<SubspacePoint> points, std::vector<double> weights, bool uniform)
    : points_(std::move(points)), weights_(std::move(weights)), uniform_(uniform) {
  if (points_.empty()) throw UsageError("empirical measure needs at least one atom");
  m_ = points_.front().ambient();
  r_ = points_.front().dim();
  for (const auto& p : points_) {
    if (p.ambient() != m_ || p.dim() != r_) {
      throw UsageError("all atoms of an empirical measure must share (m, r)");
    }
  }
}

EmpiricalMeasure EmpiricalMeasure::uniform(std::vector<SubspacePoint> points) {
  const std::size_t n = points.size();
  std::vector<double> w(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n));
  return EmpiricalMeasure(std::move(points), std::move(w), true);
}

EmpiricalMeasure EmpiricalMeasure::weighted(std::vector<SubspacePoint> points, std::vector<double> weights) {
  if (points.size() != weights.size()) throw UsageError("weights and atoms differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw UsageError("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "weights sum to " << total << ", expected 1";
    throw UsageError(os.str());
  }
  bool uniform = true;
  for (double w : weights) uniform = uniform && std::abs(w - weights.front()) <= 1e-15;
  return EmpiricalMeasure(std::move(points), std::move(weights), uniform);
}

EmpiricalMeasure EmpiricalMeasure::transformed(const Matrix& a) const {
  std::vector<SubspacePoint> pts;
  pts.reserve(points_.size());
  for (const auto& p : points_) pts.push_back(act(a, p));
  return EmpiricalMeasure(std::move(pts), weights_, uniform_);
}

Eigen::Index measure_ambient(const Measure& meas) {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EmpiricalMeasure>) {
          return m.ambient();
        } else {
          return m.sigma.dim();
        }
      },
      meas);
}

Eigen::Index measure_dim(const Measure& meas) {
  return std::visit(
      [](const auto& m) -> Eigen::Index {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EmpiricalMeasure>) {
          return m.dim();
        } else {
          return m.r;
        }
      },
      meas);
}

SubspacePoint sample_gaussian(const ScatterMatrix& sigma, Eigen::Index r, Rng& rng) {
  if (r <= 0 || r >= sigma.dim()) throw UsageError("Grassmannian distribution needs 0 < r < m");
  const Matrix g = sym_sqrt(sigma).root;
  for (;;) {
    Matrix x = g * gaussian_matrix(sigma.dim(), r, rng);
    try {
      return SubspacePoint::from_basis(x);
    } catch (const DomainError&) {
      // rank-deficient draw: probability zero, draw again
    }
  }
}

SubspacePoint sample(const Measure& meas, Rng& rng) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) {
    std::discrete_distribution<std::size_t> pick(e->weights().begin(), e->weights().end());
    return e->points()[pick(rng)];
  }
  const auto& gm = std::get<GaussianMeasure>(meas);
  return sample_gaussian(gm.sigma, gm.r, rng);
}

EmpiricalMeasure sample_empirical(const ScatterMatrix& sigma, Eigen::Index r, std::size_t n, Rng& rng) {
  std::vector<SubspacePoint> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(sample_gaussian(sigma, r, rng));
  return EmpiricalMeasure::uniform(std::move(pts));
}

SubspacePoint act(const Matrix& a, const SubspacePoint& u) {
  if (a.rows() != u.ambient() || a.cols() != u.ambient()) throw UsageError("act: dimension mismatch");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw DomainError("act: matrix is singular");
  return SubspacePoint::from_basis(a * u.basis());
}

Matrix weighted_span(const SubspacePoint& u, const Matrix& sigma_inverse) {
  const Matrix& q = u.orthonormal();
  if (q.cols() == 1) {
    const double s = q.col(0).dot(sigma_inverse * q.col(0));
    if (!(s > 0.0)) throw DomainError("Gram matrix XᵀΣ⁻¹X is not positive definite");
    return (q * q.transpose()) / s;
  }
  const Matrix gram = q.transpose() * sigma_inverse * q;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw DomainError("Gram matrix XᵀΣ⁻¹X is not positive definite");
  return q * llt.solve(q.transpose());
}

Matrix projector(const SubspacePoint& u, const ScatterMatrix& sigma) {
  check_dims(u, sigma);
  return weighted_span(u, sigma.inverse()) * sigma.inverse();
}

Matrix pi_matrix(const SubspacePoint& u, const ScatterMatrix& sigma) {
  check_dims(u, sigma);
  const Matrix& si = sigma.inverse();
  return linalg::symmetrize(si * weighted_span(u, si) * si);
}

double density_ratio(const SubspacePoint& u, const ScatterMatrix& sigma) {
  check_dims(u, sigma);
  const Matrix& x = u.basis();
  const double log_ratio = spd_log_det(x.transpose() * x) - spd_log_det(x.transpose() * sigma.inverse() * x);
  return std::exp(0.5 * static_cast<double>(u.ambient()) * log_ratio);
}

int dim_intersection(const SubspacePoint& u, const SubspacePoint& v, double rank_tol) {
  if (u.ambient() != v.ambient()) throw UsageError("dim_intersection: different ambient dimensions");
  Matrix joined(u.ambient(), u.dim() + v.dim());
  joined << u.orthonormal(), v.orthonormal();
  return static_cast<int>(u.dim() + v.dim()) - linalg::numerical_rank(joined, rank_tol);
}

Matrix subspace_sum_basis(const Matrix& a, const Matrix& b, double rank_tol) {
  Matrix joined(a.rows(), a.cols() + b.cols());
  joined << a, b;
  if (joined.cols() == 0) return Matrix(a.rows(), 0);
  return linalg::orthonormal_basis(joined, rank_tol);
}

Matrix subspace_intersection_basis(const Matrix& a, const Matrix& b, double rank_tol) {
  const Eigen::Index m = a.rows();
  if (a.cols() == 0 || b.cols() == 0) return Matrix(m, 0);
  const Matrix qa = linalg::orthonormal_basis(a, rank_tol);
  const Matrix qb = linalg::orthonormal_basis(b, rank_tol);
  Matrix joined(m, qa.cols() + qb.cols());
  joined << qa, -qb;
  const int rank = linalg::numerical_rank(joined, rank_tol);
  const Eigen::Index k = joined.cols() - rank;
  if (k <= 0) return Matrix(m, 0);
  Eigen::JacobiSVD<Matrix> svd(joined, Eigen::ComputeFullV);
  const Matrix null = svd.matrixV().rightCols(k);
  return linalg::orthonormal_basis(qa * null.topRows(qa.cols()), rank_tol);
}

bool same_span(const SubspacePoint& u, const SubspacePoint& v, double tolerance) {
  return u.ambient() == v.ambient() && u.dim() == v.dim() &&
         (u.euclidean_projector() - v.euclidean_projector()).norm() <= tolerance;
}

double busemann(const SubspacePoint& u, const ScatterMatrix& sigma) {
  check_dims(u, sigma);
  const double m = static_cast<double>(u.ambient());
  const double r = static_cast<double>(u.dim());
  const Matrix& x = u.basis();
  const double log_ratio = spd_log_det(x.transpose() * sigma.inverse() * x) - spd_log_det(x.transpose() * x);
  return std::sqrt(m / ((m - r) * r)) * log_ratio;
}

Matrix busemann_ray_direction(Eigen::Index m, Eigen::Index r) {
  if (r <= 0 || r >= m) throw UsageError("ray direction needs 0 < r < m");
  const double md = static_cast<double>(m);
  const double rd = static_cast<double>(r);
  const double lambda = std::sqrt((md - rd) / (md * rd));
  const double beta = std::sqrt(rd / (md * (md - rd)));
  Vector d(m);
  d.head(r).setConstant(lambda);
  d.tail(m - r).setConstant(-beta);
  return d.asDiagonal();
}

double rho(const Matrix& h, Eigen::Index r) {
  const Eigen::Index m = h.rows();
  if (h.cols() != m || r <= 0 || r >= m) throw UsageError("rho: need square h and 0 < r < m");
  const double det = h.determinant();
  if (std::abs(det - 1.0) > 1e-8) throw DomainError("rho: h must have determinant 1");
  const Matrix y = h.inverse().leftCols(r);
  return std::exp(-0.5 * static_cast<double>(m) * spd_log_det(y.transpose() * y));
}

double modular_parabolic(double lambda1, Eigen::Index m, Eigen::Index r) {
  if (lambda1 == 0.0) throw DomainError("modular_parabolic: lambda1 must be nonzero");
  return std::pow(std::abs(lambda1), static_cast<double>(m * r));
}

}  // namespace gscatter
