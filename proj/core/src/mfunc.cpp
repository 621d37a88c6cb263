#include "gscatter/mfunc.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"

namespace gscatter {

namespace {

double spd_log_det(const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw DomainError("Gram matrix is not positive definite");
  const Matrix& l = llt.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

const GaussianMeasure& require_mc(const Measure& meas, const std::optional<MonteCarlo>& mc) {
  const auto& gm = std::get<GaussianMeasure>(meas);
  if (!mc || mc->samples < 2 || mc->rng == nullptr) {
    throw UsageError("Grassmannian distributions need a Monte Carlo size (>= 2) and an engine");
  }
  return gm;
}

// Running mean and variance (Welford) of matrix-valued samples.
class MatrixMoments {
 public:
  explicit MatrixMoments(Eigen::Index m) : mean_(Matrix::Zero(m, m)), m2_(Matrix::Zero(m, m)) {}

  void add(const Matrix& x) {
    ++count_;
    const Matrix delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta.cwiseProduct(x - mean_);
  }

  const Matrix& mean() const { return mean_; }
  Matrix std_error() const {
    return (m2_ / static_cast<double>(count_ - 1) / static_cast<double>(count_)).cwiseSqrt();
  }

 private:
  std::size_t count_ = 0;
  Matrix mean_;
  Matrix m2_;
};

McEstimate scalar_moments(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double n = static_cast<double>(xs.size());
  return McEstimate{mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

double loglik_point(const SubspacePoint& u, const ScatterMatrix& sigma) {
  if (u.ambient() != sigma.dim()) throw UsageError("loglik_point: dimension mismatch");
  const Matrix& x = u.basis();
  return 0.5 * (spd_log_det(x.transpose() * sigma.inverse() * x) - spd_log_det(x.transpose() * x));
}

double loglik(const EmpiricalMeasure& meas, const ScatterMatrix& sigma) {
  if (meas.ambient() != sigma.dim()) throw UsageError("loglik: dimension mismatch");
  const Matrix& si = sigma.inverse();
  double total = 0.0;
  for (std::size_t j = 0; j < meas.size(); ++j) {
    const Matrix& q = meas.points()[j].orthonormal();
    total += meas.weights()[j] * 0.5 * spd_log_det(q.transpose() * si * q);
  }
  return total;
}

McEstimate loglik(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) return McEstimate{loglik(*e, sigma), 0.0};
  const auto& gm = require_mc(meas, mc);
  std::vector<double> xs;
  xs.reserve(mc->samples);
  for (std::size_t i = 0; i < mc->samples; ++i) {
    xs.push_back(loglik_point(sample_gaussian(gm.sigma, gm.r, *mc->rng), sigma));
  }
  return scalar_moments(xs);
}

GradientVector grad_point(const SubspacePoint& u, const ScatterMatrix& sigma) {
  if (u.ambient() != sigma.dim()) throw UsageError("grad_point: dimension mismatch");
  const double coef = static_cast<double>(u.dim()) / (2.0 * static_cast<double>(u.ambient()));
  return tangent_project(sigma, coef * sigma.matrix() - 0.5 * weighted_span(u, sigma.inverse()));
}

Matrix weighted_span_sum(const EmpiricalMeasure& meas, const Matrix& sigma_inverse) {
  const Eigen::Index m = meas.ambient();
  Matrix acc = Matrix::Zero(m, m);
  const auto& pts = meas.points();
  const auto& w = meas.weights();
  if (meas.dim() == 1) {
    Vector tmp(m);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      const auto q = pts[j].orthonormal().col(0);
      tmp.noalias() = sigma_inverse * q;
      const double s = q.dot(tmp);
      if (!(s > 0.0)) throw DomainError("Gram matrix XᵀΣ⁻¹X is not positive definite");
      acc.noalias() += (w[j] / s) * (q * q.transpose());
    }
    return acc;
  }
  for (std::size_t j = 0; j < pts.size(); ++j) acc.noalias() += w[j] * weighted_span(pts[j], sigma_inverse);
  return acc;
}

GradientVector grad(const EmpiricalMeasure& meas, const ScatterMatrix& sigma) {
  if (meas.ambient() != sigma.dim()) throw UsageError("grad: dimension mismatch");
  const double coef = static_cast<double>(meas.dim()) / (2.0 * static_cast<double>(meas.ambient()));
  return tangent_project(sigma, coef * sigma.matrix() - 0.5 * weighted_span_sum(meas, sigma.inverse()));
}

McGradient grad(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) {
    return McGradient{grad(*e, sigma), Matrix::Zero(sigma.dim(), sigma.dim())};
  }
  const auto& gm = require_mc(meas, mc);
  MatrixMoments moments(sigma.dim());
  for (std::size_t i = 0; i < mc->samples; ++i) {
    moments.add(grad_point(sample_gaussian(gm.sigma, gm.r, *mc->rng), sigma).matrix());
  }
  return McGradient{tangent_project(sigma, moments.mean()), moments.std_error()};
}

namespace {

Matrix covariant_kernel(const Matrix& pi, const Matrix& sigma, const Matrix& z) {
  const Matrix sp = sigma * pi;  // Σπ, the Σ-orthogonal projector
  const Matrix zps = z * sp.transpose();
  return 0.25 * (zps + zps.transpose()) - 0.5 * sp * z * sp.transpose();
}

}  // namespace

TangentVector covariant_deriv_grad(const SubspacePoint& u, const ScatterMatrix& sigma, const TangentVector& z) {
  if (!z.base().approx_equal(sigma, tol::kBaseMatch * std::max(1.0, sigma.matrix().cwiseAbs().maxCoeff()))) {
    throw UsageError("covariant_deriv_grad: Z is not based at Σ");
  }
  return tangent_project(sigma, covariant_kernel(pi_matrix(u, sigma), sigma.matrix(), z.matrix()));
}

TangentVector covariant_deriv_grad(const EmpiricalMeasure& meas, const ScatterMatrix& sigma,
                                   const TangentVector& z) {
  if (!z.base().approx_equal(sigma, tol::kBaseMatch * std::max(1.0, sigma.matrix().cwiseAbs().maxCoeff()))) {
    throw UsageError("covariant_deriv_grad: Z is not based at Σ");
  }
  const Eigen::Index m = sigma.dim();
  Matrix acc = Matrix::Zero(m, m);
  for (std::size_t j = 0; j < meas.size(); ++j) {
    acc += meas.weights()[j] * covariant_kernel(pi_matrix(meas.points()[j], sigma), sigma.matrix(), z.matrix());
  }
  return tangent_project(sigma, acc);
}

double hess_quadform(const EmpiricalMeasure& meas, const ScatterMatrix& sigma, const TangentVector& z) {
  return inner(covariant_deriv_grad(meas, sigma, z), z);
}

McEstimate hess_quadform(const Measure& meas, const ScatterMatrix& sigma, const TangentVector& z,
                         std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) return McEstimate{hess_quadform(*e, sigma, z), 0.0};
  const auto& gm = require_mc(meas, mc);
  std::vector<double> xs;
  xs.reserve(mc->samples);
  for (std::size_t i = 0; i < mc->samples; ++i) {
    xs.push_back(inner(covariant_deriv_grad(sample_gaussian(gm.sigma, gm.r, *mc->rng), sigma, z), z));
  }
  return scalar_moments(xs);
}

double loglik_on_geodesic(const EmpiricalMeasure& meas, const TangentVector& w, double t) {
  const ScatterMatrix& sigma = w.base();
  if (meas.ambient() != sigma.dim()) throw UsageError("loglik_on_geodesic: dimension mismatch");
  const Eigen::Index m = sigma.dim();
  const Eigen::Index r = meas.dim();
  const SquareRoot g = sym_sqrt(sigma);
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(g.inverse * w.matrix() * g.inverse));
  const Vector exponent = -t * es.eigenvalues();
  const Matrix whiten = es.eigenvectors().transpose() * g.inverse;

  // All r-subsets of {0..m-1}.
  std::vector<std::vector<Eigen::Index>> subsets;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(r));
  for (Eigen::Index i = 0; i < r; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (;;) {
    subsets.push_back(idx);
    Eigen::Index pos = r;
    while (pos > 0 && idx[static_cast<std::size_t>(pos - 1)] == m - r + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[static_cast<std::size_t>(pos - 1)];
    for (Eigen::Index i = pos; i < r; ++i) idx[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i - 1)] + 1;
  }

  double total = 0.0;
  std::vector<double> logs(subsets.size());
  for (std::size_t j = 0; j < meas.size(); ++j) {
    const Matrix y = whiten * meas.points()[j].orthonormal();
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < subsets.size(); ++s) {
      Matrix minor(r, r);
      double e = 0.0;
      for (Eigen::Index i = 0; i < r; ++i) {
        const Eigen::Index row = subsets[s][static_cast<std::size_t>(i)];
        minor.row(i) = y.row(row);
        e += exponent(row);
      }
      const double det = minor.determinant();
      logs[s] = det == 0.0 ? -std::numeric_limits<double>::infinity() : 2.0 * std::log(std::abs(det)) + e;
      top = std::max(top, logs[s]);
    }
    double acc = 0.0;
    for (double l : logs) acc += std::exp(l - top);
    total += meas.weights()[j] * 0.5 * (top + std::log(acc));
  }
  return total;
}

MFunctionalValue m_matrix(const EmpiricalMeasure& meas, const ScatterMatrix& gamma) {
  if (meas.ambient() != gamma.dim()) throw UsageError("m_matrix: dimension mismatch");
  const SquareRoot g = sym_sqrt(gamma);
  return MFunctionalValue{linalg::symmetrize(g.inverse * weighted_span_sum(meas, gamma.inverse()) * g.inverse)};
}

MFunctionalValue m_matrix(const Measure& meas, const ScatterMatrix& gamma, std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) return m_matrix(*e, gamma);
  const auto& gm = require_mc(meas, mc);
  const SquareRoot g = sym_sqrt(gamma);
  Matrix acc = Matrix::Zero(gamma.dim(), gamma.dim());
  for (std::size_t i = 0; i < mc->samples; ++i) {
    acc += weighted_span(sample_gaussian(gm.sigma, gm.r, *mc->rng), gamma.inverse());
  }
  acc /= static_cast<double>(mc->samples);
  return MFunctionalValue{linalg::symmetrize(g.inverse * acc * g.inverse)};
}

double h_value(const EmpiricalMeasure& meas, const ScatterMatrix& gamma) {
  Matrix centered = m_matrix(meas, gamma).value;
  centered.diagonal().array() -= static_cast<double>(meas.dim()) / static_cast<double>(meas.ambient());
  return 0.25 * centered.squaredNorm();
}

TangentVector grad_h(const EmpiricalMeasure& meas, const ScatterMatrix& gamma) {
  if (!meas.is_uniform()) {
    throw UsageError("grad_h is defined for uniform-weight empirical measures only");
  }
  if (meas.ambient() != gamma.dim()) throw UsageError("grad_h: dimension mismatch");
  const Eigen::Index m = gamma.dim();
  const Matrix& G = gamma.matrix();
  std::vector<Matrix> pis;
  pis.reserve(meas.size());
  Matrix s = Matrix::Zero(m, m);
  for (const auto& p : meas.points()) {
    pis.push_back(pi_matrix(p, gamma));
    s += pis.back();
  }
  const Matrix gsg = G * s * G;
  Matrix first = Matrix::Zero(m, m);
  for (const auto& pi : pis) first += pi * gsg * pi;
  const double n = static_cast<double>(meas.size());
  const Matrix inner_term = first - s * G * s;
  return tangent_project(gamma, G * inner_term * G / (2.0 * n * n));
}

}  // namespace gscatter
