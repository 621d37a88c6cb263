#pragma once

#include <variant>
#include <vector>

#include "gscatter/manifold.hpp"
#include "gscatter/types.hpp"

namespace gscatter {

/// An r-dimensional linear subspace of ℝᵐ, stored through the basis it was
/// built from together with an orthonormal basis of the same span. Every
/// span-level computation uses the orthonormal basis.
class SubspacePoint {
 public:
  /// Throws DomainError if X does not have full column rank r with 0 < r < m
  /// (singular values compared relative to the largest, cutoff `rank_tol`).
  static SubspacePoint from_basis(const Matrix& x, double rank_tol = tol::kRank);

  /// span(e_first, …, e_{first+count-1}) in ℝᵐ.
  static SubspacePoint coordinate(Eigen::Index m, Eigen::Index first, Eigen::Index count);

  Eigen::Index ambient() const { return basis_.rows(); }
  Eigen::Index dim() const { return basis_.cols(); }
  const Matrix& basis() const { return basis_; }
  const Matrix& orthonormal() const { return orthonormal_; }

  /// Euclidean orthogonal projector onto the span.
  Matrix euclidean_projector() const { return orthonormal_ * orthonormal_.transpose(); }

 private:
  SubspacePoint(Matrix basis, Matrix orthonormal)
      : basis_(std::move(basis)), orthonormal_(std::move(orthonormal)) {}

  Matrix basis_;
  Matrix orthonormal_;
};

/// Weighted list of subspaces sharing (m, r).
class EmpiricalMeasure {
 public:
  static EmpiricalMeasure uniform(std::vector<SubspacePoint> points);
  /// Weights must be nonnegative and sum to 1 within 1e-12.
  static EmpiricalMeasure weighted(std::vector<SubspacePoint> points, std::vector<double> weights);

  Eigen::Index ambient() const { return m_; }
  Eigen::Index dim() const { return r_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<SubspacePoint>& points() const { return points_; }
  const std::vector<double>& weights() const { return weights_; }
  bool is_uniform() const { return uniform_; }

  /// Image under U ↦ A·U.
  EmpiricalMeasure transformed(const Matrix& a) const;

 private:
  EmpiricalMeasure(std::vector<SubspacePoint> points, std::vector<double> weights, bool uniform);

  std::vector<SubspacePoint> points_;
  std::vector<double> weights_;
  Eigen::Index m_ = 0;
  Eigen::Index r_ = 0;
  bool uniform_ = true;
};

/// The Grassmannian distribution: law of the span of r i.i.d. N(0, Σ) vectors.
struct GaussianMeasure {
  ScatterMatrix sigma;
  Eigen::Index r;
};

using Measure = std::variant<EmpiricalMeasure, GaussianMeasure>;

Eigen::Index measure_ambient(const Measure& meas);
Eigen::Index measure_dim(const Measure& meas);

SubspacePoint sample(const Measure& meas, Rng& rng);
SubspacePoint sample_gaussian(const ScatterMatrix& sigma, Eigen::Index r, Rng& rng);
/// n i.i.d. draws from the Grassmannian distribution, uniform weights.
EmpiricalMeasure sample_empirical(const ScatterMatrix& sigma, Eigen::Index r, std::size_t n, Rng& rng);

/// Image of U under an invertible linear map, basis A·X.
SubspacePoint act(const Matrix& a, const SubspacePoint& u);

/// Σ-orthogonal projector onto U: X (XᵀΣ⁻¹X)⁻¹ XᵀΣ⁻¹.
Matrix projector(const SubspacePoint& u, const ScatterMatrix& sigma);

/// π_U(Σ) = Σ⁻¹ X (XᵀΣ⁻¹X)⁻¹ XᵀΣ⁻¹ (symmetric; Σ·π_U(Σ) is the projector).
Matrix pi_matrix(const SubspacePoint& u, const ScatterMatrix& sigma);

/// X (XᵀΣ⁻¹X)⁻¹ Xᵀ, the symmetric kernel shared by the gradient, the
/// M-functional and the fixed-point map.
Matrix weighted_span(const SubspacePoint& u, const Matrix& sigma_inverse);

/// d𝔾_Σ / d𝔾_Id at U: (det(XᵀX) / det(XᵀΣ⁻¹X))^{m/2}.
double density_ratio(const SubspacePoint& u, const ScatterMatrix& sigma);

/// dim(U ∩ V) = dim U + dim V − rank[X_U | X_V].
int dim_intersection(const SubspacePoint& u, const SubspacePoint& v, double rank_tol = tol::kRank);

/// Numerical sum and intersection of two subspaces. The result may be {0} or
/// ℝᵐ, which SubspacePoint cannot represent, so these return bases
/// (possibly with zero or m columns).
Matrix subspace_sum_basis(const Matrix& a, const Matrix& b, double rank_tol = tol::kRank);
Matrix subspace_intersection_basis(const Matrix& a, const Matrix& b, double rank_tol = tol::kRank);

/// True if the spans coincide.
bool same_span(const SubspacePoint& u, const SubspacePoint& v, double tolerance = 1e-8);

/// Busemann function √(m/((m−r)r)) · log(det(XᵀΣ⁻¹X)/det(XᵀX)).
double busemann(const SubspacePoint& u, const ScatterMatrix& sigma);

/// The unit-speed ray direction diag(λ_r·1_r, −β_r·1_{m−r}) whose geodesic
/// exp(tA) tends to span(e₁,…,e_r).
Matrix busemann_ray_direction(Eigen::Index m, Eigen::Index r);

/// ρ(h) = (det(X₀ᵀX₀) / det(X₀ᵀ h⁻ᵀ h⁻¹ X₀))^{m/2}, X₀ = (e₁,…,e_r), det h = 1.
double rho(const Matrix& h, Eigen::Index r);

/// Modular function of the maximal parabolic P_r on its torus:
/// |λ₁|^{mr}.
double modular_parabolic(double lambda1, Eigen::Index m, Eigen::Index r);

}  // namespace gscatter
