#pragma once

#include "gscatter/types.hpp"

namespace gscatter {

/// A point of the manifold of symmetric positive-definite m×m matrices with
/// unit determinant. Immutable; keeps its spectral decomposition so that
/// inverses and square roots are cheap.
class ScatterMatrix {
 public:
  /// Strict constructor: the input must already be symmetric, positive
  /// definite, unimodular and within the condition-number guard.
  static ScatterMatrix from_matrix(const Matrix& m);

  /// Symmetrizes and rescales M / det(M)^{1/m}. Throws DomainError if the
  /// input is not positive definite or exceeds the condition guard.
  static ScatterMatrix normalized(const Matrix& m);

  static ScatterMatrix identity(Eigen::Index m);

  Eigen::Index dim() const { return value_.rows(); }
  const Matrix& matrix() const { return value_; }
  const Matrix& inverse() const { return inverse_; }
  /// Ascending eigenvalues and matching orthonormal eigenvectors.
  const Vector& eigenvalues() const { return eigenvalues_; }
  const Matrix& eigenvectors() const { return eigenvectors_; }
  double condition() const { return eigenvalues_(dim() - 1) / eigenvalues_(0); }

  /// Entry-wise comparison within `tolerance`.
  bool approx_equal(const ScatterMatrix& other, double tolerance) const;

 private:
  ScatterMatrix(Matrix value, Vector eigenvalues, Matrix eigenvectors);

  Matrix value_;
  Matrix inverse_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
};

/// A symmetric matrix V with tr(Σ⁻¹V) = 0, attached to its base point Σ.
class TangentVector {
 public:
  /// Validates symmetry and the trace condition.
  static TangentVector from_matrix(const ScatterMatrix& base, const Matrix& value);
  static TangentVector zero(const ScatterMatrix& base);

  const ScatterMatrix& base() const { return base_; }
  const Matrix& matrix() const { return value_; }

  TangentVector operator*(double s) const;
  TangentVector operator+(const TangentVector& other) const;
  TangentVector operator-(const TangentVector& other) const;
  TangentVector operator-() const { return *this * -1.0; }

  /// √⟨V, V⟩_Σ.
  double norm() const;

 private:
  TangentVector(ScatterMatrix base, Matrix value) : base_(std::move(base)), value_(std::move(value)) {}
  friend TangentVector tangent_project(const ScatterMatrix& sigma, const Matrix& s);

  ScatterMatrix base_;
  Matrix value_;
};

/// The symmetric positive-definite square root g of Σ (g·g = Σ, det g = 1).
struct SquareRoot {
  Matrix root;
  Matrix inverse;
};

SquareRoot sym_sqrt(const ScatterMatrix& sigma);

/// ⟨A, B⟩_Σ = tr(Σ⁻¹ A Σ⁻¹ B). Throws UsageError if A and B live at
/// different base points.
double inner(const TangentVector& a, const TangentVector& b);

/// The geodesic t ↦ g exp(t g⁻¹Wg⁻¹) g through Σ = g² with initial velocity W.
ScatterMatrix geodesic(const ScatterMatrix& sigma, const TangentVector& w, double t);

/// Riemannian distance ‖log(Σ₀^{-1/2} Σ₁ Σ₀^{-1/2})‖_F.
double distance(const ScatterMatrix& a, const ScatterMatrix& b);

/// Inverse of the exponential map: the velocity W at `from` whose geodesic
/// reaches `to` at t = 1.
TangentVector log_map(const ScatterMatrix& from, const ScatterMatrix& to);

/// Removes the Σ-trace component: S − (tr(Σ⁻¹S)/m)·Σ. S must be symmetric.
TangentVector tangent_project(const ScatterMatrix& sigma, const Matrix& s);

/// Unit-norm tangent vector drawn from a distribution invariant under the
/// stabilizer of Σ.
TangentVector random_unit_tangent(const ScatterMatrix& sigma, Rng& rng);

/// Random element of SL(m, ℝ) with positive determinant.
Matrix random_special_linear(Eigen::Index m, Rng& rng);

/// Random point of the manifold, exp of a Gaussian tangent vector at Id scaled
/// by `spread`.
ScatterMatrix random_scatter(Eigen::Index m, Rng& rng, double spread = 1.0);

/// A Σ Aᵀ rescaled to unit determinant.
ScatterMatrix congruence(const Matrix& a, const ScatterMatrix& sigma);

}  // namespace gscatter
