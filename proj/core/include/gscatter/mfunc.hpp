#pragma once

#include <optional>

#include "gscatter/grassmann.hpp"
#include "gscatter/manifold.hpp"

namespace gscatter {

/// Monte Carlo settings for integrals against a Grassmannian distribution.
/// The engine is owned by the caller.
struct MonteCarlo {
  std::size_t samples = 0;
  Rng* rng = nullptr;
};

/// Monte Carlo mean with its standard error (zero for exact sums).
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Gradients are tangent vectors at their base point.
using GradientVector = TangentVector;

/// The whitened M-functional g⁻¹ (∫ X(XᵀΓ⁻¹X)⁻¹Xᵀ dP) g⁻¹ at Γ = g².
struct MFunctionalValue {
  Matrix value;

  double trace() const { return value.trace(); }
  double trace_of_square() const { return value.cwiseProduct(value.transpose()).sum(); }
};

/// ℓ_U(Σ) = ½ log(det(XᵀΣ⁻¹X) / det(XᵀX)).
double loglik_point(const SubspacePoint& u, const ScatterMatrix& sigma);

/// ℓ_P(Σ) = Σ_j w_j ℓ_{U_j}(Σ).
double loglik(const EmpiricalMeasure& meas, const ScatterMatrix& sigma);

/// Exact for empirical measures; Monte Carlo for Grassmannian distributions,
/// which require `mc` (UsageError otherwise).
McEstimate loglik(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc = std::nullopt);

/// grad ℓ_U(Σ) = (r/2m) Σ − ½ X (XᵀΣ⁻¹X)⁻¹ Xᵀ.
GradientVector grad_point(const SubspacePoint& u, const ScatterMatrix& sigma);

/// Σ_j w_j X_j (X_jᵀΣ⁻¹X_j)⁻¹ X_jᵀ, summed in atom order.
Matrix weighted_span_sum(const EmpiricalMeasure& meas, const Matrix& sigma_inverse);

GradientVector grad(const EmpiricalMeasure& meas, const ScatterMatrix& sigma);

struct McGradient {
  GradientVector mean;
  /// Entry-wise standard error of the mean.
  Matrix std_error;
};

McGradient grad(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc = std::nullopt);

/// ∇_Z grad ℓ_U(Σ) = ¼ Zπ Σ + ¼ Σπ Z − ½ Σπ Z πΣ, with π = π_U(Σ).
TangentVector covariant_deriv_grad(const SubspacePoint& u, const ScatterMatrix& sigma, const TangentVector& z);

TangentVector covariant_deriv_grad(const EmpiricalMeasure& meas, const ScatterMatrix& sigma,
                                   const TangentVector& z);

/// ⟨∇_Z grad ℓ_P(Σ), Z⟩_Σ, the Riemannian Hessian quadratic form.
double hess_quadform(const EmpiricalMeasure& meas, const ScatterMatrix& sigma, const TangentVector& z);
McEstimate hess_quadform(const Measure& meas, const ScatterMatrix& sigma, const TangentVector& z,
                         std::optional<MonteCarlo> mc = std::nullopt);

/// ℓ_P(γ(t)) on the geodesic γ(t) = geodesic(Σ, W, t), evaluated without
/// forming γ(t): with V = g⁻¹Wg⁻¹ = QΛQᵀ and Y = Qᵀg⁻¹X, det(XᵀΣ(t)⁻¹X) is
/// expanded by Cauchy–Binet into positive terms det(Y_S)² e^{−t Σ_S λ_i}.
/// Stays accurate far beyond the condition guard of ScatterMatrix.
double loglik_on_geodesic(const EmpiricalMeasure& meas, const TangentVector& w, double t);

/// M(Γ); trace r, PSD.
MFunctionalValue m_matrix(const EmpiricalMeasure& meas, const ScatterMatrix& gamma);
MFunctionalValue m_matrix(const Measure& meas, const ScatterMatrix& gamma, std::optional<MonteCarlo> mc = std::nullopt);

/// h(Γ) = ⟨grad ℓ_P, grad ℓ_P⟩_Γ = ¼ (tr(M²) − r²/m).
double h_value(const EmpiricalMeasure& meas, const ScatterMatrix& gamma);

/// Gradient of h for a uniform-weight empirical measure. Non-uniform weights
/// raise UsageError.
TangentVector grad_h(const EmpiricalMeasure& meas, const ScatterMatrix& gamma);

}  // namespace gscatter
