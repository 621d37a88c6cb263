#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gscatter/estimator.hpp"
#include "gscatter/mfunc.hpp"

namespace gscatter {

/// C_n = m / tr(Σ_P⁻¹Σ_n) · g⁻¹Σ_n g⁻¹ with g = sym_sqrt(Σ_P); tr(C_n) = m.
Matrix c_n(const ScatterMatrix& sigma_n, const ScatterMatrix& sigma_p);

/// E[vec(Π − (r/m)Id) vec(Π − (r/m)Id)ᵀ] with Π = Θ(ΘᵀΘ)⁻¹Θᵀ, Θ = g⁻¹X.
Matrix sigma2(const Measure& meas, const ScatterMatrix& sigma_p, std::optional<MonteCarlo> mc = std::nullopt);

/// E[Π ⊗ Π].
Matrix sigma0(const Measure& meas, const ScatterMatrix& sigma_p, std::optional<MonteCarlo> mc = std::nullopt);

struct CovarianceOperators {
  Matrix sigma2;
  Matrix sigma0;
};

/// σ² and Σ₀ from one pass over the same atoms or Monte Carlo draws.
CovarianceOperators covariance_operators(const Measure& meas, const ScatterMatrix& sigma_p,
                                         std::optional<MonteCarlo> mc = std::nullopt);

/// L₀ = (r/m)Id_{m²} − Σ₀.
Matrix l0(const Matrix& sigma0, Eigen::Index m, Eigen::Index r);

/// Orthogonal projector onto vectorized symmetric trace-zero m×m matrices:
/// (Id + K)/2 − (1/m) vec(Id)vec(Id)ᵀ, K the commutation matrix.
Matrix tangent_projector(Eigen::Index m);

/// Projector onto the eigenvectors of a symmetric PSD matrix whose
/// eigenvalues exceed rel_cutoff · λ_max.
Matrix eigen_projector(const Matrix& s, double rel_cutoff);

struct LimitingCovariance {
  Matrix sigma2;
  Matrix sigma0;
  Matrix l0;
  Matrix q;
  /// [QL₀Q]⁺.
  Matrix pinv;
  Matrix sigma_inf;
  /// max |Q − eigenprojector(σ²)|.
  double q_mismatch;
};

/// σ∞² = [QL₀Q]⁺ σ² ([QL₀Q]⁺)ᵀ. Throws DegeneracyError when rank σ² is below
/// (m−1)(m+2)/2 (support smaller than the Grassmannian) or when QL₀Q is
/// singular on Im(σ²) beyond the pseudo-inverse cutoff.
LimitingCovariance sigma_infinity(const Measure& meas, const ScatterMatrix& sigma_p,
                                  std::optional<MonteCarlo> mc = std::nullopt,
                                  double pinv_cutoff = tol::kPinvCutoff);

struct LlnCell {
  std::size_t n;
  std::size_t rep;
  double distance;  // NaN on failure
  SolverStatus status;
  int iterations;
  std::string error;
};

struct LlnRow {
  std::size_t n;
  double median;
  double q1;
  double q3;
  std::size_t failures;
};

struct LlnReport {
  std::vector<LlnCell> cells;
  std::vector<LlnRow> rows;
  /// Least-squares slope of log(median) against log(n).
  double slope;
  bool monotone;
};

struct LlnConfig {
  ScatterMatrix sigma_star;
  Eigen::Index r;
  std::vector<std::size_t> n_grid;
  std::size_t reps;
  std::uint64_t seed;
  unsigned threads = 1;
  SolverOptions solver{};
};

LlnReport lln_experiment(const LlnConfig& cfg);

struct CoordinateStats {
  Eigen::Index row;
  Eigen::Index col;
  double mean;
  double variance;
  double skewness;
  double excess_kurtosis;
  double jarque_bera;
  /// Asymptotic χ²₂ tail probability of the Jarque–Bera statistic.
  double p_value;
};

struct CltConfig {
  ScatterMatrix sigma_star;
  Eigen::Index r;
  std::size_t n;
  std::size_t reps;
  std::uint64_t seed;
  unsigned threads = 1;
  SolverOptions solver{};
  /// Monte Carlo draws for σ² and Σ₀.
  std::size_t mc_samples = 200000;
};

struct CltReport {
  std::size_t n;
  std::size_t reps;
  /// Rows √n·vec(C_n − Id) of the successful replications.
  std::vector<Vector> samples;
  std::size_t failures;
  Matrix empirical_cov;
  Matrix sigma_inf;
  Matrix sigma2;
  double rel_frobenius_error;
  /// Largest ‖cov·u‖ over u ∈ {vec(Id)/√m} ∪ orthonormal antisymmetric directions.
  double annihilation;
  /// Relative Frobenius distance between cov(L₀·√n vec(C_n − Id)) and σ².
  double linearized_rel_error;
  /// Coordinates (i, j) with i ≤ j and non-zero variance.
  std::vector<CoordinateStats> normality;
  /// Set when reps is too small for the normality statistics to mean much.
  bool low_power;
};

/// Replicates draw from make_stream(seed, rep); σ² and Σ₀ use the stream
/// make_stream(seed, reps).
CltReport clt_experiment(const CltConfig& cfg);

/// Minimum replication count for which normality tests are reported as powered.
inline constexpr std::size_t kNormalityMinReps = 50;

}  // namespace gscatter
