#pragma once

#include <optional>
#include <vector>

#include "gscatter/diagnostics.hpp"
#include "gscatter/mfunc.hpp"

namespace gscatter {

struct SolverOptions {
  int max_iter = 500;
  /// Threshold on the residual tr((M − (r/m)Id)²).
  double tol = 1e-12;
  /// Fraction of the geodesic from Σ_k to the fixed-point update, in (0, 1].
  double damping = 1.0;
  int divergence_window = 25;
  /// Distance from the start beyond which a growing, non-improving run is
  /// declared divergent.
  double divergence_growth = 10.0;
  /// Record ℓ_P in the trace of fixed_point_solve (always on for descent).
  bool record_loglik = false;

  void validate() const;
};

enum class SolverStatus { kConverged, kDivergedToBoundary, kMaxIterations };

std::string to_string(SolverStatus s);

struct TraceRow {
  int iteration;
  double residual;
  double distance;
  /// NaN when not recorded.
  double loglik;
};

struct GEResult {
  ScatterMatrix estimate;
  double residual;
  int iterations;
  SolverStatus status;
  /// Non-empty only for kDivergedToBoundary.
  VelocityFlag flag;
  std::vector<TraceRow> trace;
};

/// tr((M − (r/m)Id)²) at Σ.
double residual(const EmpiricalMeasure& meas, const ScatterMatrix& sigma);
double residual(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc = std::nullopt);

/// Throws ExistenceError when the atoms span a proper subspace of ℝᵐ.
void require_spanning(const EmpiricalMeasure& meas);

/// Σ ← normalize((m/r) Σ_j w_j X_j(X_jᵀΣ⁻¹X_j)⁻¹X_jᵀ), damped along the geodesic.
GEResult fixed_point_solve(const EmpiricalMeasure& meas, const std::optional<ScatterMatrix>& start = std::nullopt,
                           const SolverOptions& opts = {});

/// Riemannian gradient descent with Armijo backtracking on ℓ_P.
GEResult riemannian_descent(const EmpiricalMeasure& meas, const std::optional<ScatterMatrix>& start = std::nullopt,
                            const SolverOptions& opts = {});

/// Grassmannian distributions are replaced by a fixed Monte Carlo sample of
/// `mc.samples` subspaces (sample-average approximation).
GEResult riemannian_descent(const Measure& meas, const std::optional<ScatterMatrix>& start,
                            const SolverOptions& opts, std::optional<MonteCarlo> mc);

}  // namespace gscatter
