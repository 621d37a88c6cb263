#include "gscatter/estimator.hpp"

#include <cfloat>
#include <cmath>
#include <limits>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"

namespace gscatter {

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw UsageError("solver tolerance must be positive");
  if (!(damping > 0.0 && damping <= 1.0)) throw UsageError("damping must lie in (0, 1]");
  if (max_iter < 0) throw UsageError("max_iter must be non-negative");
  if (divergence_window < 1) throw UsageError("divergence_window must be positive");
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::kConverged: return "Converged";
    case SolverStatus::kDivergedToBoundary: return "DivergedToBoundary";
    case SolverStatus::kMaxIterations: return "MaxIterations";
  }
  return "Unknown";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// tr((Σ⁻¹A − (r/m)Id)²) for A = Σ_j w_j X_j(X_jᵀΣ⁻¹X_j)⁻¹X_jᵀ.
double residual_from_sum(const Matrix& a, const ScatterMatrix& sigma, double ratio) {
  Matrix b = sigma.inverse() * a;
  b.diagonal().array() -= ratio;
  return b.cwiseProduct(b.transpose()).sum();
}

ScatterMatrix resolve_start(const EmpiricalMeasure& meas, const std::optional<ScatterMatrix>& start) {
  if (!start) return ScatterMatrix::identity(meas.ambient());
  if (start->dim() != meas.ambient()) throw UsageError("initial scatter matrix has the wrong dimension");
  return *start;
}

// Growing distance from the start while the residual stops improving.
bool diverging(const std::vector<TraceRow>& trace, const SolverOptions& opts) {
  const auto k = trace.size();
  const auto w = static_cast<std::size_t>(opts.divergence_window);
  if (k <= w) return false;
  const TraceRow& now = trace[k - 1];
  const TraceRow& then = trace[k - 1 - w];
  return now.distance >= opts.divergence_growth && now.distance > then.distance && now.residual > opts.tol &&
         now.residual >= 0.5 * then.residual;
}

VelocityFlag flag_or_empty(const std::vector<ScatterMatrix>& iterates) {
  try {
    return boundary_flag(iterates);
  } catch (const EmptyFlagError&) {
    return {};
  }
}

}  // namespace

double residual(const EmpiricalMeasure& meas, const ScatterMatrix& sigma) {
  if (meas.ambient() != sigma.dim()) throw UsageError("residual: dimension mismatch");
  const double ratio = static_cast<double>(meas.dim()) / static_cast<double>(meas.ambient());
  return residual_from_sum(weighted_span_sum(meas, sigma.inverse()), sigma, ratio);
}

double residual(const Measure& meas, const ScatterMatrix& sigma, std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) return residual(*e, sigma);
  Matrix centered = m_matrix(meas, sigma, mc).value;
  centered.diagonal().array() -= static_cast<double>(measure_dim(meas)) / static_cast<double>(measure_ambient(meas));
  return centered.squaredNorm();
}

void require_spanning(const EmpiricalMeasure& meas) {
  const Eigen::Index m = meas.ambient();
  Matrix acc = Matrix::Zero(m, m);
  for (const auto& p : meas.points()) acc.noalias() += p.orthonormal() * p.orthonormal().transpose();
  if (linalg::numerical_rank(acc, tol::kRank) < m) {
    throw ExistenceError("atoms span a proper subspace of R^" + std::to_string(m) +
                         "; the M-equation has no solution");
  }
}

GEResult fixed_point_solve(const EmpiricalMeasure& meas, const std::optional<ScatterMatrix>& start,
                           const SolverOptions& opts) {
  opts.validate();
  require_spanning(meas);
  const ScatterMatrix origin = resolve_start(meas, start);
  const double m = static_cast<double>(meas.ambient());
  const double ratio = static_cast<double>(meas.dim()) / m;

  ScatterMatrix sigma = origin;
  std::vector<ScatterMatrix> iterates{origin};
  std::vector<TraceRow> trace;
  for (int k = 0;; ++k) {
    const Matrix a = weighted_span_sum(meas, sigma.inverse());
    const double res = residual_from_sum(a, sigma, ratio);
    trace.push_back(TraceRow{k, res, k == 0 ? 0.0 : distance(origin, sigma),
                             opts.record_loglik ? loglik(meas, sigma) : kNaN});
    if (res <= opts.tol) return GEResult{sigma, res, k, SolverStatus::kConverged, {}, std::move(trace)};
    if (diverging(trace, opts)) {
      return GEResult{sigma, res, k, SolverStatus::kDivergedToBoundary, flag_or_empty(iterates), std::move(trace)};
    }
    if (k >= opts.max_iter) return GEResult{sigma, res, k, SolverStatus::kMaxIterations, {}, std::move(trace)};
    try {
      ScatterMatrix target = ScatterMatrix::normalized(a / ratio);
      sigma = opts.damping < 1.0 ? geodesic(sigma, log_map(sigma, target), opts.damping) : std::move(target);
    } catch (const DomainError&) {
      // The update left the condition guard: the iterates run into the boundary.
      return GEResult{sigma, res, k, SolverStatus::kDivergedToBoundary, flag_or_empty(iterates), std::move(trace)};
    }
    iterates.push_back(sigma);
  }
}

GEResult riemannian_descent(const EmpiricalMeasure& meas, const std::optional<ScatterMatrix>& start,
                            const SolverOptions& opts) {
  opts.validate();
  require_spanning(meas);
  const ScatterMatrix origin = resolve_start(meas, start);
  constexpr double kArmijo = 1e-4;
  constexpr double kMaxStep = 16.0;
  constexpr int kMaxHalvings = 60;

  ScatterMatrix sigma = origin;
  double f = loglik(meas, sigma);
  double step = 1.0;
  std::vector<ScatterMatrix> iterates{origin};
  std::vector<TraceRow> trace;
  for (int k = 0;; ++k) {
    const GradientVector g = grad(meas, sigma);
    const double g2 = inner(g, g);
    const double res = 4.0 * g2;
    trace.push_back(TraceRow{k, res, k == 0 ? 0.0 : distance(origin, sigma), f});
    if (res <= opts.tol) return GEResult{sigma, res, k, SolverStatus::kConverged, {}, std::move(trace)};
    if (diverging(trace, opts)) {
      return GEResult{sigma, res, k, SolverStatus::kDivergedToBoundary, flag_or_empty(iterates), std::move(trace)};
    }
    if (k >= opts.max_iter) return GEResult{sigma, res, k, SolverStatus::kMaxIterations, {}, std::move(trace)};

    // Near the optimum the Armijo decrease drops below the resolution of ℓ_P.
    // There ℓ_P may only move by rounding, and the step must shrink the
    // gradient instead.
    const double slack = 8.0 * DBL_EPSILON * (1.0 + std::abs(f));
    step = std::min(2.0 * step, kMaxStep);
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h, step *= 0.5) {
      try {
        ScatterMatrix trial = geodesic(sigma, g, -step);
        const double ft = loglik(meas, trial);
        const double decrease = kArmijo * step * g2;
        bool ok = ft <= f - decrease;
        if (!ok && decrease <= slack && ft <= f + slack) {
          const GradientVector gt = grad(meas, trial);
          ok = inner(gt, gt) < g2;
        }
        if (ok) {
          sigma = std::move(trial);
          f = ft;
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    if (!accepted) return GEResult{sigma, res, k, SolverStatus::kMaxIterations, {}, std::move(trace)};
    iterates.push_back(sigma);
  }
}

GEResult riemannian_descent(const Measure& meas, const std::optional<ScatterMatrix>& start,
                            const SolverOptions& opts, std::optional<MonteCarlo> mc) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) return riemannian_descent(*e, start, opts);
  const auto& gm = std::get<GaussianMeasure>(meas);
  if (!mc || mc->samples < 2 || mc->rng == nullptr) {
    throw UsageError("Grassmannian distributions need a Monte Carlo size (>= 2) and an engine");
  }
  return riemannian_descent(sample_empirical(gm.sigma, gm.r, mc->samples, *mc->rng), start, opts);
}

}  // namespace gscatter
