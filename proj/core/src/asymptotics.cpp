#include "gscatter/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"
#include "gscatter/parallel.hpp"

namespace gscatter {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Euclidean orthogonal projector onto span(g⁻¹X).
Matrix whitened_projector(const SubspacePoint& u, const Matrix& g_inverse) {
  const Matrix theta = g_inverse * u.orthonormal();
  if (theta.cols() == 1) {
    const Vector t = theta.col(0) / theta.col(0).norm();
    return t * t.transpose();
  }
  const Matrix q = Eigen::HouseholderQR<Matrix>(theta).householderQ() * Matrix::Identity(theta.rows(), theta.cols());
  return q * q.transpose();
}

template <typename Visit>
void for_each_atom(const Measure& meas, const std::optional<MonteCarlo>& mc, Visit&& visit) {
  if (const auto* e = std::get_if<EmpiricalMeasure>(&meas)) {
    for (std::size_t j = 0; j < e->size(); ++j) visit(e->points()[j], e->weights()[j]);
    return;
  }
  const auto& gm = std::get<GaussianMeasure>(meas);
  if (!mc || mc->samples < 2 || mc->rng == nullptr) {
    throw UsageError("Grassmannian distributions need a Monte Carlo size (>= 2) and an engine");
  }
  const double w = 1.0 / static_cast<double>(mc->samples);
  for (std::size_t i = 0; i < mc->samples; ++i) visit(sample_gaussian(gm.sigma, gm.r, *mc->rng), w);
}

void require_compatible(const Measure& meas, const ScatterMatrix& sigma_p) {
  if (measure_ambient(meas) != sigma_p.dim()) throw UsageError("measure and Σ_P dimensions differ");
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) return kNaN;
  std::sort(xs.begin(), xs.end());
  const double h = p * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

Matrix sample_covariance(const std::vector<Vector>& rows, Eigen::Index dim) {
  Matrix cov = Matrix::Zero(dim, dim);
  if (rows.size() < 2) return cov;
  Vector mean = Vector::Zero(dim);
  for (const auto& z : rows) mean += z;
  mean /= static_cast<double>(rows.size());
  for (const auto& z : rows) cov.noalias() += (z - mean) * (z - mean).transpose();
  return cov / static_cast<double>(rows.size() - 1);
}

double rel_frobenius(const Matrix& a, const Matrix& reference) {
  return (a - reference).norm() / reference.norm();
}

}  // namespace

Matrix c_n(const ScatterMatrix& sigma_n, const ScatterMatrix& sigma_p) {
  if (sigma_n.dim() != sigma_p.dim()) throw UsageError("c_n: dimension mismatch");
  const SquareRoot g = sym_sqrt(sigma_p);
  const Matrix w = linalg::symmetrize(g.inverse * sigma_n.matrix() * g.inverse);
  return static_cast<double>(sigma_p.dim()) / w.trace() * w;
}

CovarianceOperators covariance_operators(const Measure& meas, const ScatterMatrix& sigma_p,
                                         std::optional<MonteCarlo> mc) {
  require_compatible(meas, sigma_p);
  const Eigen::Index m = sigma_p.dim();
  const double ratio = static_cast<double>(measure_dim(meas)) / static_cast<double>(m);
  const Matrix g_inv = sym_sqrt(sigma_p).inverse;
  CovarianceOperators out{Matrix::Zero(m * m, m * m), Matrix::Zero(m * m, m * m)};
  for_each_atom(meas, mc, [&](const SubspacePoint& u, double w) {
    const Matrix pi = whitened_projector(u, g_inv);
    Matrix centered = pi;
    centered.diagonal().array() -= ratio;
    const Vector d = linalg::vec(centered);
    out.sigma2.noalias() += w * d * d.transpose();
    out.sigma0.noalias() += w * linalg::kron(pi, pi);
  });
  out.sigma2 = linalg::symmetrize(out.sigma2);
  out.sigma0 = linalg::symmetrize(out.sigma0);
  return out;
}

Matrix sigma2(const Measure& meas, const ScatterMatrix& sigma_p, std::optional<MonteCarlo> mc) {
  return covariance_operators(meas, sigma_p, mc).sigma2;
}

Matrix sigma0(const Measure& meas, const ScatterMatrix& sigma_p, std::optional<MonteCarlo> mc) {
  return covariance_operators(meas, sigma_p, mc).sigma0;
}

Matrix l0(const Matrix& sigma0, Eigen::Index m, Eigen::Index r) {
  if (sigma0.rows() != m * m || sigma0.cols() != m * m) throw UsageError("l0: Σ₀ must be m²×m²");
  return static_cast<double>(r) / static_cast<double>(m) * Matrix::Identity(m * m, m * m) - sigma0;
}

Matrix tangent_projector(Eigen::Index m) {
  const Eigen::Index d = m * m;
  Matrix q = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      // vec index of entry (i, j) is i + j·m; K swaps it with (j, i).
      q(i + j * m, i + j * m) += 0.5;
      q(i + j * m, j + i * m) += 0.5;
    }
  }
  const Vector vi = linalg::vec(Matrix::Identity(m, m));
  q -= vi * vi.transpose() / static_cast<double>(m);
  return q;
}

Matrix eigen_projector(const Matrix& s, double rel_cutoff) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(s));
  const double top = es.eigenvalues().cwiseAbs().maxCoeff();
  Matrix p = Matrix::Zero(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (es.eigenvalues()(i) > rel_cutoff * top) p += es.eigenvectors().col(i) * es.eigenvectors().col(i).transpose();
  }
  return p;
}

LimitingCovariance sigma_infinity(const Measure& meas, const ScatterMatrix& sigma_p, std::optional<MonteCarlo> mc,
                                  double pinv_cutoff) {
  const Eigen::Index m = sigma_p.dim();
  const Eigen::Index r = measure_dim(meas);
  CovarianceOperators ops = covariance_operators(meas, sigma_p, mc);
  const Eigen::Index tangent_dim = (m - 1) * (m + 2) / 2;

  Eigen::SelfAdjointEigenSolver<Matrix> es(ops.sigma2);
  const double top = es.eigenvalues().maxCoeff();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > 1e-8 * top ? 1 : 0;
  if (rank < tangent_dim) {
    throw DegeneracyError("rank of σ² is " + std::to_string(rank) + " < " + std::to_string(tangent_dim) +
                          "; the support does not fill the Grassmannian");
  }

  LimitingCovariance out;
  out.q = tangent_projector(m);
  out.q_mismatch = (out.q - eigen_projector(ops.sigma2, 1e-8)).cwiseAbs().maxCoeff();
  out.l0 = l0(ops.sigma0, m, r);
  const Matrix qlq = linalg::symmetrize(out.q * out.l0 * out.q);

  // Restriction of QL₀Q to Im(Q) in an orthonormal basis of that image.
  const Matrix basis = linalg::orthonormal_basis(out.q, 1e-8);
  const Eigen::JacobiSVD<Matrix> svd(basis.transpose() * qlq * basis);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= pinv_cutoff * sv(0)) {
    throw DegeneracyError("QL₀Q is singular on Im(σ²)");
  }
  out.pinv = linalg::pinv(qlq, pinv_cutoff);
  out.sigma_inf = linalg::symmetrize(out.pinv * ops.sigma2 * out.pinv.transpose());
  out.sigma2 = std::move(ops.sigma2);
  out.sigma0 = std::move(ops.sigma0);
  return out;
}

LlnReport lln_experiment(const LlnConfig& cfg) {
  if (cfg.reps == 0 || cfg.n_grid.empty()) throw UsageError("lln_experiment needs reps > 0 and a non-empty grid");
  const Eigen::Index m = cfg.sigma_star.dim();
  for (std::size_t n : cfg.n_grid) {
    if (static_cast<Eigen::Index>(n) * cfg.r <= m) throw UsageError("lln_experiment needs n·r > m");
  }
  const std::size_t total = cfg.n_grid.size() * cfg.reps;
  std::vector<LlnCell> cells(total);
  parallel_for(total, cfg.threads, [&](std::size_t idx) {
    const std::size_t gi = idx / cfg.reps;
    const std::size_t rep = idx % cfg.reps;
    LlnCell cell{cfg.n_grid[gi], rep, kNaN, SolverStatus::kMaxIterations, 0, {}};
    try {
      Rng rng = make_stream(cfg.seed, idx);
      const EmpiricalMeasure sample = sample_empirical(cfg.sigma_star, cfg.r, cfg.n_grid[gi], rng);
      const GEResult res = fixed_point_solve(sample, std::nullopt, cfg.solver);
      cell.status = res.status;
      cell.iterations = res.iterations;
      if (res.status == SolverStatus::kConverged) {
        cell.distance = distance(res.estimate, cfg.sigma_star);
      } else {
        cell.error = to_string(res.status);
      }
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    cells[idx] = std::move(cell);
  });

  LlnReport report;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t points = 0;
  for (std::size_t gi = 0; gi < cfg.n_grid.size(); ++gi) {
    std::vector<double> d;
    std::size_t failures = 0;
    for (std::size_t rep = 0; rep < cfg.reps; ++rep) {
      const auto& c = cells[gi * cfg.reps + rep];
      if (std::isnan(c.distance)) {
        ++failures;
      } else {
        d.push_back(c.distance);
      }
    }
    LlnRow row{cfg.n_grid[gi], quantile(d, 0.5), quantile(d, 0.25), quantile(d, 0.75), failures};
    if (row.median > 0.0) {
      const double x = std::log(static_cast<double>(row.n));
      const double y = std::log(row.median);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++points;
    }
    report.rows.push_back(row);
  }
  const double np = static_cast<double>(points);
  report.slope = points >= 2 ? (np * sxy - sx * sy) / (np * sxx - sx * sx) : kNaN;
  report.monotone = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (!(report.rows[i].median < report.rows[i - 1].median)) report.monotone = false;
  }
  report.cells = std::move(cells);
  return report;
}

CltReport clt_experiment(const CltConfig& cfg) {
  const Eigen::Index m = cfg.sigma_star.dim();
  if (cfg.reps < 2) throw UsageError("clt_experiment needs at least two replications");
  if (static_cast<Eigen::Index>(cfg.n) * cfg.r <= m) throw UsageError("clt_experiment needs n·r > m");
  const double root_n = std::sqrt(static_cast<double>(cfg.n));

  std::vector<std::optional<Vector>> draws(cfg.reps);
  parallel_for(cfg.reps, cfg.threads, [&](std::size_t rep) {
    try {
      Rng rng = make_stream(cfg.seed, rep);
      const EmpiricalMeasure sample = sample_empirical(cfg.sigma_star, cfg.r, cfg.n, rng);
      const GEResult res = fixed_point_solve(sample, std::nullopt, cfg.solver);
      if (res.status != SolverStatus::kConverged) return;
      Matrix c = c_n(res.estimate, cfg.sigma_star);
      c.diagonal().array() -= 1.0;
      draws[rep] = root_n * linalg::vec(c);
    } catch (const Error&) {
    }
  });

  CltReport report;
  report.n = cfg.n;
  report.reps = cfg.reps;
  report.failures = 0;
  for (auto& d : draws) {
    if (d) {
      report.samples.push_back(std::move(*d));
    } else {
      ++report.failures;
    }
  }
  if (report.samples.size() < 2) throw Error("clt_experiment: fewer than two replications converged");
  const Eigen::Index dim = m * m;
  report.empirical_cov = sample_covariance(report.samples, dim);

  Rng mc_rng = make_stream(cfg.seed, cfg.reps);
  const LimitingCovariance lim =
      sigma_infinity(GaussianMeasure{cfg.sigma_star, cfg.r}, cfg.sigma_star, MonteCarlo{cfg.mc_samples, &mc_rng});
  report.sigma_inf = lim.sigma_inf;
  report.sigma2 = lim.sigma2;
  report.rel_frobenius_error = rel_frobenius(report.empirical_cov, report.sigma_inf);

  std::vector<Vector> directions;
  directions.push_back(linalg::vec(Matrix::Identity(m, m)) / std::sqrt(static_cast<double>(m)));
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      Matrix a = Matrix::Zero(m, m);
      a(i, j) = 1.0 / std::sqrt(2.0);
      a(j, i) = -1.0 / std::sqrt(2.0);
      directions.push_back(linalg::vec(a));
    }
  }
  report.annihilation = 0.0;
  for (const auto& u : directions) report.annihilation = std::max(report.annihilation, (report.empirical_cov * u).norm());

  std::vector<Vector> linearized;
  linearized.reserve(report.samples.size());
  for (const auto& z : report.samples) linearized.push_back(lim.l0 * z);
  report.linearized_rel_error = rel_frobenius(sample_covariance(linearized, dim), lim.sigma2);

  const double count = static_cast<double>(report.samples.size());
  const double var_floor = 1e-12 * std::max(1.0, report.empirical_cov.diagonal().maxCoeff());
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i <= j; ++i) {
      const Eigen::Index k = i + j * m;
      double mean = 0.0;
      for (const auto& z : report.samples) mean += z(k);
      mean /= count;
      double m2 = 0.0, m3 = 0.0, m4 = 0.0;
      for (const auto& z : report.samples) {
        const double d = z(k) - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
      }
      m2 /= count;
      m3 /= count;
      m4 /= count;
      if (m2 <= var_floor) continue;
      const double skew = m3 / std::pow(m2, 1.5);
      const double kurt = m4 / (m2 * m2) - 3.0;
      const double jb = count / 6.0 * (skew * skew + 0.25 * kurt * kurt);
      report.normality.push_back(CoordinateStats{i, j, mean, m2 * count / (count - 1.0), skew, kurt, jb,
                                                 std::exp(-0.5 * jb)});
    }
  }
  report.low_power = report.samples.size() < kNormalityMinReps;
  return report;
}

}  // namespace gscatter
