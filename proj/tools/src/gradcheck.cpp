#include <algorithm>
#include <cmath>

#include "gscatter/grassmann.hpp"
#include "gscatter/linalg.hpp"
#include "gscatter/mfunc.hpp"
#include "gscatter_cli/cli.hpp"

namespace gscatter::cli {

namespace {

struct Instance {
  EmpiricalMeasure meas;
  ScatterMatrix sigma;
  TangentVector w;
};

Instance random_instance(Rng& rng) {
  std::uniform_int_distribution<int> pick_m(2, 4);
  const int m = pick_m(rng);
  std::uniform_int_distribution<int> pick_r(1, m - 1);
  const int r = pick_r(rng);
  std::uniform_int_distribution<int> pick_n(1, 8);
  const int n = pick_n(rng);
  std::normal_distribution<double> normal;
  std::vector<SubspacePoint> pts;
  for (int j = 0; j < n; ++j) {
    Matrix b(m, r);
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = normal(rng);
    pts.push_back(SubspacePoint::from_basis(b));
  }
  ScatterMatrix sigma = random_scatter(m, rng);
  TangentVector w = random_unit_tangent(sigma, rng);
  return Instance{EmpiricalMeasure::uniform(std::move(pts)), std::move(sigma), std::move(w)};
}

double rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-3});
}

template <typename F>
double central_first(F&& f, double h) {
  return (f(h) - f(-h)) / (2.0 * h);
}

template <typename F>
double central_second(F&& f, double h) {
  return (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
}

}  // namespace

std::vector<SuiteResult> run_gradcheck(const GradcheckOptions& opts) {
  SuiteResult gradient{"gradient", 0.0, opts.tol_gradient, 0};
  SuiteResult hessian{"hessian_quadform", 0.0, opts.tol_hessian, 0};
  SuiteResult gradh{"grad_h", 0.0, opts.tol_grad_h, 0};
  for (int t = 0; t < opts.trials; ++t) {
    Rng rng = make_stream(opts.seed, static_cast<std::uint64_t>(t));
    const Instance in = random_instance(rng);
    auto ell = [&](double s) { return loglik(in.meas, geodesic(in.sigma, in.w, s)); };
    auto h = [&](double s) { return h_value(in.meas, geodesic(in.sigma, in.w, s)); };

    gradient.max_error = std::max(gradient.max_error, rel_error(inner(grad(in.meas, in.sigma), in.w), central_first(ell, 1e-5)));
    hessian.max_error =
        std::max(hessian.max_error, rel_error(hess_quadform(in.meas, in.sigma, in.w), central_second(ell, 1e-3)));
    gradh.max_error = std::max(gradh.max_error, rel_error(inner(grad_h(in.meas, in.sigma), in.w), central_first(h, 1e-5)));
    ++gradient.cases;
    ++hessian.cases;
    ++gradh.cases;
  }

  SuiteResult busemann_ray{"busemann_ray", 0.0, opts.tol_busemann, 0};
  for (Eigen::Index m = 2; m <= 6; ++m) {
    for (Eigen::Index r = 1; r < m; ++r) {
      const SubspacePoint u0 = SubspacePoint::coordinate(m, 0, r);
      const Matrix a = busemann_ray_direction(m, r);
      for (int k = 0; k <= 40; ++k) {
        const double s = -5.0 + 0.25 * k;
        const ScatterMatrix sigma = ScatterMatrix::normalized(linalg::sym_exp(s * a));
        busemann_ray.max_error = std::max(busemann_ray.max_error, std::abs(busemann(u0, sigma) + s));
        ++busemann_ray.cases;
      }
    }
  }
  return {gradient, hessian, gradh, busemann_ray};
}

}  // namespace gscatter::cli
