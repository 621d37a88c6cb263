#include "gscatter_cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "gscatter/asymptotics.hpp"
#include "gscatter/diagnostics.hpp"
#include "gscatter/errors.hpp"
#include "gscatter/estimator.hpp"
#include "gscatter/io.hpp"
#include "gscatter/linalg.hpp"
#include "gscatter/parallel.hpp"

namespace gscatter::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags extracted from diverging iterates are accurate to roughly the
// reciprocal of the final condition number, not to machine precision.
constexpr double kFlagRankTol = 1e-6;

// Seed stream index reserved for drawing a random Σ*.
constexpr std::uint64_t kSigmaStarStream = 0xffffffffULL;

struct Common {
  std::string input;
  std::optional<int> m;
  std::optional<int> r;
  std::uint64_t seed = 1;
  double tol = 1e-12;
  int max_iter = 500;
  std::string out = "out";
  std::optional<unsigned> threads;
};

struct EstimateArgs {
  std::string solver = "fixed-point";
  double damping = 1.0;
  std::string start;
};

struct DiagnoseArgs {
  std::vector<std::string> extra;
  std::size_t max_candidates = 4096;
  int max_subset = 2;
};

struct LlnArgs {
  std::vector<std::size_t> n_grid{25, 100, 400, 1600};
  std::size_t reps = 200;
  std::string sigma_star = "random";
};

struct CltArgs {
  std::size_t n = 2000;
  std::size_t reps = 4000;
  std::size_t mc_samples = 200000;
  std::string sigma_star = "identity";
};

struct GradcheckArgs {
  int trials = 100;
};

void add_common(CLI::App* cmd, Common& c, bool needs_input) {
  auto* in = cmd->add_option("--input", c.input, "Dataset manifest (JSON)");
  if (needs_input) in->required();
  cmd->add_option("--m", c.m, "Ambient dimension");
  cmd->add_option("--r", c.r, "Subspace dimension");
  cmd->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  cmd->add_option("--tol", c.tol, "Solver tolerance on the residual")->capture_default_str();
  cmd->add_option("--max-iter", c.max_iter, "Solver iteration cap")->capture_default_str();
  cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", c.threads, "Worker cap (default: GRASSMANN_SCATTER_THREADS or all cores)");
}

json common_json(const Common& c) {
  json j{{"input", c.input}, {"seed", c.seed}, {"tol", c.tol}, {"max_iter", c.max_iter}, {"out", c.out}};
  j["m"] = c.m ? json(*c.m) : json(nullptr);
  j["r"] = c.r ? json(*c.r) : json(nullptr);
  j["threads"] = resolve_threads(c.threads);
  return j;
}

SolverOptions solver_options(const Common& c) {
  SolverOptions o;
  o.tol = c.tol;
  o.max_iter = c.max_iter;
  return o;
}

void write_replay(const Common& c, const std::vector<std::string>& args, const std::string& command,
                  const json& config) {
  json replay{{"command", command},
              {"argv", json(std::vector<std::string>(args.begin() + 1, args.end()))},
              {"config", config},
              {"common", common_json(c)}};
  io::write_json(fs::path(c.out) / "replay.json", replay);
}

EmpiricalMeasure load_dataset(const Common& c) {
  EmpiricalMeasure meas = io::read_dataset(c.input);
  if (c.m && *c.m != meas.ambient()) {
    throw IoError("--m " + std::to_string(*c.m) + " disagrees with the dataset (m = " +
                  std::to_string(meas.ambient()) + ")");
  }
  if (c.r && *c.r != meas.dim()) {
    throw IoError("--r " + std::to_string(*c.r) + " disagrees with the dataset (r = " + std::to_string(meas.dim()) +
                  ")");
  }
  return meas;
}

ScatterMatrix resolve_sigma_star(const std::string& spec, Eigen::Index m, std::uint64_t seed) {
  if (spec == "identity") return ScatterMatrix::identity(m);
  if (spec == "random") {
    Rng rng = make_stream(seed, kSigmaStarStream);
    return random_scatter(m, rng);
  }
  ScatterMatrix s = io::read_scatter(spec);
  if (s.dim() != m) throw IoError(spec + ": Σ* has dimension " + std::to_string(s.dim()) + ", expected " +
                                  std::to_string(m));
  return s;
}

int cmd_estimate(const Common& c, const EstimateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const EmpiricalMeasure meas = load_dataset(c);
  SolverOptions opts = solver_options(c);
  opts.damping = a.damping;
  std::optional<ScatterMatrix> start;
  if (!a.start.empty()) start = io::read_scatter(a.start);
  write_replay(c, args, "estimate", json{{"solver", a.solver}, {"damping", a.damping}, {"start", a.start}});

  const fs::path dir(c.out);
  json report{{"m", meas.ambient()}, {"r", meas.dim()}, {"n", meas.size()}, {"solver", a.solver}};
  try {
    const GEResult res =
        a.solver == "descent" ? riemannian_descent(meas, start, opts) : fixed_point_solve(meas, start, opts);
    report["result"] = io::to_json(res);
    io::write_matrix_csv(dir / "estimate.csv", res.estimate.matrix());
    io::write_trace_csv(dir / "trace.csv", res.trace);
    int code = kExitOk;
    if (res.status == SolverStatus::kDivergedToBoundary) {
      ExistenceOptions eopts;
      json flag_i = json::array();
      for (const auto& step : res.flag.steps) {
        eopts.extra.push_back(SubspaceCandidate{step.subspace, Provenance::kEigenFlag});
        flag_i.push_back(i_value(meas, step.subspace, kFlagRankTol));
      }
      report["flag_i_values"] = flag_i;
      report["diagnostics"] = io::to_json(classify_existence(meas, eopts));
      code = kExitNoEstimate;
    } else if (res.status == SolverStatus::kMaxIterations) {
      code = kExitMaxIterations;
    }
    io::write_json(dir / "estimate.json", report);
    out << "status: " << to_string(res.status) << "\nresidual: " << res.residual
        << "\niterations: " << res.iterations << '\n';
    return code;
  } catch (const ExistenceError& e) {
    report["error"] = e.what();
    report["diagnostics"] = io::to_json(classify_existence(meas));
    io::write_json(dir / "estimate.json", report);
    out << "status: NoEstimate\n" << e.what() << '\n';
    return kExitNoEstimate;
  }
}

int cmd_diagnose(const Common& c, const DiagnoseArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const EmpiricalMeasure meas = load_dataset(c);
  ExistenceOptions opts;
  opts.candidates.max_candidates = a.max_candidates;
  opts.candidates.max_subset = a.max_subset;
  for (const auto& path : a.extra) {
    opts.extra.push_back(SubspaceCandidate{io::read_subspace(path), Provenance::kUserSupplied});
  }
  write_replay(c, args, "diagnose",
               json{{"extra", a.extra}, {"max_candidates", a.max_candidates}, {"max_subset", a.max_subset}});
  const ExistenceReport report = classify_existence(meas, opts);
  io::write_json(fs::path(c.out) / "diagnose.json", io::to_json(report));
  out << "verdict: " << to_string(report.verdict) << "\nscanned: " << report.scanned << "\nmin_i: " << report.min_i
      << '\n';
  switch (report.verdict) {
    case Verdict::kUnique: return kExitOk;
    case Verdict::kLimit: return kExitLimit;
    case Verdict::kNoEstimate: return kExitNoEstimate;
    case Verdict::kInconclusive: return kExitInconclusive;
  }
  return kExitInconclusive;
}

int cmd_lln(const Common& c, const LlnArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const int m = c.m.value_or(3);
  const int r = c.r.value_or(2);
  if (r < 1 || r >= m) throw UsageError("lln needs 0 < r < m");
  LlnConfig cfg{resolve_sigma_star(a.sigma_star, m, c.seed), r, a.n_grid, a.reps, c.seed,
                resolve_threads(c.threads), solver_options(c)};
  const json config{{"m", m}, {"r", r}, {"n_grid", a.n_grid}, {"reps", a.reps}, {"sigma_star", a.sigma_star},
                    {"sigma_star_matrix", io::matrix_to_json(cfg.sigma_star.matrix())}};
  write_replay(c, args, "lln", config);
  const LlnReport rep = lln_experiment(cfg);

  const fs::path dir(c.out);
  std::ostringstream cells;
  cells.precision(17);
  cells << "n,rep,distance,status,iterations,error\n";
  for (const auto& cell : rep.cells) {
    cells << cell.n << ',' << cell.rep << ',';
    if (!std::isnan(cell.distance)) cells << cell.distance;
    cells << ',' << to_string(cell.status) << ',' << cell.iterations << ",\"" << cell.error << "\"\n";
  }
  io::write_text(dir / "lln_cells.csv", cells.str());
  std::ostringstream summary;
  summary.precision(17);
  summary << "n,median,q1,q3,failures\n";
  json rows = json::array();
  for (const auto& row : rep.rows) {
    summary << row.n << ',' << row.median << ',' << row.q1 << ',' << row.q3 << ',' << row.failures << '\n';
    rows.push_back({{"n", row.n}, {"median", row.median}, {"q1", row.q1}, {"q3", row.q3}, {"failures", row.failures}});
  }
  io::write_text(dir / "lln_summary.csv", summary.str());
  json warnings = json::array();
  if (!rep.monotone) warnings.push_back("WARN: median distance is not strictly decreasing in n");
  json j{{"config", config}, {"seed", c.seed}, {"rows", rows}, {"slope", rep.slope}, {"monotone", rep.monotone},
         {"warnings", warnings}};
  io::write_json(dir / "lln.json", j);
  for (const auto& row : rep.rows) out << "n=" << row.n << " median=" << row.median << '\n';
  out << "slope: " << rep.slope << '\n';
  for (const auto& w : warnings) out << w.get<std::string>() << '\n';
  return kExitOk;
}

int cmd_clt(const Common& c, const CltArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const int m = c.m.value_or(2);
  const int r = c.r.value_or(1);
  if (r < 1 || r >= m) throw UsageError("clt needs 0 < r < m");
  CltConfig cfg{resolve_sigma_star(a.sigma_star, m, c.seed), r, a.n, a.reps, c.seed, resolve_threads(c.threads),
                solver_options(c), a.mc_samples};
  const json config{{"m", m}, {"r", r}, {"n", a.n}, {"reps", a.reps}, {"mc_samples", a.mc_samples},
                    {"sigma_star", a.sigma_star}, {"sigma_star_matrix", io::matrix_to_json(cfg.sigma_star.matrix())}};
  write_replay(c, args, "clt", config);
  const CltReport rep = clt_experiment(cfg);

  const fs::path dir(c.out);
  std::ostringstream samples;
  samples.precision(17);
  samples << "rep";
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) samples << ",z_" << i << '_' << j;
  }
  samples << '\n';
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    samples << k;
    for (Eigen::Index i = 0; i < rep.samples[k].size(); ++i) samples << ',' << rep.samples[k](i);
    samples << '\n';
  }
  io::write_text(dir / "clt_samples.csv", samples.str());

  json normality = json::array();
  for (const auto& s : rep.normality) {
    normality.push_back({{"row", s.row}, {"col", s.col}, {"mean", s.mean}, {"variance", s.variance},
                         {"skewness", s.skewness}, {"excess_kurtosis", s.excess_kurtosis},
                         {"jarque_bera", s.jarque_bera}, {"p_value", s.p_value}});
  }
  json flags = json::array();
  if (rep.low_power) flags.push_back("LOW_POWER");
  json j{{"config", config},
         {"seed", c.seed},
         {"n", rep.n},
         {"reps", rep.reps},
         {"failures", rep.failures},
         {"empirical_cov", io::matrix_to_json(rep.empirical_cov)},
         {"sigma_inf", io::matrix_to_json(rep.sigma_inf)},
         {"sigma2", io::matrix_to_json(rep.sigma2)},
         {"rel_frobenius_error", rep.rel_frobenius_error},
         {"annihilation", rep.annihilation},
         {"linearized_rel_error", rep.linearized_rel_error},
         {"normality", normality},
         {"flags", flags}};
  io::write_json(dir / "clt.json", j);
  out << "rel_frobenius_error: " << rep.rel_frobenius_error << "\nannihilation: " << rep.annihilation
      << "\nlinearized_rel_error: " << rep.linearized_rel_error << '\n';
  if (rep.low_power) out << "normality: LOW_POWER\n";
  return kExitOk;
}

int cmd_gradcheck(const Common& c, const GradcheckArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  GradcheckOptions opts;
  opts.seed = c.seed;
  opts.trials = a.trials;
  write_replay(c, args, "gradcheck", json{{"trials", a.trials}});
  const auto suites = run_gradcheck(opts);
  json j = json::array();
  bool ok = true;
  for (const auto& s : suites) {
    j.push_back({{"suite", s.name}, {"max_error", s.max_error}, {"tolerance", s.tolerance}, {"cases", s.cases},
                 {"passed", s.passed()}});
    out << s.name << ": max_error=" << s.max_error << " tol=" << s.tolerance << (s.passed() ? " ok" : " FAIL")
        << '\n';
    ok = ok && s.passed();
  }
  io::write_json(fs::path(c.out) / "gradcheck.json", json{{"seed", c.seed}, {"suites", j}});
  return ok ? kExitOk : kExitCheckFailed;
}

std::vector<std::string> replay_args(const std::string& path) {
  const json j = io::read_json(path);
  try {
    std::vector<std::string> args{"grassmann-scatter"};
    for (const auto& a : j.at("argv")) args.push_back(a.get<std::string>());
    return args;
  } catch (const json::exception& e) {
    throw IoError(path + ": malformed replay file: " + e.what());
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grassmannian M-estimation of scatter", "grassmann-scatter"};
  app.require_subcommand(1);

  Common common;
  EstimateArgs est;
  DiagnoseArgs diag;
  LlnArgs lln;
  CltArgs clt;
  GradcheckArgs grad;
  std::string replay_path;

  auto* estimate = app.add_subcommand("estimate", "Compute the estimate for a dataset");
  add_common(estimate, common, true);
  estimate->add_option("--solver", est.solver, "fixed-point | descent")
      ->check(CLI::IsMember({"fixed-point", "descent"}))
      ->capture_default_str();
  estimate->add_option("--damping", est.damping, "Geodesic damping in (0, 1]")->capture_default_str();
  estimate->add_option("--start", est.start, "Initial scatter matrix (CSV or JSON)");

  auto* diagnose = app.add_subcommand("diagnose", "Classify existence and uniqueness");
  add_common(diagnose, common, true);
  diagnose->add_option("--extra", diag.extra, "Additional candidate subspaces (CSV bases)");
  diagnose->add_option("--max-candidates", diag.max_candidates, "Candidate cap")->capture_default_str();
  diagnose->add_option("--max-subset", diag.max_subset, "Atoms per generated sum")->capture_default_str();

  auto* lln_cmd = app.add_subcommand("lln", "Consistency experiment");
  add_common(lln_cmd, common, false);
  lln_cmd->add_option("--n-grid", lln.n_grid, "Sample sizes")->delimiter(',')->capture_default_str();
  lln_cmd->add_option("--reps", lln.reps, "Replications per sample size")->capture_default_str();
  lln_cmd->add_option("--sigma-star", lln.sigma_star, "identity | random | path")->capture_default_str();

  auto* clt_cmd = app.add_subcommand("clt", "Asymptotic normality experiment");
  add_common(clt_cmd, common, false);
  clt_cmd->add_option("--n", clt.n, "Sample size")->capture_default_str();
  clt_cmd->add_option("--reps", clt.reps, "Replications")->capture_default_str();
  clt_cmd->add_option("--mc-samples", clt.mc_samples, "Monte Carlo draws for the limiting covariance")
      ->capture_default_str();
  clt_cmd->add_option("--sigma-star", clt.sigma_star, "identity | random | path")->capture_default_str();

  auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference derivative checks");
  add_common(gradcheck, common, false);
  gradcheck->add_option("--trials", grad.trials, "Random instances")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Re-run a command from its replay.json");
  replay->add_option("file", replay_path, "replay.json")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*replay) return run(replay_args(replay_path), out, err);
    if (common.tol <= 0) throw UsageError("--tol must be positive");
    if (*estimate) return cmd_estimate(common, est, args, out);
    if (*diagnose) return cmd_diagnose(common, diag, args, out);
    if (*lln_cmd) return cmd_lln(common, lln, args, out);
    if (*clt_cmd) return cmd_clt(common, clt, args, out);
    if (*gradcheck) return cmd_gradcheck(common, grad, args, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gscatter::cli
