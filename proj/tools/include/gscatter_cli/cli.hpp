#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gscatter/types.hpp"

namespace gscatter::cli {

// Stable exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitLimit = 1;
inline constexpr int kExitMaxIterations = 1;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitNoEstimate = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitInconclusive = 4;
/// Numerical failure not covered above.
inline constexpr int kExitFailure = 5;
inline constexpr int kExitUsage = 64;

/// Runs the tool with args[0] as the program name. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GradcheckOptions {
  std::uint64_t seed = 1;
  int trials = 100;
  double tol_gradient = 1e-6;
  double tol_hessian = 1e-5;
  double tol_grad_h = 1e-6;
  double tol_busemann = 1e-8;
};

struct SuiteResult {
  std::string name;
  double max_error;
  double tolerance;
  int cases;

  bool passed() const { return max_error <= tolerance; }
};

/// Finite-difference suites: gradient, Hessian quadratic form, grad h and the
/// Busemann-ray normalization.
std::vector<SuiteResult> run_gradcheck(const GradcheckOptions& opts);

}  // namespace gscatter::cli
