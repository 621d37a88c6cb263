#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace gscatter {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Pseudo-random engine used throughout. Callers own and pass it explicitly.
using Rng = std::mt19937_64;

/// Independent stream keyed by (seed, index). The same key always yields the
/// same stream, independently of how work is scheduled across threads.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// Default numerical tolerances. Every operation that uses one of these
/// accepts an override where the tolerance is part of its contract.
namespace tol {
inline constexpr double kSymmetry = 1e-12;
inline constexpr double kUnimodular = 1e-10;
inline constexpr double kTangentTrace = 1e-10;
inline constexpr double kMaxCondition = 1e14;
inline constexpr double kRank = 1e-10;
inline constexpr double kExistence = 1e-9;
inline constexpr double kFlagGap = 1e-6;
inline constexpr double kPinvCutoff = 1e-10;
inline constexpr double kBaseMatch = 1e-12;
}  // namespace tol

}  // namespace gscatter
