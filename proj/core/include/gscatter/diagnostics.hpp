#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gscatter/grassmann.hpp"
#include "gscatter/manifold.hpp"

namespace gscatter {

enum class Provenance { kSampleSum, kSampleIntersection, kEigenFlag, kUserSupplied };

std::string to_string(Provenance p);

/// A proper subspace V (0 < dim V < m) scanned by the existence test.
struct SubspaceCandidate {
  SubspacePoint subspace;
  Provenance provenance;
};

struct CandidateList {
  std::vector<SubspaceCandidate> items;
  /// True when generation stopped at the cap before the lattice was closed.
  bool truncated = false;
};

enum class Verdict { kUnique, kNoEstimate, kLimit, kInconclusive };

std::string to_string(Verdict v);

struct ExistenceReport {
  Verdict verdict = Verdict::kInconclusive;
  /// Set for kNoEstimate: a subspace with I_P(V) < −tol.
  std::optional<SubspaceCandidate> witness;
  double witness_value = 0.0;
  /// Set for kLimit / kInconclusive: subspaces with |I_P(V)| ≤ tol.
  std::vector<SubspaceCandidate> zeros;
  bool complement_ok = false;
  int scanned = 0;
  double min_i = 0.0;
  bool truncated = false;
};

/// One step α_k > 0 of a nested flag V₁ ⊂ … ⊂ V_s.
struct FlagStep {
  double alpha;
  SubspacePoint subspace;
};

struct VelocityFlag {
  std::vector<FlagStep> steps;

  bool empty() const { return steps.empty(); }
};

/// I_P(V) = (r/m) dim V − Σ_j w_j dim(U_j ∩ V); intersections use `rank_tol`.
double i_value(const EmpiricalMeasure& meas, const SubspacePoint& v, double rank_tol = tol::kRank);

struct CandidateOptions {
  /// Largest dimension kept for a generated sum (capped at m − 1).
  int max_dim_sum = 0;
  /// Largest number of atoms combined into one sum.
  int max_subset = 2;
  /// Hard cap on the number of distinct candidates.
  std::size_t max_candidates = 4096;
  double rank_tol = tol::kRank;
};

/// Deduplicated candidate subspaces: the atoms, the span of all atoms when it
/// is proper, sums of up to max_subset atoms,
/// pairwise intersections, and one round of sums/intersections among those.
CandidateList candidate_subspaces(const EmpiricalMeasure& meas, const CandidateOptions& opts = {});

struct ExistenceOptions {
  double tol = tol::kExistence;
  CandidateOptions candidates;
  /// Scanned in addition to the generated lattice (user-supplied subspaces,
  /// flags from diverging runs).
  std::vector<SubspaceCandidate> extra;
};

/// Classifies existence and uniqueness of the estimate by scanning I_P over a
/// lattice of candidate subspaces.
ExistenceReport classify_existence(const EmpiricalMeasure& meas, const ExistenceOptions& opts = {});

/// Decomposes a self-Σ-adjoint trace-zero w into Σ_k α_k (Pr(V_k, Σ) − dim(V_k)/m · Id)
/// with a nested flag V_k. Eigenvalues closer than `gap_tol` (relative to the
/// largest magnitude) are merged. w = 0 yields an empty flag.
VelocityFlag decompose_velocity(const ScatterMatrix& sigma, const Matrix& w, double gap_tol = tol::kFlagGap);

/// Σ_k α_k (Pr(V_k, Σ) − dim(V_k)/m · Id).
Matrix reconstruct_velocity(const VelocityFlag& flag, const ScatterMatrix& sigma);

/// Σ_k α_k I_P(V_k): its sign decides whether ℓ_P grows along the geodesic.
double flag_functional(const EmpiricalMeasure& meas, const VelocityFlag& flag, double rank_tol = tol::kRank);

/// lim_{t→∞} d/dt ℓ_P(e^{tw} Σ) = ½ Σ_k α_k I_P(V_k).
double asymptotic_slope(const EmpiricalMeasure& meas, const ScatterMatrix& sigma, const Matrix& w,
                        double gap_tol = tol::kFlagGap);

/// Escape direction of a diverging sequence: the log-map from the first to the
/// last iterate, expressed as a self-Σ-adjoint velocity, normalized and
/// decomposed into a flag. Throws EmptyFlagError when the iterates do not move
/// away from the start.
VelocityFlag boundary_flag(const std::vector<ScatterMatrix>& iterates, double gap_tol = tol::kFlagGap);

}  // namespace gscatter
