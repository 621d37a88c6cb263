#include "gscatter/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gscatter/errors.hpp"
#include "gscatter/linalg.hpp"

namespace gscatter {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kSampleSum: return "SampleSum";
    case Provenance::kSampleIntersection: return "SampleIntersection";
    case Provenance::kEigenFlag: return "EigenFlag";
    case Provenance::kUserSupplied: return "UserSupplied";
  }
  return "Unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kUnique: return "Unique";
    case Verdict::kNoEstimate: return "NoGE";
    case Verdict::kLimit: return "Limit";
    case Verdict::kInconclusive: return "Inconclusive";
  }
  return "Unknown";
}

double i_value(const EmpiricalMeasure& meas, const SubspacePoint& v, double rank_tol) {
  if (v.ambient() != meas.ambient()) throw UsageError("i_value: dimension mismatch");
  double covered = 0.0;
  for (std::size_t j = 0; j < meas.size(); ++j) {
    covered += meas.weights()[j] * dim_intersection(meas.points()[j], v, rank_tol);
  }
  return static_cast<double>(meas.dim()) / static_cast<double>(meas.ambient()) * static_cast<double>(v.dim()) -
         covered;
}

namespace {

// Candidate accumulator with projector-based deduplication.
class CandidateSet {
 public:
  CandidateSet(Eigen::Index m, int max_dim, std::size_t cap, double rank_tol)
      : m_(m), max_dim_(max_dim), cap_(cap), rank_tol_(rank_tol) {}

  // Returns false once the cap is reached.
  bool add(const Matrix& basis, Provenance provenance) {
    const Eigen::Index k = basis.cols();
    if (k <= 0 || k >= m_ || k > max_dim_) return true;
    if (list_.items.size() >= cap_) {
      list_.truncated = true;
      return false;
    }
    const Matrix q = linalg::orthonormal_basis(basis, rank_tol_);
    if (q.cols() != k) return true;
    const Matrix p = q * q.transpose();
    std::vector<long long> key;
    key.reserve(static_cast<std::size_t>(p.size()));
    for (Eigen::Index i = 0; i < p.size(); ++i) key.push_back(std::llround(p.data()[i] * 1e6));
    if (!seen_.insert(std::move(key)).second) return true;
    list_.items.push_back(SubspaceCandidate{SubspacePoint::from_basis(q, rank_tol_), provenance});
    return true;
  }

  bool full() const { return list_.items.size() >= cap_; }
  const CandidateList& list() const { return list_; }
  CandidateList take() { return std::move(list_); }

 private:
  Eigen::Index m_;
  int max_dim_;
  std::size_t cap_;
  double rank_tol_;
  std::set<std::vector<long long>> seen_;
  CandidateList list_;
};

// Visits every subset of {0..n-1} with 2 <= size <= k in lexicographic order.
template <typename F>
bool for_each_subset(std::size_t n, std::size_t k, F&& visit) {
  std::vector<std::size_t> idx;
  for (std::size_t size = 2; size <= std::min(n, k); ++size) {
    idx.resize(size);
    for (std::size_t i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      if (!visit(idx)) return false;
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t i = pos; i < size; ++i) idx[i] = idx[i - 1] + 1;
    }
  }
  return true;
}

}  // namespace

CandidateList candidate_subspaces(const EmpiricalMeasure& meas, const CandidateOptions& opts) {
  const Eigen::Index m = meas.ambient();
  const int max_dim = opts.max_dim_sum > 0 ? std::min<int>(opts.max_dim_sum, static_cast<int>(m) - 1)
                                           : static_cast<int>(m) - 1;
  CandidateSet set(m, std::max<int>(max_dim, static_cast<int>(meas.dim())), opts.max_candidates, opts.rank_tol);
  const auto& pts = meas.points();

  for (const auto& p : pts) {
    if (!set.add(p.orthonormal(), Provenance::kSampleSum)) return set.take();
  }
  {
    // Span of all atoms; proper exactly when the M-equation is infeasible.
    Matrix all(m, 0);
    for (const auto& p : pts) {
      all = subspace_sum_basis(all, p.orthonormal(), opts.rank_tol);
      if (all.cols() == m) break;
    }
    if (!set.add(all, Provenance::kSampleSum)) return set.take();
  }

  const bool sums_done = for_each_subset(pts.size(), static_cast<std::size_t>(std::max(opts.max_subset, 1)),
                                         [&](const std::vector<std::size_t>& idx) {
                                           Matrix acc = pts[idx[0]].orthonormal();
                                           for (std::size_t i = 1; i < idx.size(); ++i) {
                                             acc = subspace_sum_basis(acc, pts[idx[i]].orthonormal(), opts.rank_tol);
                                           }
                                           return set.add(acc, Provenance::kSampleSum);
                                         });
  if (!sums_done) return set.take();

  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const Matrix b = subspace_intersection_basis(pts[i].orthonormal(), pts[j].orthonormal(), opts.rank_tol);
      if (!set.add(b, Provenance::kSampleIntersection)) return set.take();
    }
  }

  // One closure round over the first-generation lattice.
  const std::vector<SubspaceCandidate> first = set.list().items;
  for (std::size_t i = 0; i < first.size(); ++i) {
    for (std::size_t j = i + 1; j < first.size(); ++j) {
      const Matrix& a = first[i].subspace.orthonormal();
      const Matrix& b = first[j].subspace.orthonormal();
      if (!set.add(subspace_sum_basis(a, b, opts.rank_tol), Provenance::kSampleSum)) return set.take();
      if (!set.add(subspace_intersection_basis(a, b, opts.rank_tol), Provenance::kSampleIntersection)) {
        return set.take();
      }
    }
  }
  return set.take();
}

ExistenceReport classify_existence(const EmpiricalMeasure& meas, const ExistenceOptions& opts) {
  CandidateList cands = candidate_subspaces(meas, opts.candidates);
  for (const auto& c : opts.extra) {
    if (c.subspace.ambient() != meas.ambient()) throw UsageError("extra candidate has the wrong ambient dimension");
    cands.items.push_back(c);
  }

  ExistenceReport report;
  report.scanned = static_cast<int>(cands.items.size());
  report.truncated = cands.truncated;
  std::vector<double> values;
  values.reserve(cands.items.size());
  double min_i = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  for (std::size_t k = 0; k < cands.items.size(); ++k) {
    values.push_back(i_value(meas, cands.items[k].subspace, opts.candidates.rank_tol));
    if (values.back() < min_i) {
      min_i = values.back();
      argmin = k;
    }
  }
  report.min_i = min_i;

  if (cands.items.empty()) {
    report.verdict = Verdict::kInconclusive;
    return report;
  }
  if (min_i < -opts.tol) {
    report.verdict = Verdict::kNoEstimate;
    report.witness = cands.items[argmin];
    report.witness_value = min_i;
    return report;
  }
  if (min_i > opts.tol) {
    report.verdict = Verdict::kUnique;
    return report;
  }

  std::vector<std::size_t> zero_idx;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (std::abs(values[k]) <= opts.tol) zero_idx.push_back(k);
  }
  const Eigen::Index m = meas.ambient();
  const Eigen::Index r = meas.dim();
  bool all_ok = true;
  for (std::size_t k : zero_idx) {
    const SubspacePoint& v = cands.items[k].subspace;
    report.zeros.push_back(cands.items[k]);
    bool found = false;
    for (std::size_t c = 0; c < cands.items.size() && !found; ++c) {
      const SubspacePoint& vc = cands.items[c].subspace;
      if (vc.dim() + v.dim() != m || values[c] > opts.tol) continue;
      if (dim_intersection(v, vc, opts.candidates.rank_tol) != 0) continue;
      bool splits = true;
      for (const auto& u : meas.points()) {
        if (dim_intersection(u, v, opts.candidates.rank_tol) + dim_intersection(u, vc, opts.candidates.rank_tol) !=
            r) {
          splits = false;
          break;
        }
      }
      found = splits;
    }
    all_ok = all_ok && found;
  }
  report.complement_ok = all_ok;
  report.verdict = all_ok ? Verdict::kLimit : Verdict::kInconclusive;
  return report;
}

VelocityFlag decompose_velocity(const ScatterMatrix& sigma, const Matrix& w, double gap_tol) {
  const Eigen::Index m = sigma.dim();
  if (w.rows() != m || w.cols() != m) throw UsageError("decompose_velocity: dimension mismatch");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  const Matrix adj = sigma.matrix() * w.transpose() * sigma.inverse();
  if ((adj - w).cwiseAbs().maxCoeff() > 1e-10 * scale * std::max(1.0, sigma.condition())) {
    throw DomainError("velocity is not self-Σ-adjoint");
  }
  if (std::abs(w.trace()) > 1e-10 * scale) throw DomainError("velocity is not trace-free");

  const SquareRoot g = sym_sqrt(sigma);
  Eigen::SelfAdjointEigenSolver<Matrix> es(linalg::symmetrize(g.inverse * w * g.root));
  // descending order
  const Vector lam = es.eigenvalues().reverse();
  const Matrix vecs = es.eigenvectors().rowwise().reverse();
  const double mag = lam.cwiseAbs().maxCoeff();
  VelocityFlag flag;
  if (mag == 0.0) return flag;

  // clusters as [begin, end) ranges in descending order
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;
  Eigen::Index begin = 0;
  for (Eigen::Index i = 1; i <= m; ++i) {
    if (i == m || lam(i - 1) - lam(i) > gap_tol * mag) {
      clusters.emplace_back(begin, i);
      begin = i;
    }
  }
  if (clusters.size() < 2) return flag;

  auto mean_of = [&](const std::pair<Eigen::Index, Eigen::Index>& c) {
    return lam.segment(c.first, c.second - c.first).mean();
  };
  for (std::size_t k = 0; k + 1 < clusters.size(); ++k) {
    const double alpha = mean_of(clusters[k]) - mean_of(clusters[k + 1]);
    const Eigen::Index dim = clusters[k].second;
    flag.steps.push_back(FlagStep{alpha, SubspacePoint::from_basis(g.root * vecs.leftCols(dim))});
  }
  return flag;
}

Matrix reconstruct_velocity(const VelocityFlag& flag, const ScatterMatrix& sigma) {
  const Eigen::Index m = sigma.dim();
  Matrix w = Matrix::Zero(m, m);
  for (const auto& step : flag.steps) {
    w += step.alpha * (projector(step.subspace, sigma) -
                       static_cast<double>(step.subspace.dim()) / static_cast<double>(m) * Matrix::Identity(m, m));
  }
  return w;
}

double flag_functional(const EmpiricalMeasure& meas, const VelocityFlag& flag, double rank_tol) {
  double total = 0.0;
  for (const auto& step : flag.steps) total += step.alpha * i_value(meas, step.subspace, rank_tol);
  return total;
}

double asymptotic_slope(const EmpiricalMeasure& meas, const ScatterMatrix& sigma, const Matrix& w, double gap_tol) {
  return 0.5 * flag_functional(meas, decompose_velocity(sigma, w, gap_tol));
}

VelocityFlag boundary_flag(const std::vector<ScatterMatrix>& iterates, double gap_tol) {
  if (iterates.size() < 2) throw EmptyFlagError("boundary_flag needs at least two iterates");
  const ScatterMatrix& start = iterates.front();
  const ScatterMatrix& last = iterates.back();
  const double total = distance(start, last);
  const ScatterMatrix& middle = iterates[iterates.size() / 2];
  const double tail = distance(middle, last);
  if (total <= 1e-8 || tail <= 1e-6 * std::max(1.0, total)) {
    throw EmptyFlagError("iterates are stationary; no escape direction");
  }
  const TangentVector velocity = log_map(start, last);
  const Matrix w = velocity.matrix() * start.inverse() / velocity.norm();
  return decompose_velocity(start, w, gap_tol);
}

}  // namespace gscatter
