#pragma once

#include <functional>

#include "gscatter/types.hpp"

namespace gscatter::linalg {

/// (M + Mᵀ) / 2.
Matrix symmetrize(const Matrix& m);

/// Applies a scalar function to the spectrum of a symmetric matrix:
/// Q f(Λ) Qᵀ. The input is symmetrized first.
Matrix spectral_apply(const Matrix& s, const std::function<double(double)>& f);

Matrix sym_exp(const Matrix& s);
/// Requires a positive-definite argument; throws DomainError otherwise.
Matrix sym_log(const Matrix& s);
Matrix sym_sqrt(const Matrix& s);
/// S^p for SPD S and real p.
Matrix sym_pow(const Matrix& s, double p);

/// Inverse of an SPD matrix via Cholesky. Throws DomainError if not PD.
Matrix spd_inverse(const Matrix& s);

/// Number of singular values above rel_tol * largest singular value.
int numerical_rank(const Matrix& a, double rel_tol);

/// Orthonormal basis of the column span of `a` (left singular vectors above
/// the relative cutoff).
Matrix orthonormal_basis(const Matrix& a, double rel_tol);

/// Orthonormal basis of the orthogonal complement of the column span.
Matrix orthogonal_complement(const Matrix& a, double rel_tol);

/// Column-major stacking, so that vec(A X B) = kron(Bᵀ, A) vec(X).
Vector vec(const Matrix& m);
Matrix unvec(const Vector& v, Eigen::Index rows);
Matrix kron(const Matrix& a, const Matrix& b);

/// Moore-Penrose pseudo-inverse; singular values below
/// rel_cutoff * largest are treated as zero.
Matrix pinv(const Matrix& a, double rel_cutoff);

}  // namespace gscatter::linalg
