#pragma once

#include <stdexcept>
#include <string>

namespace gscatter {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input lies outside the domain of the operation (not SPD, singular,
/// ill-conditioned, rank deficient).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The caller combined arguments in an unsupported way (mismatched base
/// points, missing Monte Carlo size, wrong dimensions).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// The M-equation has no solution for the given data.
class ExistenceError : public Error {
 public:
  using Error::Error;
};

/// The linearization used for the limiting covariance is singular on the
/// relevant subspace.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// No escape direction can be extracted from a sequence of iterates.
class EmptyFlagError : public Error {
 public:
  using Error::Error;
};

/// File or parse failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace gscatter
