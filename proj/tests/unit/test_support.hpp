#pragma once

#include <string>

#include <gtest/gtest.h>

#include "gscatter/grassmann.hpp"
#include "gscatter/manifold.hpp"

namespace gscatter::testing {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// n atoms whose bases have i.i.d. standard normal entries.
EmpiricalMeasure random_measure(Eigen::Index m, Eigen::Index r, std::size_t n, Rng& rng);

/// Line through (cos a, sin a).
SubspacePoint line2(double angle);

EmpiricalMeasure three_lines();
EmpiricalMeasure orthogonal_lines();

/// Lines in the plane x₃ = 0 of ℝ³.
EmpiricalMeasure planar_lines();

std::string data_path(const std::string& relative);

::testing::AssertionResult matrix_near(const Matrix& a, const Matrix& b, double tol);

}  // namespace gscatter::testing
