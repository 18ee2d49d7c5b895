#pragma once

#include <cstddef>
#include <vector>

namespace tempofeat {

/// Solve A x = b for symmetric positive definite A (row-major n x n).
/// Returns false when a pivot drops below tol (A not positive definite).
bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                    std::vector<double>& out, double tol = 1e-12);

/// Gauss-Jordan with partial pivoting for possibly singular but consistent
/// systems: columns whose pivot vanishes get x = 0. Returns false when the
/// system is inconsistent (a zero row with a non-negligible right-hand side).
bool gauss_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& out, double rel_tol = 1e-10);

}  // namespace tempofeat
