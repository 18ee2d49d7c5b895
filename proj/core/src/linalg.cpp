#include "tempofeat/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace tempofeat {

bool cholesky_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                    std::vector<double>& out, double tol) {
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i * n + i]));
  const double floor = tol * std::max(scale, 1.0);

  // in-place lower Cholesky
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (d <= floor) return false;
    const double root = std::sqrt(d);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / root;
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * b[k];
    b[ii] = s / a[ii * n + ii];
  }
  out = std::move(b);
  return true;
}

bool gauss_solve(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& out, double rel_tol) {
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  double b_scale = 0.0;
  for (double v : b) b_scale = std::max(b_scale, std::abs(v));
  const double piv_floor = rel_tol * std::max(scale, 1.0);
  const double rhs_floor = rel_tol * std::max({b_scale, scale, 1.0});

  std::vector<std::size_t> pivot_row(n, SIZE_MAX);
  std::vector<bool> row_used(n, false);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = SIZE_MAX;
    double best_abs = piv_floor;
    for (std::size_t r = 0; r < n; ++r) {
      if (row_used[r]) continue;
      const double v = std::abs(a[r * n + col]);
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best == SIZE_MAX) continue;  // free column
    row_used[best] = true;
    pivot_row[col] = best;
    const double inv = 1.0 / a[best * n + col];
    for (std::size_t c = 0; c < n; ++c) a[best * n + c] *= inv;
    b[best] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == best) continue;
      const double f = a[r * n + col];
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n; ++c) a[r * n + c] -= f * a[best * n + c];
      b[r] -= f * b[best];
    }
  }

  // rows never used as pivots must have ~zero residual for consistency
  for (std::size_t r = 0; r < n; ++r)
    if (!row_used[r] && std::abs(b[r]) > rhs_floor) return false;

  out.assign(n, 0.0);
  for (std::size_t col = 0; col < n; ++col)
    if (pivot_row[col] != SIZE_MAX) out[col] = b[pivot_row[col]];
  return true;
}

}  // namespace tempofeat
