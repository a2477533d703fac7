#pragma once

// Periodic (cyclic) tridiagonal solve via the Thomas algorithm plus a
// Sherman-Morrison corner correction.

#include <vector>

#include "thinheat/errors.hpp"

namespace thinheat {

// Solves the strictly tridiagonal system with diagonals (lo, di, up).
inline std::vector<double> solve_tridiag(std::vector<double> lo, std::vector<double> di,
                                         std::vector<double> up, std::vector<double> rhs) {
  const std::size_t n = di.size();
  for (std::size_t i = 1; i < n; ++i) {
    if (di[i - 1] == 0.0) throw SolveFailure("tridiagonal solve: zero pivot");
    double w = lo[i] / di[i - 1];
    di[i] -= w * up[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (di[n - 1] == 0.0) throw SolveFailure("tridiagonal solve: zero pivot");
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / di[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - up[i] * x[i + 1]) / di[i];
  return x;
}

// Solves A x = rhs where A is tridiagonal with wrap-around entries
// A(0, n-1) = lo[0] and A(n-1, 0) = up[n-1].
inline std::vector<double> solve_periodic_tridiag(const std::vector<double>& lo,
                                                  const std::vector<double>& di,
                                                  const std::vector<double>& up,
                                                  const std::vector<double>& rhs) {
  const std::size_t n = di.size();
  if (n < 3) throw SolveFailure("periodic tridiagonal solve: need n >= 3");
  double alpha = up[n - 1], beta = lo[0];
  double gamma = -di[0];
  std::vector<double> d2 = di;
  d2[0] = di[0] - gamma;
  d2[n - 1] = di[n - 1] - alpha * beta / gamma;
  std::vector<double> u(n, 0.0);
  u[0] = gamma;
  u[n - 1] = alpha;
  auto y = solve_tridiag(lo, d2, up, rhs);
  auto z = solve_tridiag(lo, d2, up, u);
  double denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
  if (denom == 0.0) throw SolveFailure("periodic tridiagonal solve: singular correction");
  double fact = (y[0] + beta * y[n - 1] / gamma) / denom;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = y[i] - fact * z[i];
  return x;
}

}  // namespace thinheat
