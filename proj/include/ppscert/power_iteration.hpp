#pragma once

#include <cstddef>
#include <span>

#include "ppscert/pps.hpp"

namespace ppscert {

struct EigenEstimate {
  /// Max-norm normalized; the largest entry is exactly 1.
  FloatVec vector;
  /// ||(M+I)v||_inf - 1 at the returned v.
  double eigenvalue = 0.0;
  /// ||Mv - eigenvalue * v||_inf.
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

inline constexpr std::size_t default_power_iteration_cap = 100000;

/// Power iteration on M + I, which converges to the Perron-Frobenius eigenvector
/// of an irreducible non-negative M regardless of its period. Stops when two
/// successive normalized iterates are within tol in max-norm; on hitting the cap
/// the current estimate is returned with converged = false.
EigenEstimate approx_eigenvec(const SparseMatrix<double>& m, double tol, std::span<const double> init = {},
                              std::size_t max_iterations = default_power_iteration_cap);

double max_row_sum(const SparseMatrix<double>& m);

/// Collatz-Wielandt: min_i (Mv)_i / v_i, a lower bound on the spectral radius
/// of a non-negative M for any v > 0. Returns 0 if some v_i <= 0.
double perron_lower_bound(const SparseMatrix<double>& m, std::span<const double> v);

}  // namespace ppscert
