#include "ppscert/power_iteration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ppscert {

namespace {

// out = (M + I) v
void shifted_multiply(const SparseMatrix<double>& m, std::span<const double> v, FloatVec& out) {
  for (std::size_t i = 0; i < m.n; ++i) {
    double s = v[i];
    for (std::size_t k = m.row_start[i]; k < m.row_start[i + 1]; ++k) s += m.value[k] * v[m.col[k]];
    out[i] = s;
  }
}

double max_abs(std::span<const double> v) {
  double r = 0.0;
  for (double x : v) r = std::max(r, std::abs(x));
  return r;
}

}  // namespace

double max_row_sum(const SparseMatrix<double>& m) {
  double best = 0.0;
  for (std::size_t i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (std::size_t k = m.row_start[i]; k < m.row_start[i + 1]; ++k) s += std::abs(m.value[k]);
    best = std::max(best, s);
  }
  return best;
}

double perron_lower_bound(const SparseMatrix<double>& m, std::span<const double> v) {
  if (v.size() != m.n) throw std::invalid_argument("dimension mismatch");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m.n; ++i) {
    if (!(v[i] > 0.0)) return 0.0;
    double s = 0.0;
    for (std::size_t k = m.row_start[i]; k < m.row_start[i + 1]; ++k) s += m.value[k] * v[m.col[k]];
    best = std::min(best, s / v[i]);
  }
  return m.n == 0 ? 0.0 : best;
}

EigenEstimate approx_eigenvec(const SparseMatrix<double>& m, double tol, std::span<const double> init,
                              std::size_t max_iterations) {
  const std::size_t n = m.n;
  if (n == 0) throw std::invalid_argument("eigenvector of an empty matrix");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");

  EigenEstimate est;
  est.vector.assign(n, 1.0);
  if (!init.empty()) {
    if (init.size() != n) throw std::invalid_argument("initial vector has wrong dimension");
    double norm = max_abs(init);
    if (norm > 0.0 && std::isfinite(norm)) {
      for (std::size_t i = 0; i < n; ++i) est.vector[i] = init[i] / norm;
    }
  }

  FloatVec next(n);
  FloatVec& v = est.vector;
  double prev_delta = std::numeric_limits<double>::infinity();
  while (est.iterations < max_iterations) {
    shifted_multiply(m, v, next);
    const double norm = max_abs(next);
    for (double& x : next) x /= norm;
    ++est.iterations;
    const double delta = [&] {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(next[i] - v[i]));
      return d;
    }();
    v.swap(next);
    // distance to the limit, assuming geometric convergence at the observed rate
    const double rate = delta / prev_delta;
    prev_delta = delta;
    const bool settled = delta == 0.0 || (rate < 1.0 && delta * rate / (1.0 - rate) <= tol);
    if (delta <= tol && settled) {
      est.converged = true;
      break;
    }
  }

  // Renormalize so the maximum is exactly 1, then report the eigenpair of this v.
  const double norm = max_abs(v);
  for (double& x : v) x /= norm;
  shifted_multiply(m, v, next);
  est.eigenvalue = max_abs(next) - 1.0;
  est.residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    // (M+I)v - (lambda+1)v = Mv - lambda v
    est.residual = std::max(est.residual, std::abs(next[i] - (est.eigenvalue + 1.0) * v[i]));
  }
  return est;
}

}  // namespace ppscert
