#pragma once

#include <cstdint>
#include <limits>
#include <span>

#include "ppscert/pps.hpp"

namespace ppscert {

enum class UpdateKind { GaussSeidel, Kleene };

/// Any iterate component above this aborts the solve as Infeasible.
inline constexpr double divergence_threshold = 1e12;

/// l -> f(l).
FloatVec kleene_step(const PolySystem& sys, std::span<const double> l);

/// One in-order sweep: x_i = f_i(x) using the components j < i already updated.
FloatVec gauss_seidel_step(const PolySystem& sys, std::span<const double> l);

FloatVec update_step(const PolySystem& sys, std::span<const double> l, UpdateKind kind);

/// Throws Infeasible when some component is non-finite or above divergence_threshold.
void check_divergence(std::span<const double> l);

struct IterState {
  FloatVec current;
  std::uint64_t rounds = 0;
  double last_delta = std::numeric_limits<double>::infinity();

  static IterState zero(std::size_t n) { return IterState{FloatVec(n, 0.0), 0, std::numeric_limits<double>::infinity()}; }
};

/// Applies update steps until the max-norm change of one step is <= tol.
/// Throws BudgetExhausted after `budget` steps, Infeasible on divergence.
IterState improve_until(const PolySystem& sys, IterState state, double tol, std::uint64_t budget,
                        UpdateKind kind = UpdateKind::GaussSeidel);

double max_norm_distance(std::span<const double> a, std::span<const double> b);

}  // namespace ppscert
