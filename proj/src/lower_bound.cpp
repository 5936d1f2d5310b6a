#include "ppscert/lower_bound.hpp"

#include <cmath>
#include <stdexcept>

#include "ppscert/errors.hpp"

namespace ppscert {

FloatVec kleene_step(const PolySystem& sys, std::span<const double> l) { return evaluate(sys, l); }

FloatVec gauss_seidel_step(const PolySystem& sys, std::span<const double> l) {
  if (l.size() != sys.size()) throw std::invalid_argument("dimension mismatch");
  FloatVec x(l.begin(), l.end());
  for (VarId i = 0; i < sys.size(); ++i) x[i] = evaluate_equation(sys, i, x);
  return x;
}

FloatVec update_step(const PolySystem& sys, std::span<const double> l, UpdateKind kind) {
  return kind == UpdateKind::Kleene ? kleene_step(sys, l) : gauss_seidel_step(sys, l);
}

void check_divergence(std::span<const double> l) {
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (!std::isfinite(l[i]) || l[i] > divergence_threshold) {
      throw Infeasible("lower bound diverges at component " + std::to_string(i));
    }
  }
}

double max_norm_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

IterState improve_until(const PolySystem& sys, IterState state, double tol, std::uint64_t budget, UpdateKind kind) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (budget == 0) throw std::invalid_argument("budget must be positive");
  for (std::uint64_t used = 0; used < budget; ++used) {
    FloatVec next = update_step(sys, state.current, kind);
    check_divergence(next);
    state.last_delta = max_norm_distance(state.current, next);
    state.current = std::move(next);
    ++state.rounds;
    if (state.last_delta <= tol) return state;
  }
  throw BudgetExhausted("no convergence to tolerance " + std::to_string(tol) + " within " +
                        std::to_string(budget) + " steps");
}

}  // namespace ppscert
