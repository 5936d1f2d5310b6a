#pragma once

// Optimistic value iteration for a single strongly connected clean system, and
// the whole-system driver that cleans, decomposes into SCCs and solves them
// bottom-up with verified upper bounds of lower SCCs substituted as constants.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ppscert/certificate.hpp"
#include "ppscert/lower_bound.hpp"
#include "ppscert/pps.hpp"

namespace ppscert {

enum class GuessStrategy { Eigenvector, Relative };

std::string_view to_string(GuessStrategy strategy);

struct OviParams {
  Rational epsilon{1, 1000};
  double c = 0.1;
  double d = 0.5;
  int max_guess_rounds = 10;
  GuessStrategy strategy = GuessStrategy::Eigenvector;
  UpdateKind update = UpdateKind::GaussSeidel;
  std::uint64_t iteration_budget = 10'000'000;
  int k_max = 10;
  RoundingGrain grain;

  /// Throws std::invalid_argument unless 0<c<1, 0<d<1, epsilon>0, rounds>=1, k_max>=1.
  void validate() const;
};

/// l + d^k * epsilon * v.
FloatVec guess(std::span<const double> l, std::span<const double> v, double epsilon, double d, int k);

/// (1 + d^k * epsilon) * l, the relative update rule of standard OVI.
FloatVec relative_guess(std::span<const double> l, double epsilon, double d, int k);

/// Tolerance used in guess round r (0-based): c^r * epsilon.
double tolerance_for_round(double epsilon, double c, int round);

/// f(u) <= u in binary64, no slack.
bool float_inductive(const PolySystem& sys, std::span<const double> u);

struct SccSolution {
  FloatVec lower;
  FloatVec upper;
  /// Number of guess rounds entered (each round computes one direction).
  int guesses_used = 0;
  GuessStrategy strategy_used = GuessStrategy::Eigenvector;
  std::uint64_t lower_steps = 0;
  std::uint64_t power_iterations = 0;
  /// Eigenvalue estimate of f'(l) at the last round, -1 if never computed.
  double rho_estimate = -1.0;
};

/// One strongly connected clean system. `initial_tolerance` <= 0 means epsilon.
/// Throws GuessBudgetExhausted or Infeasible.
SccSolution ovi_scc(const PolySystem& sys, const OviParams& params, double initial_tolerance = 0.0);

struct SccReport {
  std::size_t index = 0;
  std::size_t size = 0;
  bool trivial = false;
  int guesses = 0;
  std::uint64_t lower_steps = 0;
  std::uint64_t power_iterations = 0;
  int k_used = 1;
  int retries = 0;
  double gap = 0.0;
  double rho_estimate = -1.0;
  double exact_ms = 0.0;
  double total_ms = 0.0;
};

struct SolveResult {
  Certificate certificate;
  std::vector<SccReport> sccs;
  std::size_t zero_variables = 0;
  /// Max over variables of upper - lower (float), against the substituted subsystems.
  double gap = 0.0;
  double exact_ms = 0.0;
  double total_ms = 0.0;
};

/// Clean, decompose, solve SCCs in reverse topological order, verify exactly.
/// With jobs > 1, SCCs whose dependees are all finished are solved concurrently;
/// results do not depend on jobs. Throws SolveError subclasses (scc() set).
SolveResult solve(const PolySystem& sys, const OviParams& params, unsigned jobs = 1);

}  // namespace ppscert
