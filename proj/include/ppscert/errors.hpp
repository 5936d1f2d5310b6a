#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ppscert {

/// Final state of a certification run.
enum class Outcome { Certified, GuessBudgetExhausted, Infeasible, ExactCheckFailed };

std::string_view to_string(Outcome outcome);

/// Syntax or static-semantics error in an input file, with 1-based location.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// Base of all solver failures. Carries the outcome tag reported by the CLI and,
/// when known, the index of the SCC (in solving order) that failed.
class SolveError : public std::runtime_error {
public:
  SolveError(Outcome outcome, const std::string& message);

  Outcome outcome() const { return outcome_; }
  const std::optional<std::size_t>& scc() const { return scc_; }
  void set_scc(std::size_t scc) { scc_ = scc; }

private:
  Outcome outcome_;
  std::optional<std::size_t> scc_;
};

/// Lower-bound iteration diverged (lfp has an infinite component).
class Infeasible : public SolveError {
public:
  explicit Infeasible(const std::string& message) : SolveError(Outcome::Infeasible, message) {}
};

/// No inductive guess was found within the allowed number of guess rounds.
class GuessBudgetExhausted : public SolveError {
public:
  GuessBudgetExhausted(const std::string& message, double spectral_radius_estimate = -1.0)
      : SolveError(Outcome::GuessBudgetExhausted, message), rho_(spectral_radius_estimate) {}

  /// Estimate of rho(f'(l)) at the last lower bound, or -1 if none was computed.
  double spectral_radius_estimate() const { return rho_; }

private:
  double rho_;
};

/// A float-inductive candidate could not be validated in exact arithmetic.
class ExactCheckFailed : public SolveError {
public:
  explicit ExactCheckFailed(const std::string& message)
      : SolveError(Outcome::ExactCheckFailed, message) {}
};

/// improve_until ran out of steps before reaching the requested tolerance.
class BudgetExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ppscert
