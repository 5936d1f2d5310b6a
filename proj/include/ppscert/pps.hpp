#pragma once

// Positive polynomial systems x = f(x): sparse representation, evaluation,
// Jacobians, dependency graphs, cleaning and SCC-restricted subsystems.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ppscert/rational.hpp"

namespace ppscert {

using VarId = std::uint32_t;
using FloatVec = std::vector<double>;
using RationalVec = std::vector<Rational>;

struct Factor {
  VarId var = 0;
  std::uint32_t exponent = 1;

  friend bool operator==(const Factor&, const Factor&) = default;
  friend auto operator<=>(const Factor&, const Factor&) = default;
};

/// coefficient * prod(x_var ^ exponent). Factors are sorted by variable and
/// each variable occurs at most once once the monomial is inside a PolySystem.
struct Monomial {
  Rational coefficient;
  std::vector<Factor> factors;
  /// binary64 view of the coefficient, filled in by PolySystem.
  double approx = 0.0;

  std::uint32_t degree() const;
  bool mentions(VarId var) const;
  std::uint32_t exponent_of(VarId var) const;
};

class PolySystem {
public:
  PolySystem() = default;

  /// Normalizes every equation: repeated factors are merged, like monomials are
  /// summed, zero-coefficient monomials are dropped and the rest is sorted.
  /// Throws std::invalid_argument on a negative coefficient, an out-of-range
  /// variable, duplicate names, or a monomial above max_degree.
  PolySystem(std::vector<std::string> names, std::vector<std::vector<Monomial>> equations,
             std::optional<std::uint32_t> max_degree = std::nullopt);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(VarId var) const { return names_.at(var); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<VarId> find(std::string_view name) const;

  std::span<const Monomial> equation(VarId var) const { return equations_.at(var); }
  std::size_t term_count() const;
  std::uint32_t max_degree() const;

  friend bool operator==(const PolySystem& a, const PolySystem& b);

private:
  std::vector<std::string> names_;
  std::vector<std::vector<Monomial>> equations_;
  std::unordered_map<std::string, VarId> index_;
};

double evaluate_equation(const PolySystem& sys, VarId var, std::span<const double> point);
Rational evaluate_equation(const PolySystem& sys, VarId var, std::span<const Rational> point);

/// f(point). Throws std::invalid_argument on dimension mismatch.
FloatVec evaluate(const PolySystem& sys, std::span<const double> point);
RationalVec evaluate(const PolySystem& sys, std::span<const Rational> point);

/// Square matrix in compressed-row form; entries absent from a row are zero.
template <class T>
struct SparseMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> row_start{0};
  std::vector<VarId> col;
  std::vector<T> value;

  std::size_t nonzeros() const { return col.size(); }
  T at(std::size_t i, std::size_t j) const {
    for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) {
      if (col[k] == j) return value[k];
    }
    return T(0);
  }
  std::vector<std::vector<T>> dense() const {
    std::vector<std::vector<T>> m(n, std::vector<T>(n, T(0)));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = row_start[i]; k < row_start[i + 1]; ++k) m[i][col[k]] = value[k];
    }
    return m;
  }
};

SparseMatrix<double> sparse_from_dense(const std::vector<std::vector<double>>& m);

/// Entry (i,j) = d f_i / d x_j at point. Every dependency edge gets a stored entry,
/// even if it evaluates to zero at this point.
SparseMatrix<double> jacobian_at(const PolySystem& sys, std::span<const double> point);
SparseMatrix<Rational> jacobian_at(const PolySystem& sys, std::span<const Rational> point);

struct DepGraph {
  /// successors[i] = sorted variables f_i depends on.
  std::vector<std::vector<VarId>> successors;
  /// SCCs in reverse topological order: dependees come first.
  std::vector<std::vector<VarId>> sccs;
  std::vector<std::size_t> scc_of;

  bool has_edge(VarId from, VarId to) const;
  /// Single variable without a self-loop.
  bool is_trivial(std::size_t scc) const;
};

DepGraph dep_graph(const PolySystem& sys);

struct CleanResult {
  PolySystem system;
  /// Variables (original ids, ascending) whose lfp component is 0.
  std::vector<VarId> zero_set;
  /// original_of[new id] = original id.
  std::vector<VarId> original_of;
};

CleanResult clean(const PolySystem& sys);

/// Subsystem over `vars` (in the given order). Every other variable is replaced by
/// its entry in `values`, folding it into the coefficient exactly.
PolySystem restrict_to(const PolySystem& sys, std::span<const VarId> vars, std::span<const Rational> values);

/// Canonical text: one `name = term + term` line per variable in declaration order,
/// coefficients as lowest-terms fractions. Parses back with parse_pps.
std::string to_text(const PolySystem& sys);

}  // namespace ppscert
