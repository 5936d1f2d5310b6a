#include "ppscert/pps.hpp"

#include <algorithm>
#include <map>
#include <type_traits>
#include <sstream>
#include <stdexcept>

namespace ppscert {

std::uint32_t Monomial::degree() const {
  std::uint32_t d = 0;
  for (const Factor& f : factors) d += f.exponent;
  return d;
}

bool Monomial::mentions(VarId var) const { return exponent_of(var) != 0; }

std::uint32_t Monomial::exponent_of(VarId var) const {
  for (const Factor& f : factors) {
    if (f.var == var) return f.exponent;
  }
  return 0;
}

namespace {

void normalize_factors(std::vector<Factor>& factors) {
  std::sort(factors.begin(), factors.end(), [](const Factor& a, const Factor& b) { return a.var < b.var; });
  std::vector<Factor> merged;
  for (const Factor& f : factors) {
    if (f.exponent == 0) continue;
    if (!merged.empty() && merged.back().var == f.var) {
      merged.back().exponent += f.exponent;
    } else {
      merged.push_back(f);
    }
  }
  factors = std::move(merged);
}

bool monomial_order(const Monomial& a, const Monomial& b) { return a.factors < b.factors; }

template <class T>
T power(const T& base, std::uint32_t exponent) {
  T result = base;
  for (std::uint32_t i = 1; i < exponent; ++i) result *= base;
  return result;
}

template <class T>
T eval_monomial(const Monomial& m, const T& coefficient, std::span<const T> point) {
  T value = coefficient;
  for (const Factor& f : m.factors) {
    if (f.exponent == 1) {
      value *= point[f.var];
    } else {
      value *= power(point[f.var], f.exponent);
    }
  }
  return value;
}

void check_dimension(const PolySystem& sys, std::size_t n) {
  if (n != sys.size()) {
    throw std::invalid_argument("dimension mismatch: system has " + std::to_string(sys.size()) +
                                " variables, point has " + std::to_string(n));
  }
}

template <class T>
SparseMatrix<T> jacobian_impl(const PolySystem& sys, std::span<const T> point, bool use_approx) {
  check_dimension(sys, point.size());
  SparseMatrix<T> m;
  m.n = sys.size();
  m.row_start.assign(1, 0);
  std::map<VarId, T> row;
  for (VarId i = 0; i < sys.size(); ++i) {
    row.clear();
    for (const Monomial& mono : sys.equation(i)) {
      for (std::size_t k = 0; k < mono.factors.size(); ++k) {
        const Factor& fk = mono.factors[k];
        T d;
        if constexpr (std::is_same_v<T, double>) {
          d = use_approx ? mono.approx : nearest_double(mono.coefficient);
        } else {
          d = mono.coefficient;
        }
        d *= T(fk.exponent);
        if (fk.exponent > 1) d *= power(point[fk.var], fk.exponent - 1);
        for (std::size_t o = 0; o < mono.factors.size(); ++o) {
          if (o == k) continue;
          d *= power(point[mono.factors[o].var], mono.factors[o].exponent);
        }
        auto [it, inserted] = row.try_emplace(fk.var, d);
        if (!inserted) it->second += d;
      }
    }
    for (auto& [j, v] : row) {
      m.col.push_back(j);
      m.value.push_back(v);
    }
    m.row_start.push_back(m.col.size());
  }
  return m;
}

}  // namespace

PolySystem::PolySystem(std::vector<std::string> names, std::vector<std::vector<Monomial>> equations,
                       std::optional<std::uint32_t> max_degree)
    : names_(std::move(names)), equations_(std::move(equations)) {
  if (names_.size() != equations_.size()) {
    throw std::invalid_argument("need exactly one equation per variable");
  }
  for (VarId i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      throw std::invalid_argument("duplicate variable '" + names_[i] + "'");
    }
  }
  for (auto& eq : equations_) {
    for (Monomial& m : eq) {
      m.coefficient.canonicalize();
      if (sgn(m.coefficient) < 0) throw std::invalid_argument("negative coefficient");
      for (const Factor& f : m.factors) {
        if (f.var >= names_.size()) throw std::invalid_argument("variable id out of range");
      }
      normalize_factors(m.factors);
      if (max_degree && m.degree() > *max_degree) {
        throw std::invalid_argument("monomial degree " + std::to_string(m.degree()) + " exceeds cap " +
                                    std::to_string(*max_degree));
      }
    }
    std::sort(eq.begin(), eq.end(), monomial_order);
    std::vector<Monomial> merged;
    for (Monomial& m : eq) {
      if (!merged.empty() && merged.back().factors == m.factors) {
        merged.back().coefficient += m.coefficient;
      } else {
        merged.push_back(std::move(m));
      }
    }
    std::erase_if(merged, [](const Monomial& m) { return sgn(m.coefficient) == 0; });
    for (Monomial& m : merged) m.approx = nearest_double(m.coefficient);
    eq = std::move(merged);
  }
}

std::optional<VarId> PolySystem::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t PolySystem::term_count() const {
  std::size_t n = 0;
  for (const auto& eq : equations_) n += eq.size();
  return n;
}

std::uint32_t PolySystem::max_degree() const {
  std::uint32_t d = 0;
  for (const auto& eq : equations_) {
    for (const Monomial& m : eq) d = std::max(d, m.degree());
  }
  return d;
}

bool operator==(const PolySystem& a, const PolySystem& b) {
  if (a.names_ != b.names_) return false;
  for (std::size_t i = 0; i < a.equations_.size(); ++i) {
    const auto& ea = a.equations_[i];
    const auto& eb = b.equations_[i];
    if (ea.size() != eb.size()) return false;
    for (std::size_t k = 0; k < ea.size(); ++k) {
      if (ea[k].coefficient != eb[k].coefficient || ea[k].factors != eb[k].factors) return false;
    }
  }
  return true;
}

double evaluate_equation(const PolySystem& sys, VarId var, std::span<const double> point) {
  double sum = 0.0;
  for (const Monomial& m : sys.equation(var)) sum += eval_monomial<double>(m, m.approx, point);
  return sum;
}

Rational evaluate_equation(const PolySystem& sys, VarId var, std::span<const Rational> point) {
  Rational sum = 0;
  for (const Monomial& m : sys.equation(var)) sum += eval_monomial<Rational>(m, m.coefficient, point);
  return sum;
}

FloatVec evaluate(const PolySystem& sys, std::span<const double> point) {
  check_dimension(sys, point.size());
  FloatVec out(sys.size());
  for (VarId i = 0; i < sys.size(); ++i) out[i] = evaluate_equation(sys, i, point);
  return out;
}

RationalVec evaluate(const PolySystem& sys, std::span<const Rational> point) {
  check_dimension(sys, point.size());
  RationalVec out(sys.size());
  for (VarId i = 0; i < sys.size(); ++i) out[i] = evaluate_equation(sys, i, point);
  return out;
}

SparseMatrix<double> jacobian_at(const PolySystem& sys, std::span<const double> point) {
  return jacobian_impl<double>(sys, point, true);
}

SparseMatrix<Rational> jacobian_at(const PolySystem& sys, std::span<const Rational> point) {
  return jacobian_impl<Rational>(sys, point, false);
}

SparseMatrix<double> sparse_from_dense(const std::vector<std::vector<double>>& m) {
  SparseMatrix<double> s;
  s.n = m.size();
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != m.size()) throw std::invalid_argument("matrix is not square");
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (m[i][j] != 0.0) {
        s.col.push_back(static_cast<VarId>(j));
        s.value.push_back(m[i][j]);
      }
    }
    s.row_start.push_back(s.col.size());
  }
  return s;
}

bool DepGraph::has_edge(VarId from, VarId to) const {
  const auto& s = successors.at(from);
  return std::binary_search(s.begin(), s.end(), to);
}

bool DepGraph::is_trivial(std::size_t scc) const {
  const auto& members = sccs.at(scc);
  return members.size() == 1 && !has_edge(members[0], members[0]);
}

// Iterative Tarjan. SCCs are emitted when their root finishes, which is a
// reverse topological order of the condensation.
DepGraph dep_graph(const PolySystem& sys) {
  const std::size_t n = sys.size();
  DepGraph g;
  g.successors.resize(n);
  for (VarId i = 0; i < n; ++i) {
    auto& succ = g.successors[i];
    for (const Monomial& m : sys.equation(i)) {
      for (const Factor& f : m.factors) succ.push_back(f.var);
    }
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
  }

  constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<VarId> stack;
  std::vector<std::pair<VarId, std::size_t>> call;  // (node, next successor position)
  std::size_t counter = 0;
  g.scc_of.assign(n, 0);

  for (VarId root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      const auto& succ = g.successors[v];
      if (pos < succ.size()) {
        VarId w = succ[pos++];
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const VarId done = v;
      call.pop_back();
      if (!call.empty()) {
        VarId parent = call.back().first;
        low[parent] = std::min(low[parent], low[done]);
      }
      if (low[done] == index[done]) {
        std::vector<VarId> component;
        VarId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          g.scc_of[w] = g.sccs.size();
          component.push_back(w);
        } while (w != done);
        std::sort(component.begin(), component.end());
        g.sccs.push_back(std::move(component));
      }
    }
  }
  return g;
}

CleanResult clean(const PolySystem& sys) {
  const std::size_t n = sys.size();
  struct TermRef {
    VarId owner;
    std::size_t pending;
  };
  std::vector<TermRef> terms;
  std::vector<std::vector<std::size_t>> occurrences(n);
  std::vector<bool> positive(n, false);
  std::vector<VarId> queue;

  for (VarId i = 0; i < n; ++i) {
    for (const Monomial& m : sys.equation(i)) {
      const std::size_t id = terms.size();
      terms.push_back({i, m.factors.size()});
      for (const Factor& f : m.factors) occurrences[f.var].push_back(id);
      if (m.factors.empty() && !positive[i]) {
        positive[i] = true;
        queue.push_back(i);
      }
    }
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    for (std::size_t t : occurrences[queue[head]]) {
      if (--terms[t].pending == 0 && !positive[terms[t].owner]) {
        positive[terms[t].owner] = true;
        queue.push_back(terms[t].owner);
      }
    }
  }

  CleanResult result;
  std::vector<VarId> new_id(n, 0);
  for (VarId i = 0; i < n; ++i) {
    if (positive[i]) {
      new_id[i] = static_cast<VarId>(result.original_of.size());
      result.original_of.push_back(i);
    } else {
      result.zero_set.push_back(i);
    }
  }
  std::vector<std::string> names;
  std::vector<std::vector<Monomial>> equations;
  for (VarId old : result.original_of) {
    names.push_back(sys.name(old));
    std::vector<Monomial> eq;
    for (const Monomial& m : sys.equation(old)) {
      bool keep = std::all_of(m.factors.begin(), m.factors.end(), [&](const Factor& f) { return positive[f.var]; });
      if (!keep) continue;
      Monomial copy = m;
      for (Factor& f : copy.factors) f.var = new_id[f.var];
      eq.push_back(std::move(copy));
    }
    equations.push_back(std::move(eq));
  }
  result.system = PolySystem(std::move(names), std::move(equations));
  return result;
}

PolySystem restrict_to(const PolySystem& sys, std::span<const VarId> vars, std::span<const Rational> values) {
  check_dimension(sys, values.size());
  constexpr VarId outside = static_cast<VarId>(-1);
  std::vector<VarId> local(sys.size(), outside);
  for (std::size_t k = 0; k < vars.size(); ++k) local[vars[k]] = static_cast<VarId>(k);

  std::vector<std::string> names;
  std::vector<std::vector<Monomial>> equations;
  for (VarId v : vars) {
    names.push_back(sys.name(v));
    std::vector<Monomial> eq;
    for (const Monomial& m : sys.equation(v)) {
      Monomial out;
      out.coefficient = m.coefficient;
      for (const Factor& f : m.factors) {
        if (local[f.var] != outside) {
          out.factors.push_back({local[f.var], f.exponent});
        } else {
          out.coefficient *= power(values[f.var], f.exponent);
        }
      }
      eq.push_back(std::move(out));
    }
    equations.push_back(std::move(eq));
  }
  return PolySystem(std::move(names), std::move(equations));
}

std::string to_text(const PolySystem& sys) {
  std::ostringstream out;
  for (VarId i = 0; i < sys.size(); ++i) {
    out << sys.name(i) << " =";
    bool first = true;
    for (const Monomial& m : sys.equation(i)) {
      out << (first ? " " : " + ") << to_compact_string(m.coefficient);
      first = false;
      for (const Factor& f : m.factors) {
        out << ' ' << sys.name(f.var);
        if (f.exponent != 1) out << '^' << f.exponent;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace ppscert
