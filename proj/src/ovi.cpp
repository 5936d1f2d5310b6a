#include "ppscert/ovi.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>

#include "ppscert/errors.hpp"
#include "ppscert/power_iteration.hpp"

namespace ppscert {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

std::string_view to_string(GuessStrategy strategy) {
  return strategy == GuessStrategy::Eigenvector ? "eigenvector" : "relative";
}

void OviParams::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw std::invalid_argument("c must lie in (0,1)");
  if (!(d > 0.0 && d < 1.0)) throw std::invalid_argument("d must lie in (0,1)");
  if (sgn(epsilon) <= 0) throw std::invalid_argument("epsilon must be positive");
  if (max_guess_rounds < 1) throw std::invalid_argument("max guess rounds must be at least 1");
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  if (iteration_budget == 0) throw std::invalid_argument("iteration budget must be positive");
  if (grain.denominator_bound < 2) throw std::invalid_argument("denominator bound must be at least 2");
  if (sgn(grain.headroom) < 0) throw std::invalid_argument("headroom must be non-negative");
}

FloatVec guess(std::span<const double> l, std::span<const double> v, double epsilon, double d, int k) {
  if (l.size() != v.size()) throw std::invalid_argument("dimension mismatch");
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  const double scale = std::pow(d, k) * epsilon;
  FloatVec u(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) u[i] = l[i] + scale * v[i];
  return u;
}

FloatVec relative_guess(std::span<const double> l, double epsilon, double d, int k) {
  if (k < 0) throw std::invalid_argument("k must be non-negative");
  const double factor = 1.0 + std::pow(d, k) * epsilon;
  FloatVec u(l.size());
  for (std::size_t i = 0; i < l.size(); ++i) u[i] = factor * l[i];
  return u;
}

double tolerance_for_round(double epsilon, double c, int round) { return std::pow(c, round) * epsilon; }

bool float_inductive(const PolySystem& sys, std::span<const double> u) {
  for (VarId i = 0; i < sys.size(); ++i) {
    if (!(evaluate_equation(sys, i, u) <= u[i])) return false;
  }
  return true;
}

SccSolution ovi_scc(const PolySystem& sys, const OviParams& params, double initial_tolerance) {
  params.validate();
  const std::size_t n = sys.size();
  if (n == 0) throw std::invalid_argument("empty system");
  const double eps = nearest_double(params.epsilon);
  const double tau0 = initial_tolerance > 0.0 ? initial_tolerance : eps;

  SccSolution sol;
  sol.strategy_used = params.strategy;

  // Theorem 3: for a feasible clean strongly connected system, rho(f'(u)) < 1
  // for every u below the lfp. A linear SCC has a constant Jacobian, so
  // rho >= 1 there means the lfp is infinite.
  if (sys.max_degree() <= 1) {
    const auto m = jacobian_at(sys, FloatVec(n, 0.0));
    const EigenEstimate est = approx_eigenvec(m, 1e-12);
    const double rho_low = perron_lower_bound(m, est.vector);
    if (rho_low >= 1.0 - 1e-10) {
      throw Infeasible("linear component with spectral radius >= " + std::to_string(rho_low) +
                       ": the least fixpoint is infinite");
    }
  }
  FloatVec l(n, 0.0);
  FloatVec direction(n, 1.0);
  int rounds = 0;  // N
  double tau = tau0;

  while (true) {
    if (sol.lower_steps >= params.iteration_budget) {
      throw GuessBudgetExhausted("lower-bound iteration budget of " + std::to_string(params.iteration_budget) +
                                     " steps exhausted after " + std::to_string(sol.guesses_used) + " guess rounds",
                                 sol.rho_estimate);
    }
    FloatVec next = update_step(sys, l, params.update);
    ++sol.lower_steps;
    check_divergence(next);

    const bool settled = max_norm_distance(l, next) <= tau;
    l = std::move(next);
    if (settled) {
      ++sol.guesses_used;
      if (params.strategy == GuessStrategy::Eigenvector) {
        const auto jac = jacobian_at(sys, l);
        EigenEstimate est = approx_eigenvec(jac, tau, direction);
        const double rho_low = perron_lower_bound(jac, est.vector);
        if (rho_low > 1.0 + 1e-9) {
          throw Infeasible("spectral radius of f'(l) is at least " + std::to_string(rho_low) +
                           " > 1 below the least fixpoint, so the least fixpoint is infinite");
        }
        direction = std::move(est.vector);
        sol.rho_estimate = est.eigenvalue;
        sol.power_iterations += est.iterations;
      }
      for (int k = 0; k <= rounds; ++k) {
        FloatVec u = params.strategy == GuessStrategy::Eigenvector ? guess(l, direction, eps, params.d, k)
                                                                   : relative_guess(l, eps, params.d, k);
        if (float_inductive(sys, u)) {
          sol.lower = std::move(l);
          sol.upper = std::move(u);
          return sol;
        }
      }
      ++rounds;
      if (rounds >= params.max_guess_rounds) {
        std::string msg = "no inductive guess after " + std::to_string(rounds) + " rounds";
        if (sol.rho_estimate >= 0.0) {
          msg += "; spectral radius estimate of f'(l) is " + std::to_string(sol.rho_estimate);
          if (sol.rho_estimate > 0.99) msg += " (close to 1: I - f'(lfp) is likely singular)";
        }
        throw GuessBudgetExhausted(msg, sol.rho_estimate);
      }
      tau = tolerance_for_round(tau0, params.c, rounds);
    }
  }
}

namespace {

struct SolverState {
  const PolySystem& system;  // cleaned
  const DepGraph& graph;
  const OviParams& params;
  RationalVec upper;
  FloatVec lower;
  std::vector<int> k_used;
  std::vector<SccReport> reports;
};

void solve_scc(SolverState& st, std::size_t s) {
  const auto start = Clock::now();
  const auto& vars = st.graph.sccs[s];
  SccReport& rep = st.reports[s];
  rep.index = s;
  rep.size = vars.size();
  rep.trivial = st.graph.is_trivial(s);

  if (rep.trivial) {
    const VarId v = vars[0];
    const auto exact_start = Clock::now();
    Rational exact = evaluate_equation(st.system, v, std::span<const Rational>(st.upper));
    st.upper[v] = round_up_bounded(exact, st.params.grain.denominator_bound);
    rep.exact_ms = elapsed_ms(exact_start);
    st.lower[v] = evaluate_equation(st.system, v, std::span<const double>(st.lower));
    st.k_used[s] = 1;
    rep.gap = st.upper[v].get_d() - st.lower[v];
    rep.total_ms = elapsed_ms(start);
    return;
  }

  const PolySystem sub = restrict_to(st.system, vars, st.upper);
  double tau0 = 0.0;
  for (int attempt = 0;; ++attempt) {
    SccSolution sol = ovi_scc(sub, st.params, tau0);
    rep.guesses += sol.guesses_used;
    rep.lower_steps += sol.lower_steps;
    rep.power_iterations += sol.power_iterations;
    rep.rho_estimate = sol.rho_estimate;

    const auto exact_start = Clock::now();
    auto validated = validate_candidate(sub, sol.upper, st.params.grain, st.params.k_max);
    rep.exact_ms += elapsed_ms(exact_start);
    if (validated) {
      rep.k_used = validated->k_used;
      st.k_used[s] = validated->k_used;
      rep.gap = 0.0;
      for (std::size_t i = 0; i < vars.size(); ++i) {
        st.upper[vars[i]] = validated->upper[i];
        st.lower[vars[i]] = sol.lower[i];
        rep.gap = std::max(rep.gap, validated->upper[i].get_d() - sol.lower[i]);
      }
      break;
    }
    if (attempt == 1) {
      throw ExactCheckFailed("float-inductive bound failed exact verification (after k-induction up to depth " +
                             std::to_string(st.params.k_max) + " and one retry)");
    }
    ++rep.retries;
    tau0 = st.params.c * nearest_double(st.params.epsilon);
  }
  rep.total_ms = elapsed_ms(start);
}

}  // namespace

SolveResult solve(const PolySystem& sys, const OviParams& params, unsigned jobs) {
  params.validate();
  const auto start = Clock::now();
  SolveResult result;

  const CleanResult cleaned = clean(sys);
  const DepGraph graph = dep_graph(cleaned.system);
  const std::size_t m = cleaned.system.size();
  const std::size_t scc_count = graph.sccs.size();

  SolverState st{cleaned.system, graph, params, RationalVec(m), FloatVec(m, 0.0),
                 std::vector<int>(scc_count, 1), std::vector<SccReport>(scc_count)};

  // Level = 1 + max level of dependee SCCs; SCCs on one level are independent.
  std::vector<std::size_t> level(scc_count, 0);
  std::size_t max_level = 0;
  for (std::size_t s = 0; s < scc_count; ++s) {
    for (VarId v : graph.sccs[s]) {
      for (VarId w : graph.successors[v]) {
        const std::size_t t = graph.scc_of[w];
        if (t != s) level[s] = std::max(level[s], level[t] + 1);
      }
    }
    max_level = std::max(max_level, level[s]);
  }
  std::vector<std::vector<std::size_t>> by_level(scc_count == 0 ? 0 : max_level + 1);
  for (std::size_t s = 0; s < scc_count; ++s) by_level[level[s]].push_back(s);

  const unsigned workers = std::max(1u, jobs);
  for (const auto& batch : by_level) {
    std::vector<std::exception_ptr> errors(batch.size());
    auto run = [&](std::size_t b) {
      try {
        solve_scc(st, batch[b]);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    };
    if (workers == 1 || batch.size() == 1) {
      for (std::size_t b = 0; b < batch.size(); ++b) run(b);
    } else {
      std::atomic<std::size_t> cursor{0};
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < std::min<std::size_t>(workers, batch.size()); ++w) {
        pool.emplace_back([&] {
          for (std::size_t b = cursor++; b < batch.size(); b = cursor++) run(b);
        });
      }
      for (auto& t : pool) t.join();
    }
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (!errors[b]) continue;
      try {
        std::rethrow_exception(errors[b]);
      } catch (SolveError& e) {
        e.set_scc(batch[b]);
        throw;
      }
    }
  }

  Certificate& cert = result.certificate;
  cert.system_fingerprint = system_fingerprint(sys);
  cert.names = sys.names();
  cert.epsilon = params.epsilon;
  cert.upper.assign(sys.size(), Rational(0));
  cert.lower_witness.assign(sys.size(), 0.0);
  cert.provenance.assign(sys.size(), Provenance{ProvenanceKind::ZeroCleaned, 0});
  for (VarId v = 0; v < m; ++v) {
    const VarId orig = cleaned.original_of[v];
    const std::size_t s = graph.scc_of[v];
    cert.upper[orig] = st.upper[v];
    cert.lower_witness[orig] = st.lower[v];
    cert.provenance[orig] = Provenance{graph.is_trivial(s) ? ProvenanceKind::Trivial : ProvenanceKind::OviScc, s};
    result.gap = std::max(result.gap, st.upper[v].get_d() - st.lower[v]);
  }
  cert.k_used = scc_count == 0 ? 1 : *std::max_element(st.k_used.begin(), st.k_used.end());

  const auto exact_start = Clock::now();
  const KInduction global = k_induction_check(sys, cert.upper, cert.k_used);
  const double final_check_ms = elapsed_ms(exact_start);
  if (!global.holds) throw ExactCheckFailed("assembled certificate failed the global exact check");
  cert.k_used = global.k_used;

  result.zero_variables = cleaned.zero_set.size();
  result.sccs = std::move(st.reports);
  result.exact_ms = final_check_ms;
  for (const SccReport& r : result.sccs) result.exact_ms += r.exact_ms;
  result.total_ms = elapsed_ms(start);
  return result;
}

}  // namespace ppscert
