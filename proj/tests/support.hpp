#pragma once

// Shared helpers for the test binaries: file access, seeded generators for
// random systems / automata / programs, and small independent oracles.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ppscert/certificate.hpp"
#include "ppscert/ppda.hpp"
#include "ppscert/pps.hpp"
#include "ppscert/pps_parser.hpp"

#ifndef PPSCERT_MODELS_DIR
#define PPSCERT_MODELS_DIR "models"
#endif

namespace testsupport {

using namespace ppscert;

inline std::string model_path(const std::string& name) { return std::string(PPSCERT_MODELS_DIR) + "/" + name; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string read_model(const std::string& name) { return read_file(model_path(name)); }

inline PolySystem sys_of(const std::string& text) { return parse_pps(text); }

inline Rational q(long n, long d = 1) {
  Rational r(n, d);
  r.canonicalize();
  return r;
}

inline RationalVec qv(std::initializer_list<std::pair<long, long>> xs) {
  RationalVec out;
  for (auto [n, d] : xs) out.push_back(q(n, d));
  return out;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  double uniform_real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen); }
};

/// Random PPS with n variables; every equation gets a positive constant term so
/// the system is clean. With `feasible`, each row's coefficient mass is at most
/// `mass`, so f(1) <= mass < 1 and the lfp is below 1.
inline PolySystem random_system(Rng& rng, int n, int max_terms = 4, int max_degree = 2, bool feasible = true,
                                double mass = 0.9) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  std::vector<std::vector<Monomial>> eqs(n);
  const long den = 1000;
  for (int i = 0; i < n; ++i) {
    const int terms = rng.uniform_int(1, max_terms);
    std::vector<long> weights;
    long total = 0;
    for (int t = 0; t <= terms; ++t) {
      weights.push_back(rng.uniform_int(1, 100));
      total += weights.back();
    }
    const long budget = feasible ? static_cast<long>(mass * den) : 2 * den;
    for (int t = 0; t <= terms; ++t) {
      Monomial m;
      m.coefficient = q(std::max(1L, weights[t] * budget / total), den);
      if (t > 0) {
        const int deg = rng.uniform_int(1, max_degree);
        for (int k = 0; k < deg; ++k) m.factors.push_back({static_cast<VarId>(rng.uniform_int(0, n - 1)), 1});
      }
      eqs[i].push_back(m);
    }
  }
  return PolySystem(names, eqs);
}

/// Random pPDA. Every (q,Z) group is a sub-distribution; about half the groups
/// are exactly stochastic.
inline Ppda random_ppda(Rng& rng, int states, int symbols, bool allow_unit_push = true) {
  std::vector<std::string> qs, zs;
  for (int i = 0; i < states; ++i) qs.push_back("q" + std::to_string(i));
  for (int i = 0; i < symbols; ++i) zs.push_back("Z" + std::to_string(i));
  Ppda a(qs, zs);
  for (int s = 0; s < states; ++s) {
    for (int z = 0; z < symbols; ++z) {
      const int n = rng.uniform_int(0, 3);
      if (n == 0) continue;
      std::vector<long> w;
      long total = 0;
      for (int k = 0; k < n; ++k) {
        w.push_back(rng.uniform_int(1, 9));
        total += w.back();
      }
      if (!rng.coin()) total += rng.uniform_int(1, 5);  // leave some mass missing
      for (int k = 0; k < n; ++k) {
        Rule r;
        r.probability = q(w[k], total);
        r.target = static_cast<StateId>(rng.uniform_int(0, states - 1));
        int len = rng.uniform_int(0, 2);
        if (len == 1 && !allow_unit_push) len = 2;
        for (int j = 0; j < len; ++j) r.push.push_back(static_cast<SymbolId>(rng.uniform_int(0, symbols - 1)));
        a.add_rule(static_cast<StateId>(s), static_cast<SymbolId>(z), r);
      }
    }
  }
  a.set_initial({0, 0});
  return a;
}

/// Exact lfp approximation by rational Kleene iteration, for systems whose
/// iteration stabilizes (acyclic dependencies on the nonzero part).
inline RationalVec exact_kleene_until_stable(const PolySystem& sys, int max_rounds = 10000) {
  RationalVec x(sys.size(), Rational(0));
  for (int i = 0; i < max_rounds; ++i) {
    RationalVec y = evaluate(sys, x);
    if (y == x) return x;
    x = std::move(y);
  }
  throw std::runtime_error("exact Kleene iteration did not stabilize");
}

/// Float Kleene iteration to a fixed tolerance; the oracle for "lfp".
inline FloatVec float_lfp(const PolySystem& sys, double tol = 1e-14, long max_rounds = 10'000'000) {
  FloatVec x(sys.size(), 0.0);
  for (long i = 0; i < max_rounds; ++i) {
    FloatVec y = evaluate(sys, x);
    double delta = 0;
    for (std::size_t k = 0; k < x.size(); ++k) delta = std::max(delta, std::abs(y[k] - x[k]));
    x = std::move(y);
    if (delta <= tol) return x;
  }
  return x;
}

inline double to_d(const Rational& r) { return r.get_d(); }

}  // namespace testsupport
