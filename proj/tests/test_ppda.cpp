#include <cmath>
#include <cstdio>

#include "doctest.h"
#include "ppscert/errors.hpp"
#include "ppscert/ovi.hpp"
#include "ppscert/ppda.hpp"
#include "support.hpp"

using namespace ppscert;
using namespace testsupport;

namespace {

Ppda delta_ex() { return parse_ppda(read_model("delta_ex.ppda")); }

Certificate cert_for(const PolySystem& sys, RationalVec u) {
  Certificate c;
  c.system_fingerprint = system_fingerprint(sys);
  c.names = sys.names();
  c.upper = std::move(u);
  return c;
}

struct SimResult {
  long hits = 0;
  long capped = 0;
};

// Runs the automaton from its initial configuration until it enters `target`
// (hit), empties the stack, gets stuck on missing mass, or hits the step cap.
SimResult simulate_reach(const Ppda& a, StateId target, long runs, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<std::vector<std::pair<double, const Rule*>>>> table(a.state_count());
  for (StateId q = 0; q < a.state_count(); ++q) {
    table[q].resize(a.symbol_count());
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      double acc = 0;
      for (const Rule& r : a.rules(q, z)) {
        acc += r.probability.get_d();
        table[q][z].emplace_back(acc, &r);
      }
    }
  }
  SimResult out;
  std::vector<SymbolId> stack;
  for (long run = 0; run < runs; ++run) {
    StateId q = a.initial()->state;
    stack.assign(1, a.initial()->symbol);
    long steps = 0;
    for (;;) {
      if (q == target) {
        ++out.hits;
        break;
      }
      if (stack.empty()) break;
      if (++steps > 10000) {
        ++out.capped;
        break;
      }
      const SymbolId z = stack.back();
      stack.pop_back();
      const double x = unif(gen);
      const Rule* chosen = nullptr;
      for (auto& [c, r] : table[q][z]) {
        if (x < c) {
          chosen = r;
          break;
        }
      }
      if (!chosen) break;  // stuck
      q = chosen->target;
      for (auto it = chosen->push.rbegin(); it != chosen->push.rend(); ++it) stack.push_back(*it);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("ppda") {
  TEST_CASE("return_pps of the example automaton") {
    auto [sys, index] = return_pps(delta_ex());
    auto expected = parse_pps(
        "<q,Z,q> = 1/4 <q,Z,q>^2 + 1/4 <q,Z,r> <r,Z,q> + 1/2\n"
        "<q,Z,r> = 1/4 <q,Z,q> <q,Z,r> + 1/4 <q,Z,r> <r,Z,r> + 1/4\n"
        "<r,Z,q> =\n"
        "<r,Z,r> = 1\n");
    CHECK(sys == expected);
    CHECK(index.var(1, 0, 0) == 2);
    CHECK(index.triple(1) == std::tuple<StateId, SymbolId, StateId>{0, 0, 1});
  }

  TEST_CASE("return_pps: pop and grow-forever automata") {
    auto pop = parse_ppda("ppda\nstates q r\nstack Z\nq Z -> 1 q eps\n");
    auto sys = return_pps(pop).first;
    REQUIRE(sys.size() == 4);
    CHECK(exact_kleene_until_stable(sys) == RationalVec{1, 0, 0, 0});

    auto grow = parse_ppda("ppda\nstates q\nstack Z\nq Z -> 1 q Z Z\n");
    auto g = return_pps(grow).first;
    CHECK(clean(g).zero_set == std::vector<VarId>{0});
    auto res = solve(g, OviParams{});
    CHECK(res.certificate.upper[0] == 0);
  }

  TEST_CASE("all-ones is not inductive once there are two states") {
    // <q,Z,q> = <q,Z,q><q,Z,q> + <q,Z,r><r,Z,q> evaluates to 2 at all-ones
    auto a = parse_ppda("ppda\nstates q r\nstack Z\ninit q Z\nq Z -> 1 q Z Z\n");
    auto sys = return_pps(a).first;
    CHECK_FALSE(check_inductive(sys, RationalVec(sys.size(), Rational(1))));
    CHECK(clean(sys).zero_set.size() == sys.size());
  }

  TEST_CASE("property: dimension, lfp <= 1, all-ones inductive for one state") {
    Rng rng(2020);
    for (int trial = 0; trial < 100; ++trial) {
      const int nq = rng.uniform_int(1, 4), nz = rng.uniform_int(1, 3);
      auto a = random_ppda(rng, nq, nz);
      auto [sys, index] = return_pps(a);
      CHECK(sys.size() == static_cast<std::size_t>(nq * nq * nz));
      CHECK(sys.max_degree() <= 2);
      if (nq == 1) CHECK(check_inductive(sys, RationalVec(sys.size(), Rational(1))));
      for (double x : float_lfp(sys, 1e-12, 200000)) CHECK(x <= 1.0 + 1e-9);
      for (VarId v = 0; v < sys.size(); ++v) {
        auto [qq, z, r] = index.triple(v);
        CHECK(index.var(qq, z, r) == v);
        CHECK(sys.name(v) == return_var_name(a, qq, z, r));
      }
    }
  }

  TEST_CASE("basic certificate for the example automaton") {
    auto cert = basic_certificate(delta_ex(), OviParams{});
    const auto& u = cert.solve.certificate.upper;
    CHECK(u[0].get_d() >= 2 - std::sqrt(2.0));
    CHECK(u[0].get_d() <= 2 - std::sqrt(2.0) + 1e-3);
    CHECK(u[1].get_d() >= std::sqrt(2.0) - 1);
    CHECK(u[1].get_d() <= std::sqrt(2.0) - 1 + 1e-3);
    CHECK(u[2] == 0);
    CHECK(verify_certificate_file(cert.system, cert.solve.certificate).valid);
    CHECK(verify_certificate_file(cert.system, cert_for(cert.system, qv({{3, 5}, {1, 2}, {0, 1}, {1, 1}}))).valid);
  }

  TEST_CASE("bad_state_transform examples") {
    auto a = delta_ex();
    CHECK(bad_state_transform(a, "r") == a);
    auto loop = parse_ppda("ppda\nstates q r\nstack Z Y\ninit q Z\nq Z -> 1/2 r Y\nq Z -> 1/2 q eps\nr Y -> 1 r Y Y\n");
    auto t = bad_state_transform(loop, "r");
    CHECK(t.rules(1, 0).size() == 1);
    CHECK(t.rules(1, 0)[0] == Rule{1, 1, {}});
    CHECK(t.rules(1, 1) == std::vector<Rule>{Rule{1, 1, {}}});
    CHECK(t.rules(0, 0) == loop.rules(0, 0));
    CHECK_THROWS_AS(bad_state_transform(loop, "nope"), std::invalid_argument);

    auto unreach = parse_ppda("ppda\nstates q r\nstack Z\ninit q Z\nq Z -> 2/3 q eps\nq Z -> 1/3 q Z Z\n");
    auto ut = bad_state_transform(unreach, "r");
    auto [sys, index] = return_pps(ut);
    auto res = solve(sys, OviParams{});
    CHECK(res.certificate.upper[index.var(0, 0, 1)] == 0);
  }

  TEST_CASE("property: bad_state_transform is idempotent") {
    Rng rng(2121);
    for (int trial = 0; trial < 50; ++trial) {
      auto a = random_ppda(rng, rng.uniform_int(1, 4), rng.uniform_int(1, 3));
      const auto r = static_cast<StateId>(rng.uniform_int(0, static_cast<int>(a.state_count()) - 1));
      auto once = bad_state_transform(a, r);
      CHECK(bad_state_transform(once, r) == once);
    }
  }

  TEST_CASE("property: reachability bound agrees with simulation [stochastic]") {
    const std::uint64_t seed = 424242;
    MESSAGE("simulation seed " << seed);
    Rng rng(seed);
    const long runs = 1'000'000;
    for (int trial = 0; trial < 20; ++trial) {
      auto a = random_ppda(rng, 3, 2);
      const StateId bad = 2;
      auto t = bad_state_transform(a, bad);
      auto [sys, index] = return_pps(t);
      SolveResult res;
      try {
        res = solve(sys, OviParams{});
      } catch (const GuessBudgetExhausted&) {
        MESSAGE("trial " << trial << ": no certificate (singular), skipped");
        continue;
      }
      const double u = res.certificate.upper[index.var(0, 0, bad)].get_d();
      auto sim = simulate_reach(a, bad, runs, seed + trial);
      const double p = static_cast<double>(sim.hits) / runs;
      const double se = std::sqrt(std::max(p * (1 - p), 1.0 / runs) / runs);
      const double capped = static_cast<double>(sim.capped) / runs;
      CHECK(p <= u + 3 * se);
      CHECK(u <= p + capped + 1e-3 + 3 * se);
    }
  }

  TEST_CASE("output distribution bounds") {
    auto a = delta_ex();
    auto sys = return_pps(a).first;
    auto cert = cert_for(sys, qv({{3, 5}, {1, 2}, {0, 1}, {1, 1}}));
    auto b = output_distribution_bounds(a, *a.initial(), cert, true);
    CHECK(b.at(0).lower == q(1, 2));
    CHECK(b.at(0).upper == q(3, 5));
    CHECK(b.at(1).lower == q(2, 5));
    CHECK(b.at(1).upper == q(1, 2));

    auto nb = output_distribution_bounds(a, *a.initial(), cert, false);
    CHECK(nb.at(0).lower == 0);
    CHECK(nb.at(1).lower == 0);

    auto exact = cert_for(sys, qv({{3, 5}, {2, 5}, {0, 1}, {1, 1}}));
    auto eb = output_distribution_bounds(a, *a.initial(), exact, true);
    CHECK(eb.at(0).lower == eb.at(0).upper);
    CHECK(eb.at(1).lower == eb.at(1).upper);

    auto low = cert_for(sys, qv({{1, 2}, {2, 5}, {0, 1}, {1, 1}}));
    CHECK_THROWS_AS(output_distribution_bounds(a, *a.initial(), low, true), SlackNegative);
  }

  TEST_CASE("reward system of the example automaton") {
    auto a = delta_ex();
    auto sys = return_pps(a).first;
    auto cert = cert_for(sys, qv({{3, 5}, {1, 2}, {0, 1}, {1, 1}}));
    RewardModel ones{{1, 1}};
    auto [rsys, rindex] = reward_pps(a, ones, cert);
    CHECK(rsys.max_degree() <= 1);
    CHECK(rsys.name(0) == "<E:q,Z,q>");

    // elimination oracle, derived by hand from the rules:
    // E_qq = 1/4 u_qq^2 (1 + 2 E_qq) + 1/2
    // E_qr = 1/4 [u_qq u_qr (1 + E_qq + E_qr) + u_qr u_rr (1 + E_qr + E_rr)] + 1/4,  E_rr = 1, E_rq = 0
    const Rational uqq = q(3, 5), uqr = q(1, 2), urr = 1;
    const Rational c1 = uqq * uqq / 4;
    const Rational eqq = (c1 + q(1, 2)) / (1 - 2 * c1);
    const Rational c2 = uqq * uqr / 4, c3 = uqr * urr / 4;
    const Rational err = 1;
    const Rational eqr = (c2 * (1 + eqq) + c3 * (1 + err) + q(1, 4)) / (1 - c2 - c3);
    CHECK(eqq == q(59, 82));
    CHECK(eqr == q(2063, 2624));

    RationalVec exact{eqq, eqr, 0, err};
    CHECK(evaluate(rsys, exact) == exact);

    auto res = solve(rsys, OviParams{});
    // each scc is within epsilon of its substituted subsystem; E_qr also inherits
    // the excess of E_qq scaled by c2 / (1 - c2 - c3)
    const Rational eps = q(1, 1000), slack = q(1, 100000);
    const RationalVec allowed{eps + slack, eps + c2 / (1 - c2 - c3) * eps + slack, slack, eps + slack};
    for (int i = 0; i < 4; ++i) {
      CHECK(res.certificate.upper[i] >= exact[i]);
      CHECK(res.certificate.upper[i] - exact[i] <= allowed[i]);
    }

    RewardModel zeros{{0, 0}};
    auto zsys = reward_pps(a, zeros, cert).first;
    auto zres = solve(zsys, OviParams{});
    for (const auto& v : zres.certificate.upper) CHECK(v == 0);

    auto unit = parse_ppda("ppda\nstates q\nstack Z Y\nq Z -> 1 q Y\nq Y -> 1 q eps\n");
    auto usys = return_pps(unit).first;
    CHECK_THROWS_AS(reward_pps(unit, RewardModel{{1}}, cert_for(usys, RationalVec(usys.size(), Rational(1)))),
                    ArityViolation);
  }

  TEST_CASE("property: reward bounds are monotone in the substituted certificate") {
    Rng rng(2323);
    for (int trial = 0; trial < 30; ++trial) {
      auto a = random_ppda(rng, rng.uniform_int(1, 3), rng.uniform_int(1, 2), false);
      auto sys = return_pps(a).first;
      SolveResult tight;
      try {
        tight = solve(sys, OviParams{});
      } catch (const GuessBudgetExhausted&) {
        continue;
      }
      auto loose = tight.certificate;
      for (auto& v : loose.upper) {
        if (v > 0) v += q(1, 50);
      }
      RewardModel r;
      for (std::size_t s = 0; s < a.state_count(); ++s) r.reward.push_back(q(rng.uniform_int(0, 3)));
      auto rt = reward_pps(a, r, tight.certificate).first;
      auto rl = reward_pps(a, r, loose).first;
      // the reward systems can be infeasible; compare finitely many Kleene iterates instead
      FloatVec xt(rt.size(), 0.0), xl(rl.size(), 0.0);
      for (int k = 0; k < 200; ++k) {
        xt = evaluate(rt, xt);
        xl = evaluate(rl, xl);
        for (std::size_t i = 0; i < xt.size(); ++i) CHECK(xl[i] >= xt[i] * (1 - 1e-12));
      }
    }
  }

  TEST_CASE("property: arity normalization preserves return probabilities") {
    Rng rng(2424);
    for (int trial = 0; trial < 30; ++trial) {
      auto a = random_ppda(rng, rng.uniform_int(1, 3), rng.uniform_int(1, 3));
      auto n = normalize_arity(a);
      for (StateId s = 0; s < n.state_count(); ++s)
        for (SymbolId z = 0; z < n.symbol_count(); ++z)
          for (const Rule& r : n.rules(s, z)) CHECK(r.push.size() != 1);
      auto so = return_pps(a).first;
      auto sn = return_pps(n).first;
      // the same Kleene iterate count need not agree, but the limits do
      auto lo = float_lfp(so, 1e-15, 200000);
      auto ln = float_lfp(sn, 1e-15, 400000);
      for (VarId v = 0; v < so.size(); ++v) {
        auto w = sn.find(so.name(v));
        REQUIRE(w.has_value());
        CHECK(std::abs(lo[v] - ln[*w]) < 1e-4);
      }
    }
  }

  TEST_CASE("pPDA text format") {
    auto a = delta_ex();
    CHECK(a.state_count() == 2);
    CHECK(a.symbol_count() == 1);
    CHECK(a.rule_count() == 4);
    CHECK(a.is_stochastic());
    REQUIRE(a.initial().has_value());
    CHECK(*a.initial() == Config{0, 0});
    CHECK(parse_ppda(to_text(a)) == a);

    auto d = parse_ppda("ppda # header\nstates q\nstack Z Y\nq Z -> 0.5 q Y Z\nq Y -> 1/2 q eps\n");
    CHECK(d.rules(0, 0)[0].push == std::vector<SymbolId>{1, 0});
    CHECK_FALSE(d.is_stochastic());

    CHECK_THROWS_AS(parse_ppda("states q\n"), ParseError);
    CHECK_THROWS_AS(parse_ppda("ppda\nstates q\nstack Z\nq Z -> 1 q Z Z Z\n"), ParseError);
    CHECK_THROWS_AS(parse_ppda("ppda\nstates q\nstack Z\nq Z -> 3/2 q eps\n"), ParseError);
    CHECK_THROWS_AS(parse_ppda("ppda\nstates q\nstack Z\nq Z -> 1/2 q eps\nq Z -> 2/3 q eps\n"), ParseError);
    try {
      parse_ppda("ppda\nstates q\nstack Z\nq W -> 1 q eps\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 4);
      CHECK(e.column() == 3);
    }
  }

  TEST_CASE("property: pPDA text round trip") {
    Rng rng(2525);
    for (int trial = 0; trial < 50; ++trial) {
      auto a = random_ppda(rng, rng.uniform_int(1, 4), rng.uniform_int(1, 3));
      CHECK(parse_ppda(to_text(a)) == a);
    }
  }

  TEST_CASE("reward file format") {
    auto a = delta_ex();
    auto r = parse_reward("# rewards\nq 2\nr 1/2\n", a);
    CHECK(r.reward == std::vector<Rational>{2, q(1, 2)});
    auto partial = parse_reward("r 1\n", a);
    CHECK(partial.reward == std::vector<Rational>{0, 1});
    CHECK_THROWS_AS(parse_reward("q 1\nq 2\n", a), ParseError);
    CHECK_THROWS_AS(parse_reward("q -1\n", a), ParseError);
    CHECK_THROWS_AS(parse_reward("s 1\n", a), ParseError);
  }
}
