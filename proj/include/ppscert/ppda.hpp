#pragma once

// Probabilistic pushdown automata: the return-probability system, basic
// certificates, bad-state reachability, output-distribution bounds and the
// expected-reward system.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ppscert/certificate.hpp"
#include "ppscert/ovi.hpp"
#include "ppscert/pps.hpp"

namespace ppscert {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;

struct Rule {
  Rational probability;
  StateId target = 0;
  /// Pushed word, front = new top of stack. Length 0, 1 or 2.
  std::vector<SymbolId> push;

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.probability == b.probability && a.target == b.target && a.push == b.push;
  }
};

struct Config {
  StateId state = 0;
  SymbolId symbol = 0;
  friend bool operator==(const Config&, const Config&) = default;
};

class Ppda {
public:
  Ppda() = default;
  Ppda(std::vector<std::string> states, std::vector<std::string> symbols);

  std::size_t state_count() const { return states_.size(); }
  std::size_t symbol_count() const { return symbols_.size(); }
  const std::string& state_name(StateId q) const { return states_.at(q); }
  const std::string& symbol_name(SymbolId z) const { return symbols_.at(z); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<std::string>& symbol_names() const { return symbols_; }
  std::optional<StateId> find_state(std::string_view name) const;
  std::optional<SymbolId> find_symbol(std::string_view name) const;

  StateId add_state(std::string name);
  SymbolId add_symbol(std::string name);

  /// Throws std::invalid_argument on a non-positive probability, a push longer
  /// than 2, an out-of-range id, or a group whose mass would exceed 1.
  void add_rule(StateId q, SymbolId z, Rule rule);
  void clear_rules(StateId q, SymbolId z);
  const std::vector<Rule>& rules(StateId q, SymbolId z) const;
  std::size_t rule_count() const;

  /// Every non-empty (q,Z) group sums to exactly 1. Sub-distributions are
  /// otherwise allowed (missing mass = stuck).
  bool is_stochastic() const;

  const std::optional<Config>& initial() const { return initial_; }
  void set_initial(Config c) { initial_ = c; }

  friend bool operator==(const Ppda& a, const Ppda& b);

private:
  std::vector<std::string> states_;
  std::vector<std::string> symbols_;
  std::vector<std::vector<std::vector<Rule>>> rules_;  // [q][Z]
  std::unordered_map<std::string, StateId> state_index_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::optional<Config> initial_;
};

/// Bijection (q, Z, r) <-> variable id, q-major, then Z, then r.
class ReturnVarIndex {
public:
  ReturnVarIndex() = default;
  ReturnVarIndex(std::size_t states, std::size_t symbols) : states_(states), symbols_(symbols) {}

  std::size_t size() const { return states_ * states_ * symbols_; }
  VarId var(StateId q, SymbolId z, StateId r) const {
    return static_cast<VarId>((static_cast<std::size_t>(q) * symbols_ + z) * states_ + r);
  }
  std::tuple<StateId, SymbolId, StateId> triple(VarId v) const {
    const std::size_t r = v % states_;
    const std::size_t qz = v / states_;
    return {static_cast<StateId>(qz / symbols_), static_cast<SymbolId>(qz % symbols_), static_cast<StateId>(r)};
  }

private:
  std::size_t states_ = 0;
  std::size_t symbols_ = 0;
};

/// `<q,Z,r>`.
std::string return_var_name(const Ppda& a, StateId q, SymbolId z, StateId r);

/// One equation per (q,Z,r):
///   <qZr> = sum_{qZ->p sYX} p sum_t <sYt><tXr> + sum_{qZ->p sY} p <sYr> + sum_{qZ->p r eps} p
std::pair<PolySystem, ReturnVarIndex> return_pps(const Ppda& a);

struct PpdaCertification {
  SolveResult solve;
  ReturnVarIndex index;
  PolySystem system;
};

PpdaCertification basic_certificate(const Ppda& a, const OviParams& params, unsigned jobs = 1);

/// Drops all rules of r_bad and adds r_bad Z ->1 r_bad eps for every Z.
/// Throws std::invalid_argument on an unknown state.
Ppda bad_state_transform(const Ppda& a, StateId r_bad);
Ppda bad_state_transform(const Ppda& a, std::string_view r_bad);

struct Interval {
  Rational lower;
  Rational upper;
};

/// Thrown when assume_ast is set but the certificate's mass sum is below 1.
class SlackNegative : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Per return state r: upper = u_{qZr}; with assume_ast, lower = max(0, u_{qZr} - slack)
/// where slack = sum_r u_{qZr} - 1, else lower = 0.
std::map<StateId, Interval> output_distribution_bounds(const Ppda& a, Config init, const Certificate& cert,
                                                       bool assume_ast);

struct RewardModel {
  /// reward[q] >= 0 per state.
  std::vector<Rational> reward;
};

class ArityViolation : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// `<E:q,Z,r>`.
std::string reward_var_name(const Ppda& a, StateId q, SymbolId z, StateId r);

/// Linear system over <E_qZr> with the certificate's upper bounds substituted for
/// the return probabilities:
///   <E_qZr> = sum_{qZ->p sYX} p sum_t u_sYt u_tXr (R(r) + <E_sYt> + <E_tXr>) + sum_{qZ->p r eps} p R(r)
/// Throws ArityViolation if a rule pushes exactly one symbol.
std::pair<PolySystem, ReturnVarIndex> reward_pps(const Ppda& a, const RewardModel& reward, const Certificate& cert);

/// Opt-in rewrite of every qZ ->p sY into qZ ->p sY# where # is a fresh symbol
/// with t# ->1 t eps for all t. Return probabilities are preserved.
Ppda normalize_arity(const Ppda& a);

/// Text format:
///   ppda
///   states q r ...
///   stack Z Y ...
///   init q Z          (optional)
///   q Z -> p r alpha  (alpha = eps | Y | Y X; p = num/den or decimal)
/// `#` starts a comment. Throws ParseError.
Ppda parse_ppda(std::string_view text);
std::string to_text(const Ppda& a);

/// `state value` per line; states not listed get reward 0. Throws ParseError.
RewardModel parse_reward(std::string_view text, const Ppda& a);

}  // namespace ppscert
