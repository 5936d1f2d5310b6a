#include "ppscert/ppda.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>

#include "ppscert/errors.hpp"

namespace ppscert {

Ppda::Ppda(std::vector<std::string> states, std::vector<std::string> symbols) {
  for (auto& q : states) add_state(std::move(q));
  for (auto& z : symbols) add_symbol(std::move(z));
}

std::optional<StateId> Ppda::find_state(std::string_view name) const {
  auto it = state_index_.find(std::string(name));
  if (it == state_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Ppda::find_symbol(std::string_view name) const {
  auto it = symbol_index_.find(std::string(name));
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

StateId Ppda::add_state(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty state name");
  if (find_state(name)) throw std::invalid_argument("duplicate state '" + name + "'");
  state_index_.emplace(name, static_cast<StateId>(states_.size()));
  states_.push_back(std::move(name));
  rules_.emplace_back(symbols_.size());
  return static_cast<StateId>(states_.size() - 1);
}

SymbolId Ppda::add_symbol(std::string name) {
  if (name.empty()) throw std::invalid_argument("empty stack symbol name");
  if (find_symbol(name)) throw std::invalid_argument("duplicate stack symbol '" + name + "'");
  symbol_index_.emplace(name, static_cast<SymbolId>(symbols_.size()));
  symbols_.push_back(std::move(name));
  for (auto& row : rules_) row.emplace_back();
  return static_cast<SymbolId>(symbols_.size() - 1);
}

void Ppda::add_rule(StateId q, SymbolId z, Rule rule) {
  if (q >= states_.size() || rule.target >= states_.size()) throw std::invalid_argument("state out of range");
  if (z >= symbols_.size()) throw std::invalid_argument("stack symbol out of range");
  if (sgn(rule.probability) <= 0) throw std::invalid_argument("rule probability must be positive");
  if (rule.push.size() > 2) throw std::invalid_argument("a rule pushes at most two symbols");
  for (SymbolId y : rule.push) {
    if (y >= symbols_.size()) throw std::invalid_argument("stack symbol out of range");
  }
  auto& group = rules_[q][z];
  Rational mass = rule.probability;
  for (const Rule& r : group) mass += r.probability;
  if (mass > 1) {
    throw std::invalid_argument("rules of (" + states_[q] + ", " + symbols_[z] + ") have total probability " +
                                to_compact_string(mass) + " > 1");
  }
  group.push_back(std::move(rule));
}

void Ppda::clear_rules(StateId q, SymbolId z) { rules_.at(q).at(z).clear(); }

const std::vector<Rule>& Ppda::rules(StateId q, SymbolId z) const { return rules_.at(q).at(z); }

std::size_t Ppda::rule_count() const {
  std::size_t n = 0;
  for (const auto& row : rules_)
    for (const auto& group : row) n += group.size();
  return n;
}

bool Ppda::is_stochastic() const {
  for (const auto& row : rules_) {
    for (const auto& group : row) {
      if (group.empty()) continue;
      Rational mass;
      for (const Rule& r : group) mass += r.probability;
      if (mass != 1) return false;
    }
  }
  return true;
}

bool operator==(const Ppda& a, const Ppda& b) {
  return a.states_ == b.states_ && a.symbols_ == b.symbols_ && a.rules_ == b.rules_ && a.initial_ == b.initial_;
}

std::string return_var_name(const Ppda& a, StateId q, SymbolId z, StateId r) {
  return "<" + a.state_name(q) + "," + a.symbol_name(z) + "," + a.state_name(r) + ">";
}

std::pair<PolySystem, ReturnVarIndex> return_pps(const Ppda& a) {
  const std::size_t nq = a.state_count();
  ReturnVarIndex index(nq, a.symbol_count());
  std::vector<std::string> names(index.size());
  std::vector<std::vector<Monomial>> eqs(index.size());
  for (StateId q = 0; q < nq; ++q) {
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      for (StateId r = 0; r < nq; ++r) {
        const VarId v = index.var(q, z, r);
        names[v] = return_var_name(a, q, z, r);
        auto& eq = eqs[v];
        for (const Rule& rule : a.rules(q, z)) {
          if (rule.push.size() == 2) {
            for (StateId t = 0; t < nq; ++t) {
              eq.push_back(Monomial{rule.probability,
                                    {Factor{index.var(rule.target, rule.push[0], t), 1},
                                     Factor{index.var(t, rule.push[1], r), 1}}});
            }
          } else if (rule.push.size() == 1) {
            eq.push_back(Monomial{rule.probability, {Factor{index.var(rule.target, rule.push[0], r), 1}}});
          } else if (rule.target == r) {
            eq.push_back(Monomial{rule.probability, {}});
          }
        }
      }
    }
  }
  return {PolySystem(std::move(names), std::move(eqs), 2), index};
}

PpdaCertification basic_certificate(const Ppda& a, const OviParams& params, unsigned jobs) {
  auto [sys, index] = return_pps(a);
  SolveResult result = solve(sys, params, jobs);
  return PpdaCertification{std::move(result), index, std::move(sys)};
}

Ppda bad_state_transform(const Ppda& a, StateId r_bad) {
  if (r_bad >= a.state_count()) throw std::invalid_argument("unknown state");
  Ppda out = a;
  for (SymbolId z = 0; z < a.symbol_count(); ++z) {
    out.clear_rules(r_bad, z);
    out.add_rule(r_bad, z, Rule{Rational(1), r_bad, {}});
  }
  return out;
}

Ppda bad_state_transform(const Ppda& a, std::string_view r_bad) {
  auto q = a.find_state(r_bad);
  if (!q) throw std::invalid_argument("unknown state '" + std::string(r_bad) + "'");
  return bad_state_transform(a, *q);
}

std::map<StateId, Interval> output_distribution_bounds(const Ppda& a, Config init, const Certificate& cert,
                                                       bool assume_ast) {
  ReturnVarIndex index(a.state_count(), a.symbol_count());
  if (cert.upper.size() != index.size()) {
    throw std::invalid_argument("certificate does not match the return system of this automaton");
  }
  if (init.state >= a.state_count() || init.symbol >= a.symbol_count()) {
    throw std::invalid_argument("initial configuration out of range");
  }
  Rational slack(-1);
  for (StateId r = 0; r < a.state_count(); ++r) slack += cert.upper[index.var(init.state, init.symbol, r)];
  if (assume_ast && sgn(slack) < 0) {
    throw SlackNegative("certified return probabilities sum to " + to_compact_string(slack + 1) +
                        " < 1, contradicting almost-sure termination");
  }
  std::map<StateId, Interval> out;
  for (StateId r = 0; r < a.state_count(); ++r) {
    const Rational& u = cert.upper[index.var(init.state, init.symbol, r)];
    Interval iv{Rational(0), u};
    if (assume_ast) {
      iv.lower = u - slack;
      if (sgn(iv.lower) < 0) iv.lower = 0;
    }
    out.emplace(r, iv);
  }
  return out;
}

std::string reward_var_name(const Ppda& a, StateId q, SymbolId z, StateId r) {
  return "<E:" + a.state_name(q) + "," + a.symbol_name(z) + "," + a.state_name(r) + ">";
}

std::pair<PolySystem, ReturnVarIndex> reward_pps(const Ppda& a, const RewardModel& reward, const Certificate& cert) {
  const std::size_t nq = a.state_count();
  ReturnVarIndex index(nq, a.symbol_count());
  if (cert.upper.size() != index.size()) {
    throw std::invalid_argument("certificate does not match the return system of this automaton");
  }
  if (reward.reward.size() != nq) throw std::invalid_argument("reward vector has the wrong length");
  for (StateId q = 0; q < nq; ++q) {
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      for (const Rule& rule : a.rules(q, z)) {
        if (rule.push.size() == 1) {
          throw ArityViolation("rule " + a.state_name(q) + " " + a.symbol_name(z) + " -> " +
                               a.state_name(rule.target) + " " + a.symbol_name(rule.push[0]) +
                               " pushes exactly one symbol; rewrite it first (normalize arity)");
        }
      }
    }
  }
  const auto& u = cert.upper;
  std::vector<std::string> names(index.size());
  std::vector<std::vector<Monomial>> eqs(index.size());
  for (StateId q = 0; q < nq; ++q) {
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      for (StateId r = 0; r < nq; ++r) {
        const VarId v = index.var(q, z, r);
        names[v] = reward_var_name(a, q, z, r);
        auto& eq = eqs[v];
        for (const Rule& rule : a.rules(q, z)) {
          if (rule.push.empty()) {
            if (rule.target == r) eq.push_back(Monomial{rule.probability * reward.reward[r], {}});
            continue;
          }
          for (StateId t = 0; t < nq; ++t) {
            const VarId first = index.var(rule.target, rule.push[0], t);
            const VarId second = index.var(t, rule.push[1], r);
            const Rational c = rule.probability * u[first] * u[second];
            if (sgn(c) == 0) continue;
            eq.push_back(Monomial{c * reward.reward[r], {}});
            eq.push_back(Monomial{c, {Factor{first, 1}}});
            eq.push_back(Monomial{c, {Factor{second, 1}}});
          }
        }
      }
    }
  }
  return {PolySystem(std::move(names), std::move(eqs), 1), index};
}

Ppda normalize_arity(const Ppda& a) {
  Ppda out(a.state_names(), a.symbol_names());
  if (a.initial()) out.set_initial(*a.initial());
  std::string fresh = "_bot";
  while (a.find_symbol(fresh)) fresh += "_";
  const SymbolId bot = out.add_symbol(fresh);
  for (StateId q = 0; q < a.state_count(); ++q) {
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      for (Rule rule : a.rules(q, z)) {
        if (rule.push.size() == 1) rule.push.push_back(bot);
        out.add_rule(q, z, std::move(rule));
      }
    }
  }
  for (StateId t = 0; t < a.state_count(); ++t) out.add_rule(t, bot, Rule{Rational(1), t, {}});
  return out;
}

namespace {

struct Token {
  std::string text;
  std::size_t column;
};

std::vector<Token> tokenize_line(const std::string& line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (std::isspace(static_cast<unsigned char>(line[i]))) {
      ++i;
      continue;
    }
    if (line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    out.push_back(Token{line.substr(start, i - start), start + 1});
  }
  return out;
}

}  // namespace

Ppda parse_ppda(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool header = false, have_states = false, have_stack = false;
  Ppda a;

  auto state_of = [&](const Token& t) {
    auto q = a.find_state(t.text);
    if (!q) throw ParseError("unknown state '" + t.text + "'", line_no, t.column);
    return *q;
  };
  auto symbol_of = [&](const Token& t) {
    auto z = a.find_symbol(t.text);
    if (!z) throw ParseError("unknown stack symbol '" + t.text + "'", line_no, t.column);
    return *z;
  };

  while (std::getline(in, line)) {
    ++line_no;
    auto toks = tokenize_line(line);
    if (toks.empty()) continue;
    const std::string& head = toks[0].text;
    if (!header) {
      if (head != "ppda" || toks.size() != 1) throw ParseError("expected header 'ppda'", line_no, toks[0].column);
      header = true;
      continue;
    }
    if (head == "states" || head == "stack") {
      const bool states = head == "states";
      if (states ? have_states : have_stack) throw ParseError("repeated '" + head + "' line", line_no, 1);
      if (!states && !have_states) throw ParseError("'states' must precede 'stack'", line_no, 1);
      if (toks.size() < 2) throw ParseError("'" + head + "' needs at least one name", line_no, toks[0].column);
      for (std::size_t i = 1; i < toks.size(); ++i) {
        try {
          if (states) a.add_state(toks[i].text);
          else a.add_symbol(toks[i].text);
        } catch (const std::invalid_argument& e) {
          throw ParseError(e.what(), line_no, toks[i].column);
        }
      }
      (states ? have_states : have_stack) = true;
      continue;
    }
    if (!have_states || !have_stack) throw ParseError("'states' and 'stack' must come first", line_no, 1);
    if (head == "init") {
      if (toks.size() != 3) throw ParseError("expected 'init <state> <symbol>'", line_no, toks[0].column);
      a.set_initial(Config{state_of(toks[1]), symbol_of(toks[2])});
      continue;
    }
    if (toks.size() < 6 || toks.size() > 7 || toks[2].text != "->") {
      throw ParseError("expected '<state> <symbol> -> <prob> <state> eps|Y|Y X'", line_no, toks[0].column);
    }
    const StateId q = state_of(toks[0]);
    const SymbolId z = symbol_of(toks[1]);
    Rule rule;
    try {
      rule.probability = parse_rational(toks[3].text);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed probability '" + toks[3].text + "'", line_no, toks[3].column);
    }
    rule.target = state_of(toks[4]);
    if (toks[5].text == "eps") {
      if (toks.size() != 6) throw ParseError("nothing may follow 'eps'", line_no, toks[6].column);
    } else {
      for (std::size_t i = 5; i < toks.size(); ++i) rule.push.push_back(symbol_of(toks[i]));
    }
    try {
      a.add_rule(q, z, std::move(rule));
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no, toks[3].column);
    }
  }
  if (!header) throw ParseError("empty input: expected header 'ppda'", line_no + 1, 1);
  if (!have_states || !have_stack) throw ParseError("missing 'states' or 'stack' line", line_no + 1, 1);
  return a;
}

std::string to_text(const Ppda& a) {
  std::ostringstream out;
  out << "ppda\nstates";
  for (const auto& q : a.state_names()) out << ' ' << q;
  out << "\nstack";
  for (const auto& z : a.symbol_names()) out << ' ' << z;
  out << '\n';
  if (a.initial()) {
    out << "init " << a.state_name(a.initial()->state) << ' ' << a.symbol_name(a.initial()->symbol) << '\n';
  }
  for (StateId q = 0; q < a.state_count(); ++q) {
    for (SymbolId z = 0; z < a.symbol_count(); ++z) {
      for (const Rule& r : a.rules(q, z)) {
        out << a.state_name(q) << ' ' << a.symbol_name(z) << " -> " << to_compact_string(r.probability) << ' '
            << a.state_name(r.target);
        if (r.push.empty()) out << " eps";
        for (SymbolId y : r.push) out << ' ' << a.symbol_name(y);
        out << '\n';
      }
    }
  }
  return out.str();
}

RewardModel parse_reward(std::string_view text, const Ppda& a) {
  RewardModel m{std::vector<Rational>(a.state_count())};
  std::vector<bool> seen(a.state_count(), false);
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto toks = tokenize_line(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) throw ParseError("expected '<state> <reward>'", line_no, toks[0].column);
    auto q = a.find_state(toks[0].text);
    if (!q) throw ParseError("unknown state '" + toks[0].text + "'", line_no, toks[0].column);
    if (seen[*q]) throw ParseError("reward for '" + toks[0].text + "' given twice", line_no, toks[0].column);
    seen[*q] = true;
    try {
      m.reward[*q] = parse_rational(toks[1].text);
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed reward '" + toks[1].text + "'", line_no, toks[1].column);
    }
    if (sgn(m.reward[*q]) < 0) throw ParseError("rewards must be non-negative", line_no, toks[1].column);
  }
  return m;
}

}  // namespace ppscert
