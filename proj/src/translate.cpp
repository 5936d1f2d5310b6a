#include "ppscert/translate.hpp"

#include <deque>
#include <set>
#include <unordered_map>

namespace ppscert {

namespace {

using Store = std::vector<long>;

struct Instr {
  enum class Op { Assign, Jump, Branch, Sample, ProbBranch, Call, Return };
  Op op = Op::Jump;
  Loc loc;
  int slot = -1;  // Assign, Sample, Call result (-1: discarded)
  ExprPtr expr;   // Assign value, Branch condition, Sample source, Return value
  int target = -1;
  int alt = -1;   // Branch false target
  std::vector<ExprPtr> probs;
  std::vector<int> targets;
  int callee = -1;
  std::vector<ExprPtr> args;
  std::vector<int> kills;  // temps reset to 0 once consumed
};

struct Code {
  std::vector<Instr> instrs;
  int slots = 0;
  Type return_type = Type::Void;
  std::string name;
};

// ---- lowering

class Lowerer {
public:
  Lowerer(const Procedure& proc, const std::vector<Procedure>& all) : all_(all) {
    code_.slots = proc.slot_count;
    code_.return_type = proc.return_type;
    code_.name = proc.name;
    temp_base_ = proc.slot_count;
    statement(*proc.body);
    Instr ret{};
    ret.op = Instr::Op::Return;
    ret.loc = proc.loc;
    if (proc.return_type != Type::Void) ret.expr = literal(proc.return_type, 0, proc.loc);
    emit(std::move(ret));
  }

  Code take() { return std::move(code_); }

private:
  const std::vector<Procedure>& all_;
  Code code_;
  int temp_base_ = 0;

  int here() const { return static_cast<int>(code_.instrs.size()); }
  int emit(Instr i) {
    code_.instrs.push_back(std::move(i));
    return here() - 1;
  }

  static ExprPtr literal(Type t, long v, Loc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = t == Type::Bool ? Expr::Kind::BoolLit : Expr::Kind::IntLit;
    e->type = t;
    e->value = v;
    e->loc = loc;
    return e;
  }

  ExprPtr temp_var(int slot, Type t, Loc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Var;
    e->type = t;
    e->slot = slot;
    e->name = "$t" + std::to_string(slot);
    e->loc = loc;
    return e;
  }

  void collect_temps(const Expr& e, std::vector<int>& out) const {
    if (e.kind == Expr::Kind::Var && e.slot >= temp_base_) out.push_back(e.slot);
    for (const auto& a : e.args) collect_temps(*a, out);
  }

  std::vector<int> temps_in(std::initializer_list<const std::vector<ExprPtr>*> lists, const ExprPtr& one = {}) const {
    std::vector<int> out;
    for (auto* l : lists)
      for (const auto& e : *l) collect_temps(*e, out);
    if (one) collect_temps(*one, out);
    return out;
  }

  std::vector<ExprPtr> hoist_all(const std::vector<ExprPtr>& es) {
    std::vector<ExprPtr> out;
    for (const auto& e : es) out.push_back(hoist(e));
    return out;
  }

  void emit_call(const Expr& call, int result_slot) {
    Instr i{};
    i.op = Instr::Op::Call;
    i.loc = call.loc;
    i.callee = call.callee;
    i.args = hoist_all(call.args);
    i.slot = result_slot;
    i.kills = temps_in({&i.args});
    emit(std::move(i));
  }

  // Moves calls and sampling out of e into preceding instructions, left to right.
  ExprPtr hoist(const ExprPtr& e) {
    switch (e->kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::BoolLit:
      case Expr::Kind::ProbLit:
      case Expr::Kind::Var: return e;
      case Expr::Kind::Not:
      case Expr::Kind::Binary: {
        std::vector<ExprPtr> args = hoist_all(e->args);
        if (args == e->args) return e;
        auto copy = std::make_shared<Expr>(*e);
        copy->args = std::move(args);
        return copy;
      }
      case Expr::Kind::Call: {
        const int t = code_.slots++;
        emit_call(*e, t);
        return temp_var(t, e->type, e->loc);
      }
      case Expr::Kind::Flip:
      case Expr::Kind::Uniform:
      case Expr::Kind::Choice: {
        auto source = std::make_shared<Expr>(*e);
        source->args = hoist_all(e->args);
        const int t = code_.slots++;
        Instr i{};
        i.op = Instr::Op::Sample;
        i.loc = e->loc;
        i.slot = t;
        i.kills = temps_in({&source->args});
        i.expr = source;
        emit(std::move(i));
        return temp_var(t, e->type, e->loc);
      }
    }
    return e;
  }

  void assign(int slot, const ExprPtr& value, Loc loc) {
    if (value->kind == Expr::Kind::Call) {
      emit_call(*value, slot);
      return;
    }
    Instr i{};
    i.op = Instr::Op::Assign;
    i.loc = loc;
    i.slot = slot;
    i.expr = hoist(value);
    i.kills = temps_in({}, i.expr);
    emit(std::move(i));
  }

  void statement(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Empty: return;
      case Stmt::Kind::Block:
        for (const auto& b : s.body) statement(*b);
        return;
      case Stmt::Kind::Decl:
        assign(s.slot, s.expr ? s.expr : literal(s.decl_type, 0, s.loc), s.loc);
        return;
      case Stmt::Kind::Assign: assign(s.slot, s.expr, s.loc); return;
      case Stmt::Kind::ExprStmt: {
        if (s.expr->kind == Expr::Kind::Call) {
          emit_call(*s.expr, -1);
          return;
        }
        ExprPtr pure = hoist(s.expr);
        std::vector<int> kills = temps_in({}, pure);
        if (!kills.empty()) {
          Instr i{};
          i.op = Instr::Op::Jump;
          i.loc = s.loc;
          i.kills = std::move(kills);
          i.target = here() + 1;
          emit(std::move(i));
        }
        return;
      }
      case Stmt::Kind::If: {
        Instr br{};
        br.op = Instr::Op::Branch;
        br.loc = s.loc;
        br.expr = hoist(s.expr);
        br.kills = temps_in({}, br.expr);
        const int at = emit(std::move(br));
        code_.instrs[at].target = here();
        statement(*s.body[0]);
        if (s.body.size() == 2) {
          Instr j{};
          j.op = Instr::Op::Jump;
          j.loc = s.loc;
          const int jump = emit(std::move(j));
          code_.instrs[at].alt = here();
          statement(*s.body[1]);
          code_.instrs[jump].target = here();
        } else {
          code_.instrs[at].alt = here();
        }
        return;
      }
      case Stmt::Kind::While: {
        const int head = here();
        Instr br{};
        br.op = Instr::Op::Branch;
        br.loc = s.loc;
        br.expr = hoist(s.expr);
        br.kills = temps_in({}, br.expr);
        const int at = emit(std::move(br));
        code_.instrs[at].target = here();
        statement(*s.body[0]);
        Instr back{};
        back.op = Instr::Op::Jump;
        back.loc = s.loc;
        back.target = head;
        emit(std::move(back));
        code_.instrs[at].alt = here();
        return;
      }
      case Stmt::Kind::Prob: {
        Instr pb{};
        pb.op = Instr::Op::ProbBranch;
        pb.loc = s.loc;
        pb.probs = hoist_all(s.probs);
        pb.kills = temps_in({&pb.probs});
        const int at = emit(std::move(pb));
        std::vector<int> exits;
        for (const auto& b : s.body) {
          code_.instrs[at].targets.push_back(here());
          statement(*b);
          Instr j{};
          j.op = Instr::Op::Jump;
          j.loc = s.loc;
          exits.push_back(emit(std::move(j)));
        }
        for (int e : exits) code_.instrs[e].target = here();
        return;
      }
      case Stmt::Kind::Return: {
        Instr r{};
        r.op = Instr::Op::Return;
        r.loc = s.loc;
        if (s.expr) r.expr = hoist(s.expr);
        emit(std::move(r));
        return;
      }
    }
  }
};

// ---- exploration

struct Target {
  enum class Kind { Symbol, Pop, Diverge };
  Kind kind = Kind::Diverge;
  SymbolId symbol = 0;
  Type type = Type::Void;  // Pop
  long value = 0;          // Pop
};

struct SymbolInfo {
  int proc = -1;  // -1 for the start and diverge symbols
  int pc = 0;
  bool cont = false;
  Store store;
};

class Explorer {
public:
  Explorer(const Program& prog, const TranslateOptions& opts) : prog_(prog), opts_(opts) {
    for (const Procedure& p : prog.procedures) codes_.push_back(Lowerer(p, prog.procedures).take());
    codes_.push_back(Lowerer(prog.main, prog.procedures).take());
    main_ = static_cast<int>(codes_.size()) - 1;
    modulus_ = prog.max_int + 1;
  }

  Translation run() {
    states_.push_back("run");
    const SymbolId start = new_symbol("start", SymbolInfo{});
    const Target entry = resolve(main_, 0, Store(codes_[main_].slots, 0));
    emit(kRun, start, Rational(1), entry);

    while (!run_queue_.empty() || !cont_queue_.empty()) {
      if (!run_queue_.empty()) {
        const SymbolId z = run_queue_.front();
        run_queue_.pop_front();
        expand(z);
      } else {
        auto [c, r] = cont_queue_.front();
        cont_queue_.pop_front();
        const SymbolInfo info = symbols_[c];
        emit(r, c, Rational(1), resume(info.proc, info.pc, info.store, ret_value_[r].second));
      }
    }

    Translation out;
    out.ppda = Ppda(states_, symbol_names_);
    for (auto& [key, group] : rules_) {
      for (Rule& rule : group) out.ppda.add_rule(key.first, key.second, std::move(rule));
    }
    out.init = Config{kRun, start};
    out.ppda.set_initial(out.init);
    const Type main_type = codes_[main_].return_type;
    for (StateId q = 1; q < states_.size(); ++q) {
      if (ret_value_[q].first == main_type) out.main_values.emplace(q, value_text(main_type, ret_value_[q].second));
    }
    return out;
  }

private:
  static constexpr StateId kRun = 0;

  const Program& prog_;
  const TranslateOptions& opts_;
  std::vector<Code> codes_;
  int main_ = 0;
  long modulus_ = 256;

  std::vector<std::string> states_;
  std::unordered_map<StateId, std::pair<Type, long>> ret_value_;
  std::map<std::pair<Type, long>, StateId> ret_states_;
  std::vector<std::string> symbol_names_;
  std::vector<SymbolInfo> symbols_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::map<Type, std::vector<SymbolId>> conts_by_type_;
  std::optional<SymbolId> diverge_;
  std::deque<SymbolId> run_queue_;
  std::deque<std::pair<SymbolId, StateId>> cont_queue_;
  std::map<std::pair<StateId, SymbolId>, std::vector<Rule>> rules_;

  static std::string value_text(Type t, long v) {
    if (t == Type::Void) return "void";
    if (t == Type::Bool) return v ? "true" : "false";
    return std::to_string(v);
  }

  SymbolId new_symbol(std::string name, SymbolInfo info) {
    if (symbols_.size() >= opts_.max_symbols) {
      throw TranslateError("state-space cap of " + std::to_string(opts_.max_symbols) + " stack symbols exceeded");
    }
    const auto id = static_cast<SymbolId>(symbols_.size());
    symbol_index_.emplace(name, id);
    symbol_names_.push_back(std::move(name));
    symbols_.push_back(std::move(info));
    return id;
  }

  SymbolId intern(int proc, int pc, bool cont, const Store& store) {
    std::string name = codes_[proc].name + "@" + std::to_string(pc) + (cont ? "r" : "") + "[";
    for (std::size_t i = 0; i < store.size(); ++i) name += (i ? "," : "") + std::to_string(store[i]);
    name += "]";
    if (auto it = symbol_index_.find(name); it != symbol_index_.end()) return it->second;
    const SymbolId id = new_symbol(std::move(name), SymbolInfo{proc, pc, cont, store});
    if (!cont) {
      run_queue_.push_back(id);
    } else {
      const Type t = codes_[codes_[proc].instrs[pc].callee].return_type;
      conts_by_type_[t].push_back(id);
      for (auto& [key, q] : ret_states_) {
        if (key.first == t) cont_queue_.emplace_back(id, q);
      }
    }
    return id;
  }

  StateId ret_state(Type t, long v) {
    auto key = std::make_pair(t, v);
    if (auto it = ret_states_.find(key); it != ret_states_.end()) return it->second;
    const auto q = static_cast<StateId>(states_.size());
    states_.push_back(t == Type::Void ? "ret" : "ret(" + value_text(t, v) + ")");
    ret_states_.emplace(key, q);
    ret_value_.emplace(q, key);
    for (SymbolId c : conts_by_type_[t]) cont_queue_.emplace_back(c, q);
    return q;
  }

  SymbolId diverge() {
    if (!diverge_) {
      diverge_ = new_symbol("diverge", SymbolInfo{});
      rules_[{kRun, *diverge_}].push_back(Rule{Rational(1), kRun, {*diverge_}});
    }
    return *diverge_;
  }

  void emit(StateId q, SymbolId z, const Rational& p, const Target& t) {
    if (sgn(p) == 0) return;
    Rule rule{p, kRun, {}};
    switch (t.kind) {
      case Target::Kind::Symbol: rule.push = {t.symbol}; break;
      case Target::Kind::Pop: rule.target = ret_state(t.type, t.value); break;
      case Target::Kind::Diverge: rule.push = {diverge()}; break;
    }
    add(q, z, std::move(rule));
  }

  void add(StateId q, SymbolId z, Rule rule) {
    auto& group = rules_[{q, z}];
    for (Rule& r : group) {
      if (r.target == rule.target && r.push == rule.push) {
        r.probability += rule.probability;
        return;
      }
    }
    group.push_back(std::move(rule));
  }

  // ---- evaluation

  long wrap(long v) const { return ((v % modulus_) + modulus_) % modulus_; }

  long eval(const Expr& e, const Store& s) const {
    switch (e.kind) {
      case Expr::Kind::IntLit:
      case Expr::Kind::BoolLit: return e.value;
      case Expr::Kind::Var: return s[e.slot];
      case Expr::Kind::Not: return !eval(*e.args[0], s);
      case Expr::Kind::Binary: {
        const long a = eval(*e.args[0], s), b = eval(*e.args[1], s);
        if (e.op == "+") return wrap(a + b);
        if (e.op == "-") return wrap(a - b);
        if (e.op == "%") {
          if (b == 0) throw TranslateError("modulo by zero", e.loc);
          return a % b;
        }
        if (e.op == "<") return a < b;
        if (e.op == "<=") return a <= b;
        if (e.op == ">") return a > b;
        if (e.op == ">=") return a >= b;
        if (e.op == "==") return a == b;
        if (e.op == "!=") return a != b;
        break;
      }
      default: break;
    }
    throw TranslateError("internal: expression is not a pure int/bool expression", e.loc);
  }

  Rational probability(const Expr& e, const Store& s) const {
    Rational p;
    if (e.kind == Expr::Kind::ProbLit) {
      p = e.prob;
    } else if (e.kind == Expr::Kind::Binary && e.op == "//") {
      const long a = eval(*e.args[0], s), b = eval(*e.args[1], s);
      if (b == 0) throw TranslateError("probability with zero denominator", e.loc);
      p = Rational(a, b);
      p.canonicalize();
    } else {
      p = Rational(eval(e, s));
    }
    if (sgn(p) < 0 || p > 1) throw TranslateError("probability " + to_compact_string(p) + " outside [0,1]", e.loc);
    return p;
  }

  static void apply_kills(const Instr& i, Store& s) {
    for (int k : i.kills) s[k] = 0;
  }

  // Runs deterministic instructions until a probabilistic step, a call or a return.
  Target resolve(int proc, int pc, Store store) {
    const Code& code = codes_[proc];
    std::set<std::pair<int, Store>> seen;
    while (true) {
      const Instr& i = code.instrs[pc];
      switch (i.op) {
        case Instr::Op::Assign: {
          const long v = eval(*i.expr, store);
          apply_kills(i, store);
          store[i.slot] = v;
          ++pc;
          break;
        }
        case Instr::Op::Jump:
          apply_kills(i, store);
          pc = i.target;
          break;
        case Instr::Op::Branch: {
          const bool c = eval(*i.expr, store) != 0;
          apply_kills(i, store);
          pc = c ? i.target : i.alt;
          break;
        }
        case Instr::Op::Return: {
          Target t;
          t.kind = Target::Kind::Pop;
          t.type = code.return_type;
          t.value = i.expr ? eval(*i.expr, store) : 0;
          return t;
        }
        default: return Target{Target::Kind::Symbol, intern(proc, pc, false, store)};
      }
      if (i.op == Instr::Op::Jump || i.op == Instr::Op::Branch) {
        if (!seen.emplace(pc, store).second) return Target{};  // deterministic infinite loop
      }
    }
  }

  Target resume(int proc, int call_pc, Store store, long value) {
    const Instr& call = codes_[proc].instrs[call_pc];
    if (call.slot >= 0) store[call.slot] = value;
    return resolve(proc, call_pc + 1, std::move(store));
  }

  void expand(SymbolId z) {
    const SymbolInfo info = symbols_[z];
    const Instr& i = codes_[info.proc].instrs[info.pc];
    const Store& s = info.store;
    switch (i.op) {
      case Instr::Op::Sample: {
        std::vector<std::pair<Rational, long>> outcomes;
        const Expr& src = *i.expr;
        if (src.kind == Expr::Kind::Flip) {
          const Rational p = probability(*src.args[0], s);
          outcomes = {{p, 1}, {1 - p, 0}};
        } else if (src.kind == Expr::Kind::Uniform) {
          const long n = eval(*src.args[0], s);
          if (n < 1 || n > modulus_) {
            throw TranslateError("uniform(" + std::to_string(n) + ") outside 1.." + std::to_string(modulus_), src.loc);
          }
          for (long k = 0; k < n; ++k) outcomes.emplace_back(Rational(1, n), k);
        } else {
          Rational total;
          for (std::size_t k = 0; k + 1 < src.args.size(); k += 2) {
            const Rational p = probability(*src.args[k], s);
            total += p;
            outcomes.emplace_back(p, eval(*src.args[k + 1], s));
          }
          if (total != 1) {
            throw TranslateError("choice probabilities sum to " + to_compact_string(total) + ", not 1", src.loc);
          }
        }
        for (auto& [p, v] : outcomes) {
          if (sgn(p) == 0) continue;
          Store next = s;
          apply_kills(i, next);
          next[i.slot] = v;
          emit(kRun, z, p, resolve(info.proc, info.pc + 1, std::move(next)));
        }
        return;
      }
      case Instr::Op::ProbBranch: {
        std::vector<Rational> ps;
        Rational total;
        for (const auto& e : i.probs) {
          ps.push_back(probability(*e, s));
          total += ps.back();
        }
        if (total != 1) {
          throw TranslateError("prob-block probabilities sum to " + to_compact_string(total) + ", not 1", i.loc);
        }
        Store next = s;
        apply_kills(i, next);
        for (std::size_t k = 0; k < ps.size(); ++k) {
          if (sgn(ps[k]) == 0) continue;
          emit(kRun, z, ps[k], resolve(info.proc, i.targets[k], next));
        }
        return;
      }
      case Instr::Op::Call: {
        const Code& callee = codes_[i.callee];
        Store entry(callee.slots, 0);
        for (std::size_t k = 0; k < i.args.size(); ++k) entry[k] = eval(*i.args[k], s);
        Store cont = s;
        apply_kills(i, cont);
        const Target e = resolve(i.callee, 0, std::move(entry));
        if (e.kind == Target::Kind::Symbol) {
          const SymbolId c = intern(info.proc, info.pc, true, cont);
          add(kRun, z, Rule{Rational(1), kRun, {e.symbol, c}});
        } else if (e.kind == Target::Kind::Pop) {
          emit(kRun, z, Rational(1), resume(info.proc, info.pc, std::move(cont), e.value));
        } else {
          emit(kRun, z, Rational(1), Target{});
        }
        return;
      }
      default: throw TranslateError("internal: symbol at a deterministic instruction", i.loc);
    }
  }
};

}  // namespace

Translation translate(const Program& prog, const TranslateOptions& options) {
  return Explorer(prog, options).run();
}

}  // namespace ppscert
