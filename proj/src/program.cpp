#include "ppscert/program.hpp"

#include <cctype>
#include <unordered_map>

#include "ppscert/errors.hpp"

namespace ppscert {

std::string_view to_string(Type t) {
  switch (t) {
    case Type::Void: return "void";
    case Type::Bool: return "bool";
    case Type::Int: return "int";
    case Type::Prob: return "probability";
  }
  return "?";
}

bool Expr::pure() const {
  if (kind == Kind::Call || kind == Kind::Flip || kind == Kind::Uniform) return false;
  for (const auto& a : args) {
    if (!a->pure()) return false;
  }
  return true;
}

std::optional<Rational> constant_probability(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::ProbLit: return e.prob;
    case Expr::Kind::IntLit: return Rational(e.value);
    case Expr::Kind::Binary:
      if (e.op == "//" && e.args[0]->kind == Expr::Kind::IntLit && e.args[1]->kind == Expr::Kind::IntLit &&
          e.args[1]->value != 0) {
        Rational r(e.args[0]->value, e.args[1]->value);
        r.canonicalize();
        return r;
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

namespace {

enum class Tok { Ident, Int, Decimal, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  Loc loc;
};

std::vector<Token> lex(std::string_view s) {
  static const char* two[] = {"//", "<=", ">=", "==", "!="};
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < s.size() && s[i] != '\n') advance(1);
      continue;
    }
    const Loc loc{line, col};
    const std::size_t start = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) advance(1);
      out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), loc});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) advance(1);
      bool decimal = false;
      if (i + 1 < s.size() && s[i] == '.' && std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
        decimal = true;
        advance(1);
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) advance(1);
      }
      out.push_back({decimal ? Tok::Decimal : Tok::Int, std::string(s.substr(start, i - start)), loc});
      continue;
    }
    bool matched = false;
    for (const char* t : two) {
      if (s.substr(i, 2) == t) {
        advance(2);
        out.push_back({Tok::Punct, t, loc});
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string_view("(){};,:|!+-%<>=").find(c) != std::string_view::npos) {
      advance(1);
      out.push_back({Tok::Punct, std::string(1, c), loc});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", loc.line, loc.column);
  }
  out.push_back({Tok::End, "end of input", {line, col}});
  return out;
}

bool is_keyword(const std::string& s) {
  static const char* kw[] = {"void", "bool", "int", "if", "else", "while", "prob",
                             "return", "true", "false", "flip", "uniform"};
  for (const char* k : kw) {
    if (s == k) return true;
  }
  return false;
}

struct Signature {
  Type return_type;
  std::vector<Type> params;
};

class Parser {
public:
  Parser(const std::vector<Token>& toks, long max_int, const std::unordered_map<std::string, int>* procs,
         const std::vector<Signature>* sigs)
      : toks_(toks), max_int_(max_int), procs_(procs), sigs_(sigs) {}

  Program program() {
    Program prog;
    prog.max_int = max_int_;
    while (!(peek().kind == Tok::Punct && peek().text == "{")) {
      if (peek().kind == Tok::End) fail(peek(), "expected a procedure or the main block");
      prog.procedures.push_back(procedure());
    }
    Procedure& main = prog.main;
    main.name = "main";
    main.loc = peek().loc;
    current_ = &main;
    main_type_open_ = true;
    main.return_type = Type::Void;
    saw_main_return_ = false;
    begin_proc();
    main.body = block();
    main.slot_count = static_cast<int>(slot_types_.size());
    if (peek().kind != Tok::End) fail(peek(), "unexpected input after the main block");
    return prog;
  }

private:
  const std::vector<Token>& toks_;
  std::size_t p_ = 0;
  long max_int_;
  const std::unordered_map<std::string, int>* procs_;  // null in the signature pass
  const std::vector<Signature>* sigs_;
  Procedure* current_ = nullptr;
  bool main_type_open_ = false;
  bool saw_main_return_ = false;
  std::vector<std::unordered_map<std::string, int>> scopes_;
  std::vector<Type> slot_types_;

  bool checking() const { return procs_ != nullptr; }

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(p_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(p_++, toks_.size() - 1)]; }
  bool is(const char* punct) const { return peek().kind == Tok::Punct && peek().text == punct; }
  bool is_word(const char* w) const { return peek().kind == Tok::Ident && peek().text == w; }

  [[noreturn]] static void fail(const Token& t, const std::string& msg) {
    throw ParseError(msg, t.loc.line, t.loc.column);
  }
  [[noreturn]] static void fail(Loc loc, const std::string& msg) { throw ParseError(msg, loc.line, loc.column); }

  void expect(const char* punct) {
    if (!is(punct)) fail(peek(), std::string("expected '") + punct + "', found '" + peek().text + "'");
    ++p_;
  }

  std::string identifier() {
    const Token& t = peek();
    if (t.kind != Tok::Ident || is_keyword(t.text)) fail(t, "expected a name, found '" + t.text + "'");
    ++p_;
    return t.text;
  }

  std::optional<Type> type_word(bool allow_void) {
    if (is_word("int")) return ++p_, Type::Int;
    if (is_word("bool")) return ++p_, Type::Bool;
    if (allow_void && is_word("void")) return ++p_, Type::Void;
    return std::nullopt;
  }

  void begin_proc() {
    scopes_.assign(1, {});
    slot_types_.clear();
  }

  int declare(const std::string& name, Type t, Loc loc) {
    if (scopes_.back().count(name)) fail(loc, "'" + name + "' is already declared in this scope");
    const int slot = static_cast<int>(slot_types_.size());
    slot_types_.push_back(t);
    scopes_.back().emplace(name, slot);
    return slot;
  }

  std::optional<int> lookup(const std::string& name) const {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      if (auto f = it->find(name); f != it->end()) return f->second;
    }
    return std::nullopt;
  }

  Procedure procedure() {
    Procedure proc;
    proc.loc = peek().loc;
    auto rt = type_word(true);
    if (!rt) fail(peek(), "expected a return type");
    proc.return_type = *rt;
    proc.name = identifier();
    current_ = &proc;
    main_type_open_ = false;
    begin_proc();
    expect("(");
    if (!is(")")) {
      while (true) {
        const Loc loc = peek().loc;
        auto t = type_word(false);
        if (!t) fail(peek(), "expected a parameter type");
        std::string name = identifier();
        declare(name, *t, loc);
        proc.params.push_back(Param{*t, std::move(name)});
        if (!is(",")) break;
        ++p_;
      }
    }
    expect(")");
    if (!is("{")) fail(peek(), "expected '{'");
    proc.body = block();
    proc.slot_count = static_cast<int>(slot_types_.size());
    return proc;
  }

  StmtPtr block() {
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Block;
    s->loc = peek().loc;
    expect("{");
    scopes_.emplace_back();
    while (!is("}")) {
      if (peek().kind == Tok::End) fail(peek(), "unterminated block");
      s->body.push_back(statement());
    }
    scopes_.pop_back();
    ++p_;
    return s;
  }

  // A nested statement that is not a block still gets its own scope.
  StmtPtr scoped_statement() {
    scopes_.emplace_back();
    StmtPtr s = statement();
    scopes_.pop_back();
    return s;
  }

  StmtPtr statement() {
    const Token& t = peek();
    auto s = std::make_shared<Stmt>();
    s->loc = t.loc;
    if (is("{")) return block();
    if (is(";")) {
      ++p_;
      return s;
    }
    if (is_word("int") || is_word("bool")) {
      s->kind = Stmt::Kind::Decl;
      s->decl_type = *type_word(false);
      const Loc name_loc = peek().loc;
      s->name = identifier();
      if (is("=")) {
        ++p_;
        s->expr = expr();
        require(*s->expr, s->decl_type, "initializer of '" + s->name + "'");
      }
      expect(";");
      s->slot = declare(s->name, s->decl_type, name_loc);
      return s;
    }
    if (is_word("if") || is_word("while")) {
      const bool loop = is_word("while");
      ++p_;
      s->kind = loop ? Stmt::Kind::While : Stmt::Kind::If;
      s->expr = expr();
      require(*s->expr, Type::Bool, "condition");
      s->body.push_back(scoped_statement());
      if (!loop && is_word("else")) {
        ++p_;
        s->body.push_back(scoped_statement());
      }
      return s;
    }
    if (is_word("prob")) {
      ++p_;
      s->kind = Stmt::Kind::Prob;
      expect("{");
      Rational total;
      bool all_constant = true;
      while (!is("}")) {
        if (peek().kind == Tok::End) fail(peek(), "unterminated prob block");
        ExprPtr label = expr();
        require_probability(*label, "prob-block label");
        if (auto c = constant_probability(*label)) {
          total += *c;
        } else {
          all_constant = false;
        }
        expect(":");
        s->probs.push_back(std::move(label));
        s->body.push_back(scoped_statement());
      }
      ++p_;
      if (s->probs.empty()) fail(s->loc, "empty prob block");
      if (checking() && all_constant && total != 1) {
        fail(s->loc, "prob-block probabilities sum to " + to_compact_string(total) + ", not 1");
      }
      return s;
    }
    if (is_word("return")) {
      ++p_;
      s->kind = Stmt::Kind::Return;
      if (!is(";")) s->expr = expr();
      expect(";");
      check_return(*s);
      return s;
    }
    if (t.kind == Tok::Ident && !is_keyword(t.text) && peek(1).kind == Tok::Punct && peek(1).text == "=") {
      s->kind = Stmt::Kind::Assign;
      s->name = identifier();
      ++p_;
      s->expr = expr();
      expect(";");
      if (checking()) {
        auto slot = lookup(s->name);
        if (!slot) fail(s->loc, "undeclared variable '" + s->name + "'");
        s->slot = *slot;
        require(*s->expr, slot_types_[*slot], "assignment to '" + s->name + "'");
      }
      return s;
    }
    s->kind = Stmt::Kind::ExprStmt;
    s->expr = expr();
    expect(";");
    return s;
  }

  void check_return(const Stmt& s) {
    if (!checking()) return;
    Procedure& proc = *current_;
    if (main_type_open_) {
      const Type t = s.expr ? s.expr->type : Type::Void;
      if (t == Type::Prob) fail(s.loc, "main cannot return a probability");
      if (!saw_main_return_) {
        proc.return_type = t;
        saw_main_return_ = true;
      } else if (proc.return_type != t) {
        fail(s.loc, "main returns both " + std::string(to_string(proc.return_type)) + " and " +
                        std::string(to_string(t)));
      }
      return;
    }
    if (proc.return_type == Type::Void) {
      if (s.expr) fail(s.loc, "void procedure '" + proc.name + "' cannot return a value");
    } else {
      if (!s.expr) fail(s.loc, "procedure '" + proc.name + "' must return a value");
      require(*s.expr, proc.return_type, "return value");
    }
  }

  void require(const Expr& e, Type t, const std::string& what) {
    if (!checking()) return;
    if (e.type != t) {
      fail(e.loc, what + " must be " + std::string(to_string(t)) + ", found " + std::string(to_string(e.type)));
    }
  }

  void require_probability(const Expr& e, const std::string& what) {
    if (!checking()) return;
    if (e.type == Type::Prob) {
      if (auto c = constant_probability(e); c && *c > 1) fail(e.loc, what + " exceeds 1");
      return;
    }
    if (e.kind == Expr::Kind::IntLit && (e.value == 0 || e.value == 1)) return;
    fail(e.loc, what + " must be a probability, found " + std::string(to_string(e.type)));
  }

  // ---- expressions

  std::shared_ptr<Expr> node(Expr::Kind k, Loc loc) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->loc = loc;
    return e;
  }

  ExprPtr binary(std::string op, ExprPtr a, ExprPtr b, Loc loc) {
    auto e = node(Expr::Kind::Binary, loc);
    e->op = std::move(op);
    e->args = {std::move(a), std::move(b)};
    if (checking()) {
      const Type ta = e->args[0]->type, tb = e->args[1]->type;
      auto need_ints = [&] {
        if (ta != Type::Int || tb != Type::Int) {
          fail(loc, "operator '" + e->op + "' needs int operands, found " + std::string(to_string(ta)) + " and " +
                        std::string(to_string(tb)));
        }
      };
      if (e->op == "+" || e->op == "-" || e->op == "%") {
        need_ints();
        e->type = Type::Int;
      } else if (e->op == "//") {
        need_ints();
        e->type = Type::Prob;
      } else if (e->op == "==" || e->op == "!=") {
        if (ta != tb || (ta != Type::Int && ta != Type::Bool)) {
          fail(loc, "operator '" + e->op + "' needs two ints or two bools");
        }
        e->type = Type::Bool;
      } else {
        need_ints();
        e->type = Type::Bool;
      }
    }
    return e;
  }

  ExprPtr expr() {
    ExprPtr lhs = sum();
    static const char* cmp[] = {"<", "<=", ">", ">=", "==", "!="};
    for (const char* op : cmp) {
      if (is(op)) {
        const Loc loc = peek().loc;
        ++p_;
        return binary(op, lhs, sum(), loc);
      }
    }
    return lhs;
  }

  ExprPtr sum() {
    ExprPtr lhs = term();
    while (is("+") || is("-")) {
      const Token& op = next();
      lhs = binary(op.text, lhs, term(), op.loc);
    }
    return lhs;
  }

  ExprPtr term() {
    ExprPtr lhs = unary();
    while (is("%") || is("//")) {
      const Token& op = next();
      lhs = binary(op.text, lhs, unary(), op.loc);
    }
    return lhs;
  }

  ExprPtr unary() {
    if (is("!")) {
      const Loc loc = next().loc;
      auto e = node(Expr::Kind::Not, loc);
      e->args.push_back(unary());
      if (checking()) {
        require(*e->args[0], Type::Bool, "operand of '!'");
        e->type = Type::Bool;
      }
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    const Token& t = next();
    if (t.kind == Tok::Int) {
      auto e = node(Expr::Kind::IntLit, t.loc);
      if (t.text.size() > 12 || std::stol(t.text) > max_int_) {
        fail(t, "int literal " + t.text + " outside 0.." + std::to_string(max_int_));
      }
      e->value = std::stol(t.text);
      e->type = Type::Int;
      return e;
    }
    if (t.kind == Tok::Decimal) {
      auto e = node(Expr::Kind::ProbLit, t.loc);
      e->prob = parse_rational(t.text);
      e->type = Type::Prob;
      return e;
    }
    if (t.kind == Tok::Punct && t.text == "(") {
      ExprPtr first = expr();
      if (!is(":")) {
        expect(")");
        return first;
      }
      auto e = node(Expr::Kind::Choice, t.loc);
      Rational total;
      bool all_constant = true;
      ExprPtr label = first;
      while (true) {
        require_probability(*label, "choice label");
        if (auto c = constant_probability(*label)) total += *c;
        else all_constant = false;
        expect(":");
        ExprPtr value = expr();
        if (checking()) {
          if (value->type != Type::Int && value->type != Type::Bool) fail(value->loc, "choice values must be int or bool");
          if (!value->pure() || !label->pure()) fail(value->loc, "choice operands must not call or sample");
          if (e->args.empty()) e->type = value->type;
          else require(*value, e->type, "choice value");
        }
        e->args.push_back(label);
        e->args.push_back(value);
        if (!is("|")) break;
        ++p_;
        label = expr();
      }
      expect(")");
      if (checking() && all_constant && total != 1) {
        fail(t, "choice probabilities sum to " + to_compact_string(total) + ", not 1");
      }
      return e;
    }
    if (t.kind != Tok::Ident) fail(t, "expected an expression, found '" + t.text + "'");
    if (t.text == "true" || t.text == "false") {
      auto e = node(Expr::Kind::BoolLit, t.loc);
      e->value = t.text == "true";
      e->type = Type::Bool;
      return e;
    }
    if (t.text == "flip" || t.text == "uniform") {
      const bool flip = t.text == "flip";
      auto e = node(flip ? Expr::Kind::Flip : Expr::Kind::Uniform, t.loc);
      expect("(");
      e->args.push_back(expr());
      expect(")");
      if (flip) {
        require_probability(*e->args[0], "argument of flip");
        e->type = Type::Bool;
      } else {
        require(*e->args[0], Type::Int, "argument of uniform");
        const Expr& n = *e->args[0];
        if (checking() && n.kind == Expr::Kind::IntLit && (n.value < 1 || n.value > max_int_ + 1)) {
          fail(n.loc, "uniform(n) needs 1 <= n <= " + std::to_string(max_int_ + 1));
        }
        e->type = Type::Int;
      }
      return e;
    }
    if (is_keyword(t.text)) fail(t, "unexpected '" + t.text + "'");
    if (is("(")) {
      auto e = node(Expr::Kind::Call, t.loc);
      e->name = t.text;
      ++p_;
      if (!is(")")) {
        while (true) {
          e->args.push_back(expr());
          if (!is(",")) break;
          ++p_;
        }
      }
      expect(")");
      if (checking()) {
        auto it = procs_->find(t.text);
        if (it == procs_->end()) fail(t, "unknown procedure '" + t.text + "'");
        e->callee = it->second;
        const Signature& sig = (*sigs_)[it->second];
        if (sig.params.size() != e->args.size()) {
          fail(t, "'" + t.text + "' takes " + std::to_string(sig.params.size()) + " arguments, given " +
                      std::to_string(e->args.size()));
        }
        for (std::size_t i = 0; i < sig.params.size(); ++i) {
          require(*e->args[i], sig.params[i], "argument " + std::to_string(i + 1) + " of '" + t.text + "'");
        }
        e->type = sig.return_type;
      }
      return e;
    }
    auto e = node(Expr::Kind::Var, t.loc);
    e->name = t.text;
    if (checking()) {
      auto slot = lookup(t.text);
      if (!slot) fail(t, "undeclared variable '" + t.text + "'");
      e->slot = *slot;
      e->type = slot_types_[*slot];
    }
    return e;
  }
};

// Expression statements may only be calls or sampling; void calls may only
// appear as statements.
void check_void_usage(const Stmt& s);

void check_expr_void(const Expr& e, bool top) {
  if (e.kind == Expr::Kind::Call && e.type == Type::Void && !top) {
    throw ParseError("void procedure '" + e.name + "' used as a value", e.loc.line, e.loc.column);
  }
  for (const auto& a : e.args) check_expr_void(*a, false);
}

void check_void_usage(const Stmt& s) {
  if (s.expr) check_expr_void(*s.expr, s.kind == Stmt::Kind::ExprStmt);
  for (const auto& p : s.probs) check_expr_void(*p, false);
  for (const auto& b : s.body) check_void_usage(*b);
}

}  // namespace

Program parse_program(std::string_view text, const ProgramOptions& options) {
  if (options.max_int < 1) throw std::invalid_argument("max_int must be at least 1");
  const std::vector<Token> toks = lex(text);
  // Pass 1 collects signatures so that procedures may call later ones.
  Program shape = Parser(toks, options.max_int, nullptr, nullptr).program();
  std::unordered_map<std::string, int> index;
  std::vector<Signature> sigs;
  for (const Procedure& proc : shape.procedures) {
    if (proc.name == "main") throw ParseError("'main' is reserved for the main block", proc.loc.line, proc.loc.column);
    if (!index.emplace(proc.name, static_cast<int>(sigs.size())).second) {
      throw ParseError("procedure '" + proc.name + "' defined twice", proc.loc.line, proc.loc.column);
    }
    Signature sig{proc.return_type, {}};
    for (const Param& prm : proc.params) sig.params.push_back(prm.type);
    sigs.push_back(std::move(sig));
  }
  Program prog = Parser(toks, options.max_int, &index, &sigs).program();
  for (const Procedure& proc : prog.procedures) check_void_usage(*proc.body);
  check_void_usage(*prog.main.body);
  return prog;
}

}  // namespace ppscert
