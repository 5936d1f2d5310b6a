#pragma once

// The pPL mini language: recursive procedures over bool and bounded int (0..M),
// with flip/uniform sampling, choice expressions and prob-blocks.
//
//   program   := procedure* block
//   procedure := ('void'|'bool'|'int') name '(' [type name {',' type name}] ')' block
//   stmt      := block | type name ['=' expr] ';' | name '=' expr ';'
//              | 'if' expr stmt ['else' stmt] | 'while' expr stmt
//              | 'prob' '{' {expr ':' stmt} '}' | 'return' [expr] ';' | expr ';' | ';'
//   expr      := sum [('<'|'<='|'>'|'>='|'=='|'!=') sum]
//   sum       := term {('+'|'-') term}
//   term      := unary {('%'|'//') unary}
//   unary     := '!' unary | primary
//   primary   := int | decimal | 'true' | 'false' | name | name '(' args ')'
//              | 'flip' '(' expr ')' | 'uniform' '(' expr ')' | '(' expr ')'
//              | '(' expr ':' expr {'|' expr ':' expr} ')'
//
// `a//b` on ints is the probability a/b; decimals are probabilities too.
// `#` starts a line comment.

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppscert/rational.hpp"

namespace ppscert {

enum class Type { Void, Bool, Int, Prob };

std::string_view to_string(Type t);

struct Loc {
  std::size_t line = 1;
  std::size_t column = 1;
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { IntLit, BoolLit, ProbLit, Var, Not, Binary, Call, Flip, Uniform, Choice };
  Kind kind = Kind::IntLit;
  Loc loc;
  long value = 0;         // IntLit, BoolLit (0/1)
  Rational prob;          // ProbLit
  std::string name;       // Var, Call
  std::string op;         // Binary
  std::vector<ExprPtr> args;  // operands; Choice: p1, e1, p2, e2, ...
  // Filled in by the checker.
  Type type = Type::Void;
  int slot = -1;          // Var
  int callee = -1;        // Call

  /// No calls and no sampling anywhere inside.
  bool pure() const;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

struct Stmt {
  enum class Kind { Block, Decl, Assign, If, While, Prob, ExprStmt, Return, Empty };
  Kind kind = Kind::Empty;
  Loc loc;
  std::vector<StmtPtr> body;   // Block items; If: then [, else]; While: body; Prob: branches
  ExprPtr expr;                // Decl/Assign init, If/While condition, ExprStmt, Return value
  std::vector<ExprPtr> probs;  // Prob labels
  std::string name;            // Decl, Assign
  Type decl_type = Type::Void;
  int slot = -1;               // Decl, Assign (checker)
};

struct Param {
  Type type;
  std::string name;
};

struct Procedure {
  std::string name;
  Type return_type = Type::Void;
  std::vector<Param> params;
  StmtPtr body;
  Loc loc;
  /// Parameters first, then locals in declaration order (checker).
  int slot_count = 0;
};

struct Program {
  std::vector<Procedure> procedures;
  /// The trailing block; its return type is that of its `return` statements.
  Procedure main;
  long max_int = 255;
};

struct ProgramOptions {
  long max_int = 255;
};

/// Parses and type-checks. Throws ParseError on syntax and static errors
/// (types, undeclared names, constant prob-blocks not summing to 1, int literals
/// outside 0..M).
Program parse_program(std::string_view text, const ProgramOptions& options = {});

/// Constant value of a probability expression built from literals, if any.
std::optional<Rational> constant_probability(const Expr& e);

}  // namespace ppscert
