#include "ppscert/pps_parser.hpp"

#include <cctype>
#include <map>
#include <unordered_map>

#include "ppscert/errors.hpp"

namespace ppscert {

namespace {

enum class Tok { Name, Number, Eq, Plus, Star, Caret, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
}

std::vector<Token> lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (s[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
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
    const std::size_t l = line, cl = col, start = i;
    if (c == '=' || c == '+' || c == '*' || c == '^') {
      advance(1);
      out.push_back({c == '=' ? Tok::Eq : c == '+' ? Tok::Plus : c == '*' ? Tok::Star : Tok::Caret, {}, l, cl});
      continue;
    }
    if (c == '<') {
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '>' && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
      if (j >= s.size() || s[j] != '>') throw ParseError("unterminated <...> name", l, cl);
      advance(j + 1 - i);
      out.push_back({Tok::Name, std::string(s.substr(start, i - start)), l, cl});
      continue;
    }
    if (name_start(c)) {
      while (i < s.size() && name_char(s[i])) advance(1);
      out.push_back({Tok::Name, std::string(s.substr(start, i - start)), l, cl});
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      // digits, '.', exponent, and a '/' or '//' denominator
      while (i < s.size()) {
        const char d = s[i];
        if (std::isdigit(static_cast<unsigned char>(d)) || d == '.' || d == '/') {
          advance(1);
        } else if ((d == 'e' || d == 'E') && i + 1 < s.size() &&
                   (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '-' || s[i + 1] == '+')) {
          advance(2);
        } else {
          break;
        }
      }
      out.push_back({Tok::Number, std::string(s.substr(start, i - start)), l, cl});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
  }
  out.push_back({Tok::End, {}, line, col});
  return out;
}

struct RawTerm {
  Rational coefficient;
  std::vector<std::pair<Token, std::uint32_t>> factors;
};

struct RawDecl {
  Token name;
  std::vector<RawTerm> terms;
};

}  // namespace

PolySystem parse_pps(std::string_view text) {
  const std::vector<Token> toks = lex(text);
  std::size_t p = 0;
  auto at = [&](std::size_t k) -> const Token& { return toks[std::min(p + k, toks.size() - 1)]; };
  auto starts_decl = [&] { return at(0).kind == Tok::Name && at(1).kind == Tok::Eq; };

  std::vector<RawDecl> decls;
  std::unordered_map<std::string, VarId> index;
  while (at(0).kind != Tok::End) {
    if (!starts_decl()) throw ParseError("expected '<name> ='", at(0).line, at(0).column);
    RawDecl decl{at(0), {}};
    if (index.count(decl.name.text)) {
      throw ParseError("variable '" + decl.name.text + "' defined twice", decl.name.line, decl.name.column);
    }
    index.emplace(decl.name.text, static_cast<VarId>(decls.size()));
    p += 2;
    const bool empty = at(0).kind == Tok::End || starts_decl();
    while (!empty) {
      RawTerm term{Rational(1), {}};
      bool any = false;
      if (at(0).kind == Tok::Number) {
        try {
          term.coefficient = parse_rational(at(0).text);
        } catch (const std::invalid_argument&) {
          throw ParseError("malformed coefficient '" + at(0).text + "'", at(0).line, at(0).column);
        }
        ++p;
        any = true;
      }
      while (at(0).kind == Tok::Name && !starts_decl()) {
        Token name = at(0);
        ++p;
        std::uint32_t exponent = 1;
        if (at(0).kind == Tok::Caret) {
          ++p;
          const Token& e = at(0);
          bool ok = e.kind == Tok::Number && !e.text.empty() && e.text.size() <= 9;
          for (char c : e.text) ok = ok && std::isdigit(static_cast<unsigned char>(c));
          if (!ok || std::stoul(e.text) == 0) throw ParseError("exponent must be a positive integer", e.line, e.column);
          exponent = static_cast<std::uint32_t>(std::stoul(e.text));
          ++p;
        }
        term.factors.emplace_back(std::move(name), exponent);
        any = true;
        if (at(0).kind == Tok::Star) {
          ++p;
          if (at(0).kind != Tok::Name) throw ParseError("expected a variable after '*'", at(0).line, at(0).column);
        }
      }
      if (!any) throw ParseError("expected a term", at(0).line, at(0).column);
      decl.terms.push_back(std::move(term));
      if (at(0).kind != Tok::Plus) break;
      ++p;
    }
    if (at(0).kind != Tok::End && !starts_decl()) {
      throw ParseError("unexpected token in polynomial", at(0).line, at(0).column);
    }
    decls.push_back(std::move(decl));
  }

  std::vector<std::string> names;
  std::vector<std::vector<Monomial>> equations;
  for (auto& d : decls) {
    names.push_back(d.name.text);
    std::vector<Monomial> eq;
    for (auto& t : d.terms) {
      Monomial m{t.coefficient, {}};
      for (auto& [tok, exponent] : t.factors) {
        auto it = index.find(tok.text);
        if (it == index.end()) throw ParseError("undefined variable '" + tok.text + "'", tok.line, tok.column);
        m.factors.push_back(Factor{it->second, exponent});
      }
      eq.push_back(std::move(m));
    }
    equations.push_back(std::move(eq));
  }
  return PolySystem(std::move(names), std::move(equations));
}

}  // namespace ppscert
