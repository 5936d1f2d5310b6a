#include "ppscert/rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "ppscert/errors.hpp"

namespace ppscert {

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

Integer parse_integer(std::string_view s) {
  if (!all_digits(s)) throw std::invalid_argument("malformed integer '" + std::string(s) + "'");
  return Integer(std::string(s), 10);
}

Integer pow10(unsigned long e) {
  Integer r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

Rational parse_decimal(std::string_view s) {
  std::string_view mantissa = s;
  long exponent = 0;
  if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
    mantissa = s.substr(0, e);
    std::string_view exp_text = s.substr(e + 1);
    bool negative = false;
    if (!exp_text.empty() && (exp_text[0] == '+' || exp_text[0] == '-')) {
      negative = exp_text[0] == '-';
      exp_text.remove_prefix(1);
    }
    if (!all_digits(exp_text) || exp_text.size() > 6) {
      throw std::invalid_argument("malformed exponent in '" + std::string(s) + "'");
    }
    exponent = std::stol(std::string(exp_text));
    if (negative) exponent = -exponent;
  }
  std::string digits;
  long scale = 0;
  if (auto dot = mantissa.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = mantissa.substr(0, dot);
    std::string_view frac_part = mantissa.substr(dot + 1);
    if ((int_part.empty() && frac_part.empty()) || (!int_part.empty() && !all_digits(int_part)) ||
        (!frac_part.empty() && !all_digits(frac_part))) {
      throw std::invalid_argument("malformed decimal '" + std::string(s) + "'");
    }
    digits = std::string(int_part) + std::string(frac_part);
    scale = static_cast<long>(frac_part.size());
  } else {
    if (!all_digits(mantissa)) throw std::invalid_argument("malformed number '" + std::string(s) + "'");
    digits = std::string(mantissa);
  }
  Rational result{Integer(digits, 10)};
  long shift = exponent - scale;
  if (shift > 0) {
    result *= Rational(pow10(static_cast<unsigned long>(shift)));
  } else if (shift < 0) {
    result /= Rational(pow10(static_cast<unsigned long>(-shift)));
  }
  result.canonicalize();
  return result;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty number");
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    std::string_view num = text.substr(0, slash);
    std::string_view den = text.substr(slash + 1);
    if (!den.empty() && den[0] == '/') den.remove_prefix(1);
    Integer d = parse_integer(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    Rational r(parse_integer(num), d);
    r.canonicalize();
    return r;
  }
  return parse_decimal(text);
}

std::string to_fraction_string(const Rational& value) {
  return value.get_num().get_str() + "/" + value.get_den().get_str();
}

std::string to_compact_string(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  return to_fraction_string(value);
}

Rational exact_from_double(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("non-finite value has no rational form");
  Rational r(value);
  r.canonicalize();
  return r;
}

// Stern-Brocot descent with batched steps. The invariant lo < frac < hi holds
// throughout; hi is always the best upper neighbour found so far.
Rational round_up_bounded(const Rational& value, const Integer& max_denominator) {
  if (max_denominator < 1) throw std::invalid_argument("denominator bound must be positive");
  if (value.get_den() <= max_denominator) return value;

  Integer whole;
  mpz_fdiv_q(whole.get_mpz_t(), value.get_num().get_mpz_t(), value.get_den().get_mpz_t());
  const Rational frac = value - Rational(whole);

  Integer lo_p = 0, lo_q = 1, hi_p = 1, hi_q = 1;
  while (lo_q + hi_q <= max_denominator) {
    Rational mediant(lo_p + hi_p, lo_q + hi_q);
    mediant.canonicalize();
    if (mediant < frac) {
      // largest k with (lo + k*hi) < frac
      Rational bound = (frac * Rational(lo_q) - Rational(lo_p)) / (Rational(hi_p) - frac * Rational(hi_q));
      Integer k;
      mpz_cdiv_q(k.get_mpz_t(), bound.get_num().get_mpz_t(), bound.get_den().get_mpz_t());
      k -= 1;
      Integer k_den = (max_denominator - lo_q) / hi_q;
      if (k_den < k) k = k_den;
      lo_p += k * hi_p;
      lo_q += k * hi_q;
    } else if (mediant > frac) {
      // largest k with (hi + k*lo) > frac
      Rational bound = (Rational(hi_p) - frac * Rational(hi_q)) / (frac * Rational(lo_q) - Rational(lo_p));
      Integer k;
      mpz_cdiv_q(k.get_mpz_t(), bound.get_num().get_mpz_t(), bound.get_den().get_mpz_t());
      k -= 1;
      Integer k_den = (max_denominator - hi_q) / lo_q;
      if (k_den < k) k = k_den;
      hi_p += k * lo_p;
      hi_q += k * lo_q;
    } else {
      return value;
    }
  }
  Rational result(hi_p, hi_q);
  result.canonicalize();
  return result + Rational(whole);
}

std::size_t decimal_digits(const Integer& value) {
  if (value == 0) return 1;
  Integer a = abs(value);
  return a.get_str().size();
}

std::string_view to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::Certified: return "Certified";
    case Outcome::GuessBudgetExhausted: return "GuessBudgetExhausted";
    case Outcome::Infeasible: return "Infeasible";
    case Outcome::ExactCheckFailed: return "ExactCheckFailed";
  }
  return "Unknown";
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

SolveError::SolveError(Outcome outcome, const std::string& message)
    : std::runtime_error(message), outcome_(outcome) {}

double nearest_double(const Rational& value) {
  const double t = value.get_d();
  if (!std::isfinite(t)) return t;
  const Rational exact_t = exact_from_double(t);
  if (exact_t == value) return t;
  const double away = std::nextafter(t, value > exact_t ? HUGE_VAL : -HUGE_VAL);
  if (!std::isfinite(away)) return t;
  const Rational dt = abs(Rational(value - exact_t));
  const Rational da = abs(Rational(exact_from_double(away) - value));
  if (dt < da) return t;
  if (da < dt) return away;
  std::int64_t bits;
  std::memcpy(&bits, &t, sizeof bits);
  return (bits & 1) == 0 ? t : away;
}

}  // namespace ppscert
