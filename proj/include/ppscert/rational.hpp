#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace ppscert {

/// Arbitrary-precision rational, always kept in lowest terms.
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses `num/den`, `num//den`, an integer, or a decimal such as `0.125` or `1e-3`.
/// The result is exact. Throws std::invalid_argument on malformed input.
Rational parse_rational(std::string_view text);

/// `num/den` in lowest terms; the denominator is always printed.
std::string to_fraction_string(const Rational& value);

/// Shortest readable form: `3`, `1/2`.
std::string to_compact_string(const Rational& value);

/// Exact value of a finite binary64 number.
Rational exact_from_double(double value);

/// Nearest binary64 to value (ties to even). mpq's get_d truncates.
double nearest_double(const Rational& value);

/// Smallest rational >= value whose denominator is at most max_denominator.
Rational round_up_bounded(const Rational& value, const Integer& max_denominator);

/// Number of decimal digits of |value|, 1 for zero.
std::size_t decimal_digits(const Integer& value);

}  // namespace ppscert
