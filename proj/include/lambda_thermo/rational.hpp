#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

namespace lambda_thermo {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// "numerator/denominator" (denominator 1 is still written out).
std::string to_string(const Rational& q);

/// Parses "p/q", an integer, or a finite decimal such as "0.25".
Rational parse_rational(std::string_view text);

double to_double(const Rational& q);

Rational pow(const Rational& base, unsigned exponent);

BigInt binomial(unsigned n, unsigned k);

} // namespace lambda_thermo
