#include "lambda_thermo/rational.hpp"

#include "lambda_thermo/error.hpp"

#include <cctype>

namespace lambda_thermo {

std::string to_string(const Rational& q)
{
    return numerator(q).str() + "/" + denominator(q).str();
}

namespace {

BigInt parse_integer(std::string_view s)
{
    if (s.empty()) throw DomainError("empty integer in rational literal");
    std::size_t i = 0;
    bool negative = false;
    if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        i = 1;
    }
    if (i == s.size()) throw DomainError("malformed rational literal");
    BigInt value = 0;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw DomainError("malformed rational literal: '" + std::string(s) + "'");
        value = value * 10 + (s[i] - '0');
    }
    return negative ? BigInt(-value) : value;
}

} // namespace

Rational parse_rational(std::string_view text)
{
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        BigInt num = parse_integer(text.substr(0, slash));
        BigInt den = parse_integer(text.substr(slash + 1));
        if (den == 0) throw DomainError("zero denominator in rational literal");
        return Rational(num, den);
    }
    if (auto dot = text.find('.'); dot != std::string_view::npos) {
        std::string digits(text.substr(0, dot));
        std::string_view frac = text.substr(dot + 1);
        digits += frac;
        if (digits.empty() || digits == "-" || digits == "+")
            throw DomainError("malformed rational literal");
        BigInt den = 1;
        for (std::size_t k = 0; k < frac.size(); ++k) den *= 10;
        return Rational(parse_integer(digits), den);
    }
    return Rational(parse_integer(text));
}

double to_double(const Rational& q)
{
    return q.convert_to<double>();
}

Rational pow(const Rational& base, unsigned exponent)
{
    Rational result = 1;
    Rational b = base;
    while (exponent) {
        if (exponent & 1u) result *= b;
        b *= b;
        exponent >>= 1;
    }
    return result;
}

BigInt binomial(unsigned n, unsigned k)
{
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

} // namespace lambda_thermo
