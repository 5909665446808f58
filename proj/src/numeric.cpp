#include "tablecount/numeric.hpp"

#include <cmath>
#include <cstdio>

#include "tablecount/errors.hpp"

namespace tablecount {

std::string to_string(const Rational& v) { return v.get_str(); }

std::string to_string(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

// Decimal literal such as "-1.25e-3", converted without rounding.
Rational parse_decimal(const std::string& text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) negative = text[pos++] == '-';
  std::string digits;
  long exponent = 0;
  bool seen_point = false;
  bool any_digit = false;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (ch >= '0' && ch <= '9') {
      digits.push_back(ch);
      any_digit = true;
      if (seen_point) --exponent;
    } else if (ch == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw ValidationError("malformed number '" + text + "'");
  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') throw ValidationError("malformed number '" + text + "'");
    std::size_t used = 0;
    long e = 0;
    try {
      e = std::stol(text.substr(pos + 1), &used);
    } catch (const std::exception&) {
      throw ValidationError("malformed exponent in '" + text + "'");
    }
    if (pos + 1 + used != text.size()) throw ValidationError("malformed number '" + text + "'");
    exponent += e;
  }
  Integer mantissa(digits, 10);
  Integer ten_pow;
  mpz_ui_pow_ui(ten_pow.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  Rational q = exponent < 0 ? Rational(mantissa, ten_pow) : Rational(mantissa * ten_pow);
  q.canonicalize();
  return negative ? Rational(-q) : q;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  if (text.find_first_of(".eE") != std::string::npos) return parse_decimal(text);
  Rational q;
  if (text.empty() || q.set_str(text, 10) != 0) throw ValidationError("malformed rational '" + text + "'");
  if (text.find('/') != std::string::npos && sgn(q.get_den()) == 0) {
    throw ValidationError("zero denominator in '" + text + "'");
  }
  q.canonicalize();
  return q;
}

}  // namespace tablecount
