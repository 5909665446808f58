#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <vector>

#include <gmpxx.h>

namespace tablecount {

using Integer = mpz_class;
using Rational = mpq_class;

template <class C>
inline constexpr bool is_exact_v = std::is_same_v<C, Rational>;

/// Factorials 0!..n!, grown on demand. Each operation owns its table, so no state is shared.
class FactorialTable {
public:
  FactorialTable() : values_{Integer(1)} {}

  const Integer& operator()(std::size_t n) {
    while (values_.size() <= n) {
      values_.push_back(values_.back() * static_cast<unsigned long>(values_.size()));
    }
    return values_[n];
  }

  std::size_t size() const { return values_.size(); }

private:
  std::vector<Integer> values_;
};

inline Integer factorial(unsigned long n) {
  Integer out;
  mpz_fac_ui(out.get_mpz_t(), n);
  return out;
}

inline Integer binomial(unsigned long n, unsigned long k) {
  Integer out;
  mpz_bin_uiui(out.get_mpz_t(), n, k);
  return out;
}

/// Converts an exact integer into coefficient type C.
template <class C>
C from_integer(const Integer& v) {
  if constexpr (is_exact_v<C>) {
    return Rational(v);
  } else {
    return static_cast<C>(v.get_d());
  }
}

template <class C>
double to_double(const C& v) {
  if constexpr (is_exact_v<C>) {
    return v.get_d();
  } else {
    return static_cast<double>(v);
  }
}

template <class C>
bool is_zero(const C& v) {
  if constexpr (is_exact_v<C>) {
    return sgn(v) == 0;
  } else {
    return v == C(0);
  }
}

std::string to_string(const Rational& v);
std::string to_string(double v);
Rational parse_rational(const std::string& text);

}  // namespace tablecount
