#pragma once

// Independent oracles and random-instance helpers shared by the test binaries.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "tablecount/counting.hpp"
#include "tablecount/permanent.hpp"
#include "tablecount/polynomial.hpp"

namespace testing {

using namespace tablecount;

/// Σ over all N! permutations, by std::next_permutation.
template <class C>
C naive_permanent(const SquareMatrix<C>& m) {
  std::vector<std::size_t> sigma(m.size());
  std::iota(sigma.begin(), sigma.end(), 0);
  C total(0);
  do {
    C prod(1);
    for (std::size_t i = 0; i < sigma.size(); ++i) prod *= m(i, sigma[i]);
    total += prod;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return total;
}

inline Rational random_rational(std::mt19937_64& gen, int lo = -5, int hi = 5, int max_den = 4) {
  std::uniform_int_distribution<int> num(lo, hi), den(1, max_den);
  Rational v(num(gen), den(gen));
  v.canonicalize();
  return v;
}

inline SquareMatrix<Rational> random_matrix(std::mt19937_64& gen, std::size_t n) {
  SquareMatrix<Rational> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = random_rational(gen);
  }
  return m;
}

inline LinearForm<Rational> random_integer_form(std::mt19937_64& gen, std::size_t n, int lo = -3, int hi = 3) {
  std::uniform_int_distribution<int> d(lo, hi);
  LinearForm<Rational> f{std::vector<Rational>(n)};
  for (auto& c : f.coeffs) c = d(gen);
  return f;
}

/// ∏ forms, expanded monomial by monomial.
template <class C>
SparsePolynomial<C> expand_product(const std::vector<LinearForm<C>>& forms, std::size_t n) {
  SparsePolynomial<C> p = SparsePolynomial<C>::constant(n, C(1));
  for (const auto& f : forms) p = poly_mul(p, expand_form_power(f, 1));
  return p;
}

/// Σ over tables with these margins of ∏ w^d / d! (fisher_yates) or ∏ w^d.
template <class C>
C weighted_bruteforce(const Margins& margins, const std::vector<std::vector<C>>& w, bool divide_factorials,
                      unsigned entry_cap = 0) {
  C total(0);
  const std::size_t n = margins.num_cols();
  for_each_table(margins, entry_cap, [&](const std::vector<unsigned>& d) {
    C term(1);
    for (std::size_t c = 0; c < d.size(); ++c) {
      for (unsigned e = 0; e < d[c]; ++e) term *= w[c / n][c % n];
      if (divide_factorials) term /= from_integer<C>(factorial(d[c]));
    }
    total += term;
  });
  return total;
}

/// Every (rows, cols) pair with 1 ≤ m, n ≤ max_dim, positive entries and a
/// common total N ≤ max_total.
inline std::vector<Margins> margin_grid(std::size_t max_dim, unsigned max_total) {
  std::vector<std::vector<std::vector<unsigned>>> by_total(max_total + 1);
  std::vector<unsigned> cur;
  std::function<void(unsigned)> rec = [&](unsigned sum) {
    if (!cur.empty()) by_total[sum].push_back(cur);
    if (cur.size() == max_dim) return;
    for (unsigned v = 1; sum + v <= max_total; ++v) {
      cur.push_back(v);
      rec(sum + v);
      cur.pop_back();
    }
  };
  rec(0);
  std::vector<Margins> out;
  for (unsigned total = 1; total <= max_total; ++total) {
    for (const auto& r : by_total[total]) {
      for (const auto& c : by_total[total]) out.emplace_back(r, c);
    }
  }
  return out;
}

}  // namespace testing
