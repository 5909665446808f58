#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tablecount/errors.hpp"
#include "tablecount/numeric.hpp"
#include "tablecount/polynomial.hpp"

namespace tablecount {

/// Σ coeff·y_index over the basis variables y₁..y_k.
template <class C>
using Combination = std::vector<std::pair<std::size_t, C>>;

/// coeff · ∏ (combination)^exponent.
template <class C>
struct FormProductTerm {
  C coeff;
  std::vector<std::pair<Combination<C>, unsigned>> powers;
};

/// A polynomial in the basis variables, kept as a sum of products of powers
/// of linear combinations so it can be expanded either in the k basis
/// variables or, through the basis forms, in the original n variables.
template <class C>
struct LowRankFactor {
  std::vector<FormProductTerm<C>> terms;
};

/// H(x) = ∏ᵢ factors[row_factor[i]](ℓ₁(x),…,ℓ_k(x)) with ℓ = basis.
template <class C>
struct LowRankProduct {
  std::size_t num_vars = 0;
  std::vector<LinearForm<C>> basis;
  std::vector<LowRankFactor<C>> factors;
  std::vector<std::size_t> row_factor;

  std::size_t rank() const { return basis.size(); }
};

enum class PairingRoute {
  automatic,  ///< reduced when rank < n, direct otherwise
  reduced,    ///< pair in the k basis variables
  direct,     ///< expand H in the n original variables
};

std::string to_string(PairingRoute route);

template <class C>
struct PairingResult {
  C value;
  PairingRoute route = PairingRoute::automatic;
  std::size_t rank = 0;
  /// Terms of the two polynomials finally paired (q and ĝ, or H and the target).
  std::size_t left_terms = 0;
  std::size_t right_terms = 0;
};

namespace detail {

template <class C>
LinearForm<C> dense_combination(const Combination<C>& comb, std::size_t k) {
  LinearForm<C> f{std::vector<C>(k, C(0))};
  for (const auto& [idx, c] : comb) f.coeffs.at(idx) += c;
  return f;
}

template <class C>
LinearForm<C> compose(const Combination<C>& comb, const std::vector<LinearForm<C>>& basis, std::size_t n) {
  LinearForm<C> f{std::vector<C>(n, C(0))};
  for (const auto& [idx, c] : comb) {
    const auto& b = basis.at(idx);
    for (std::size_t j = 0; j < n; ++j) f.coeffs[j] += c * b.coeffs[j];
  }
  return f;
}

template <class C>
SparsePolynomial<C> expand_term(const FormProductTerm<C>& term, std::size_t vars,
                                const std::function<LinearForm<C>(const Combination<C>&)>& realize,
                                const Truncation& trunc, std::size_t max_terms) {
  SparsePolynomial<C> prod = SparsePolynomial<C>::constant(vars, term.coeff);
  for (const auto& [comb, e] : term.powers) {
    prod = poly_mul(prod, expand_form_power(realize(comb), e, trunc), trunc, max_terms);
  }
  return prod;
}

template <class C>
SparsePolynomial<C> expand_factor(const LowRankFactor<C>& factor, std::size_t vars,
                                  const std::function<LinearForm<C>(const Combination<C>&)>& realize,
                                  const Truncation& trunc, std::size_t max_terms) {
  // Power sums with a common coefficient and exponent (the h̃ shape) go
  // through the monomial-major expansion.
  const auto& terms = factor.terms;
  const bool power_sum =
      !terms.empty() && std::all_of(terms.begin(), terms.end(), [&](const FormProductTerm<C>& t) {
        return t.powers.size() == 1 && t.powers[0].second == terms[0].powers[0].second && t.coeff == terms[0].coeff;
      });
  if (power_sum) {
    std::vector<LinearForm<C>> forms;
    forms.reserve(terms.size());
    for (const auto& t : terms) forms.push_back(realize(t.powers[0].first));
    auto sum = power_sum_expansion(forms, vars, terms[0].powers[0].second, trunc, max_terms);
    return sum *= terms[0].coeff;
  }
  SparsePolynomial<C> out(vars);
  for (const auto& t : terms) {
    out += expand_term(t, vars, realize, trunc, max_terms);
    if (out.size() > max_terms) {
      throw BudgetError("factor expansion exceeds term cap of " + std::to_string(max_terms));
    }
  }
  return out;
}

template <class C>
PairingRoute resolve(const LowRankProduct<C>& h, PairingRoute route) {
  if (route != PairingRoute::automatic) return route;
  return h.rank() < h.num_vars ? PairingRoute::reduced : PairingRoute::direct;
}

}  // namespace detail

/// The polynomial q(y₁..y_k) = ∏ factors, expanded in the basis variables.
template <class C>
SparsePolynomial<C> expand_in_basis(const LowRankProduct<C>& h, std::size_t max_terms = kDefaultTermCap) {
  const std::size_t k = h.rank();
  if (k == 0) throw ValidationError("low-rank product has an empty basis");
  std::function<LinearForm<C>(const Combination<C>&)> realize = [k](const Combination<C>& comb) {
    return detail::dense_combination(comb, k);
  };
  std::map<std::size_t, SparsePolynomial<C>> cache;
  SparsePolynomial<C> q = SparsePolynomial<C>::constant(k, C(1));
  for (std::size_t f : h.row_factor) {
    auto it = cache.find(f);
    if (it == cache.end()) {
      it = cache.emplace(f, detail::expand_factor(h.factors.at(f), k, realize, Truncation{}, max_terms)).first;
    }
    q = poly_mul(q, it->second, max_terms);
  }
  return q;
}

/// H expanded in the original n variables, restricted by `trunc`.
template <class C>
SparsePolynomial<C> expand_in_variables(const LowRankProduct<C>& h, const Truncation& trunc = {},
                                        std::size_t max_terms = kDefaultTermCap) {
  const std::size_t n = h.num_vars;
  std::function<LinearForm<C>(const Combination<C>&)> realize = [&](const Combination<C>& comb) {
    return detail::compose(comb, h.basis, n);
  };
  std::map<std::size_t, SparsePolynomial<C>> cache;
  SparsePolynomial<C> out = SparsePolynomial<C>::constant(n, C(1));
  for (std::size_t f : h.row_factor) {
    auto it = cache.find(f);
    if (it == cache.end()) it = cache.emplace(f, detail::expand_factor(h.factors.at(f), n, realize, trunc, max_terms)).first;
    out = poly_mul(out, it->second, trunc, max_terms);
  }
  return out;
}

/// Coefficient of x₁^c₁⋯xₙ^cₙ in H, computed as ⟨H, xᶜ⟩/∏cⱼ!.
template <class C>
PairingResult<C> pair_with_monomial(const LowRankProduct<C>& h, const std::vector<unsigned>& c,
                                    PairingRoute route = PairingRoute::automatic,
                                    std::size_t max_terms = kDefaultTermCap) {
  if (c.size() != h.num_vars) {
    throw ValidationError("target monomial has " + std::to_string(c.size()) + " exponents for " +
                          std::to_string(h.num_vars) + " variables");
  }
  PairingResult<C> result{C(0), detail::resolve(h, route), h.rank()};
  if (result.route == PairingRoute::reduced) {
    try {
      const auto q = expand_in_basis(h, max_terms);
      std::vector<LinearForm<C>> g_forms;
      for (std::size_t j = 0; j < c.size(); ++j) {
        g_forms.insert(g_forms.end(), c[j], LinearForm<C>::coordinate(h.num_vars, j));
      }
      result.left_terms = q.size();
      Integer denom = 1;
      for (unsigned e : c) denom *= factorial(e);
      result.value = reduced_pairing(q, h.basis, g_forms, max_terms) / from_integer<C>(denom);
    } catch (const BudgetError& e) {
      throw BudgetError(std::string(e.what()) + " [reduced pairing over rank " + std::to_string(h.rank()) +
                        " at degree " + std::to_string(degree(c)) + "; up to " +
                        binomial(h.rank() + degree(c) - 1, degree(c)).get_str() + " monomials per side]");
    }
    return result;
  }
  Truncation trunc;
  trunc.max_exponents = c;
  const auto full = expand_in_variables(h, trunc, max_terms);
  result.left_terms = full.size();
  result.right_terms = 1;
  result.value = full.coefficient(c);
  return result;
}

/// ⟨Q, H⟩ for Q(x) = ∏ₖ Σ_{c∈Sₖ} xₖᶜ/c!: the total coefficient of H over all
/// exponent vectors with aₖ ∈ Sₖ for every k.
template <class C>
PairingResult<C> pair_with_column_sets(const LowRankProduct<C>& h, const std::vector<std::set<unsigned>>& sets,
                                       unsigned total_degree, PairingRoute route = PairingRoute::automatic,
                                       std::size_t max_terms = kDefaultTermCap) {
  if (sets.size() != h.num_vars) {
    throw ValidationError(std::to_string(sets.size()) + " column sets for " + std::to_string(h.num_vars) +
                          " columns");
  }
  PairingResult<C> result{C(0), detail::resolve(h, route), h.rank()};
  for (const auto& s : sets) {
    if (s.empty()) return result;
  }
  if (result.route == PairingRoute::reduced) {
    const std::size_t k = h.rank();
    const auto q = expand_in_basis(h, max_terms);
    Truncation trunc;
    trunc.max_degree = total_degree;
    trunc.max_exponents = q.max_exponents();
    SparsePolynomial<C> q_hat = SparsePolynomial<C>::constant(k, C(1));
    FactorialTable fact;
    for (std::size_t col = 0; col < sets.size(); ++col) {
      // xₖ carried to Σᵢ ⟨ℓᵢ, eₖ⟩ yᵢ.
      LinearForm<C> transported{std::vector<C>(k)};
      for (std::size_t i = 0; i < k; ++i) transported.coeffs[i] = h.basis[i].coeffs[col];
      SparsePolynomial<C> choice(k);
      for (unsigned e : sets[col]) {
        if (e > total_degree) continue;
        accumulate_form_power(choice, transported, e, C(1) / from_integer<C>(fact(e)), trunc);
      }
      q_hat = poly_mul(q_hat, choice, trunc, max_terms);
    }
    result.left_terms = q.size();
    result.right_terms = q_hat.size();
    result.value = scalar_product(q, q_hat);
    return result;
  }
  Truncation trunc;
  trunc.max_degree = total_degree;
  for (const auto& s : sets) trunc.max_exponents.push_back(*s.rbegin());
  const auto full = expand_in_variables(h, trunc, max_terms);
  result.left_terms = full.size();
  for (const auto& [a, coeff] : full.terms()) {
    bool admissible = true;
    for (std::size_t col = 0; col < a.size() && admissible; ++col) admissible = sets[col].count(a[col]) > 0;
    if (admissible) {
      result.value += coeff;
      ++result.right_terms;
    }
  }
  return result;
}

}  // namespace tablecount
