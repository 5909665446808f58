#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tablecount/errors.hpp"
#include "tablecount/numeric.hpp"

namespace tablecount {

inline constexpr std::size_t kDefaultTermCap = 10'000'000;

/// Exponent vector (α₁,…,αₙ) of x₁^α₁⋯xₙ^αₙ.
using Monomial = std::vector<unsigned>;

inline unsigned degree(const Monomial& a) { return std::accumulate(a.begin(), a.end(), 0U); }

/// Graded lexicographic order: lower total degree first; within a degree,
/// lexicographically larger exponent vectors first (x₁² < x₁x₂ < x₂²).
struct GradedLexLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    const unsigned da = degree(a), db = degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
  }
};

/// α₁!⋯αₙ!, the scalar product of xᵃ with itself.
inline Integer monomial_weight(const Monomial& a) {
  Integer w = 1;
  for (unsigned e : a) w *= factorial(e);
  return w;
}

/// Calls visit(a) for every exponent vector of length n and total degree r,
/// in graded-lex order. Optional per-variable caps restrict αᵢ ≤ caps[i].
inline void for_each_monomial(std::size_t n, unsigned r, const std::function<void(const Monomial&)>& visit,
                              const std::vector<unsigned>& caps = {}) {
  Monomial a(n, 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i + 1 == n) {
      if (!caps.empty() && left > caps[i]) return;
      a[i] = left;
      visit(a);
      a[i] = 0;
      return;
    }
    unsigned hi = left;
    if (!caps.empty()) hi = std::min(hi, caps[i]);
    for (unsigned e = hi + 1; e-- > 0;) {
      a[i] = e;
      rec(i + 1, left - e);
    }
    a[i] = 0;
  };
  if (n == 0) return;
  rec(0, r);
}

template <class C>
class SparsePolynomial {
public:
  using Coeff = C;
  using Terms = std::map<Monomial, C, GradedLexLess>;

  explicit SparsePolynomial(std::size_t num_vars) : num_vars_(num_vars) {
    if (num_vars == 0) throw ValidationError("polynomial needs at least one variable");
  }

  static SparsePolynomial constant(std::size_t num_vars, const C& c) {
    SparsePolynomial p(num_vars);
    p.add_term(Monomial(num_vars, 0), c);
    return p;
  }

  static SparsePolynomial variable(std::size_t num_vars, std::size_t i) {
    SparsePolynomial p(num_vars);
    Monomial a(num_vars, 0);
    a.at(i) = 1;
    p.add_term(a, C(1));
    return p;
  }

  std::size_t num_vars() const { return num_vars_; }
  const Terms& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }

  C coefficient(const Monomial& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? C(0) : it->second;
  }

  /// Adds c·xᵃ, dropping the entry if the accumulated coefficient becomes zero.
  void add_term(const Monomial& a, const C& c) {
    if (a.size() != num_vars_) {
      throw ValidationError("monomial has " + std::to_string(a.size()) + " exponents, polynomial has " +
                            std::to_string(num_vars_) + " variables");
    }
    if (is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(a, c);
    if (!inserted) {
      it->second += c;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  std::optional<unsigned> homogeneous_degree() const {
    if (terms_.empty()) return std::nullopt;
    const unsigned d = degree(terms_.begin()->first);
    for (const auto& [a, c] : terms_) {
      if (degree(a) != d) return std::nullopt;
    }
    return d;
  }

  /// Largest exponent of each variable over all terms.
  std::vector<unsigned> max_exponents() const {
    std::vector<unsigned> caps(num_vars_, 0);
    for (const auto& [a, c] : terms_) {
      for (std::size_t i = 0; i < num_vars_; ++i) caps[i] = std::max(caps[i], a[i]);
    }
    return caps;
  }

  SparsePolynomial& operator+=(const SparsePolynomial& other) {
    require_same_vars(other);
    for (const auto& [a, c] : other.terms_) add_term(a, c);
    return *this;
  }

  SparsePolynomial& operator*=(const C& s) {
    if (is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [a, c] : terms_) c *= s;
    return *this;
  }

  friend SparsePolynomial operator+(SparsePolynomial f, const SparsePolynomial& g) { return f += g; }
  friend SparsePolynomial operator*(SparsePolynomial f, const C& s) { return f *= s; }
  friend SparsePolynomial operator*(const C& s, SparsePolynomial f) { return f *= s; }

  friend bool operator==(const SparsePolynomial& f, const SparsePolynomial& g) {
    return f.num_vars_ == g.num_vars_ && f.terms_ == g.terms_;
  }

  void require_same_vars(const SparsePolynomial& other) const {
    if (other.num_vars_ != num_vars_) {
      throw ValidationError("dimension mismatch: " + std::to_string(num_vars_) + " vs " +
                            std::to_string(other.num_vars_) + " variables");
    }
  }

private:
  std::size_t num_vars_;
  Terms terms_;
};

/// ℓ(x) = Σ coeffs[i]·xᵢ.
template <class C>
struct LinearForm {
  std::vector<C> coeffs;

  std::size_t num_vars() const { return coeffs.size(); }

  static LinearForm coordinate(std::size_t n, std::size_t i) {
    LinearForm f{std::vector<C>(n, C(0))};
    f.coeffs.at(i) = C(1);
    return f;
  }

  friend bool operator==(const LinearForm&, const LinearForm&) = default;
};

/// Dot product of coefficient vectors; this is also the scalar product of two
/// linear forms since every degree-1 monomial has weight 1.
template <class C>
C dot(const LinearForm<C>& f, const LinearForm<C>& g) {
  if (f.num_vars() != g.num_vars()) {
    throw ValidationError("dimension mismatch: forms over " + std::to_string(f.num_vars()) + " and " +
                          std::to_string(g.num_vars()) + " variables");
  }
  C acc(0);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i) acc += f.coeffs[i] * g.coeffs[i];
  return acc;
}

/// Drops terms during multiplication and expansion. Empty/absent fields mean no limit.
struct Truncation {
  std::optional<unsigned> max_degree;
  std::vector<unsigned> max_exponents;

  bool keeps(const Monomial& a) const {
    if (max_degree && degree(a) > *max_degree) return false;
    if (!max_exponents.empty()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > max_exponents[i]) return false;
      }
    }
    return true;
  }
};

/// ⟨f, g⟩ = Σₐ α₁!⋯αₙ! f_a g_a.
template <class C>
C scalar_product(const SparsePolynomial<C>& f, const SparsePolynomial<C>& g) {
  f.require_same_vars(g);
  const auto& small = f.size() <= g.size() ? f : g;
  const auto& large = f.size() <= g.size() ? g : f;
  FactorialTable fact;
  C acc(0);
  for (const auto& [a, c] : small.terms()) {
    auto it = large.terms().find(a);
    if (it == large.terms().end()) continue;
    C w(1);
    for (unsigned e : a) {
      if (e > 1) w *= from_integer<C>(fact(e));
    }
    acc += w * c * it->second;
  }
  return acc;
}

template <class C>
SparsePolynomial<C> poly_mul(const SparsePolynomial<C>& f, const SparsePolynomial<C>& g, const Truncation& trunc,
                             std::size_t max_terms = kDefaultTermCap) {
  f.require_same_vars(g);
  const std::size_t n = f.num_vars();
  SparsePolynomial<C> out(n);
  Monomial a(n);
  for (const auto& [fa, fc] : f.terms()) {
    for (const auto& [ga, gc] : g.terms()) {
      for (std::size_t i = 0; i < n; ++i) a[i] = fa[i] + ga[i];
      if (!trunc.keeps(a)) continue;
      out.add_term(a, fc * gc);
      if (out.size() > max_terms) {
        throw BudgetError("polynomial product exceeds term cap of " + std::to_string(max_terms) + " terms (" +
                          std::to_string(f.size()) + " x " + std::to_string(g.size()) + " operand terms)");
      }
    }
  }
  return out;
}

template <class C>
SparsePolynomial<C> poly_mul(const SparsePolynomial<C>& f, const SparsePolynomial<C>& g,
                             std::size_t max_terms = kDefaultTermCap) {
  return poly_mul(f, g, Truncation{}, max_terms);
}

/// Adds scale·ℓʳ to `out`, expanded by the multinomial theorem:
/// coefficient of xᵃ is (r!/∏αᵢ!)·∏γᵢ^αᵢ. Variables with a zero coefficient
/// are skipped, so cost scales with the support of ℓ.
template <class C>
void accumulate_form_power(SparsePolynomial<C>& out, const LinearForm<C>& form, unsigned r, const C& scale,
                           const Truncation& trunc = {}) {
  const std::size_t n = form.num_vars();
  if (n != out.num_vars()) {
    throw ValidationError("dimension mismatch: form over " + std::to_string(n) + " variables, polynomial over " +
                          std::to_string(out.num_vars()));
  }
  if (trunc.max_degree && r > *trunc.max_degree) return;
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_zero(form.coeffs[i])) support.push_back(i);
  }
  if (r == 0) {
    out.add_term(Monomial(n, 0), scale);
    return;
  }
  if (support.empty()) return;

  // binom[k][j] = C(k, j) for k ≤ r.
  std::vector<std::vector<C>> binom(r + 1);
  for (unsigned k = 0; k <= r; ++k) {
    binom[k].assign(k + 1, C(1));
    for (unsigned j = 1; j < k; ++j) binom[k][j] = binom[k - 1][j - 1] + binom[k - 1][j];
  }

  Monomial a(n, 0);
  std::function<void(std::size_t, unsigned, const C&)> rec = [&](std::size_t s, unsigned left, const C& coeff) {
    const std::size_t var = support[s];
    const unsigned cap = trunc.max_exponents.empty() ? left : std::min(left, trunc.max_exponents[var]);
    if (s + 1 == support.size()) {
      if (left > cap) return;
      a[var] = left;
      C c = coeff;
      for (unsigned k = 0; k < left; ++k) c *= form.coeffs[var];
      out.add_term(a, c);
      a[var] = 0;
      return;
    }
    C power(1);
    for (unsigned e = 0; e <= cap; ++e) {
      a[var] = e;
      rec(s + 1, left - e, coeff * binom[left][e] * power);
      power *= form.coeffs[var];
    }
    a[var] = 0;
  };
  rec(0, r, scale);
}

template <class C>
SparsePolynomial<C> expand_form_power(const LinearForm<C>& form, unsigned r, const Truncation& trunc = {}) {
  SparsePolynomial<C> out(form.num_vars());
  accumulate_form_power(out, form, r, C(1), trunc);
  return out;
}

/// Σₛ ℓₛʳ over a shared variable set, built monomial-by-monomial: the degree-r
/// monomials admitted by `trunc` are enumerated once and every form adds its
/// multinomial term to each. Cheaper than per-form expansion when there are
/// many dense forms over few variables.
template <class C>
SparsePolynomial<C> power_sum_expansion(const std::vector<LinearForm<C>>& forms, std::size_t num_vars, unsigned r,
                                        const Truncation& trunc = {}, std::size_t max_terms = kDefaultTermCap) {
  SparsePolynomial<C> out(num_vars);
  if (trunc.max_degree && r > *trunc.max_degree) return out;
  std::vector<Monomial> monomials;
  for_each_monomial(
      num_vars, r,
      [&](const Monomial& a) {
        monomials.push_back(a);
        if (monomials.size() > max_terms) {
          throw BudgetError("power-sum expansion: more than " + std::to_string(max_terms) + " monomials of degree " +
                            std::to_string(r) + " in " + std::to_string(num_vars) + " variables");
        }
      },
      trunc.max_exponents);

  // Per monomial: multinomial r!/∏αᵢ! and the (variable, exponent) support.
  FactorialTable fact;
  std::vector<C> multinomial;
  std::vector<std::vector<std::pair<std::size_t, unsigned>>> support;
  for (const auto& a : monomials) {
    Integer denom = 1;
    std::vector<std::pair<std::size_t, unsigned>> s;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      denom *= fact(a[i]);
      s.emplace_back(i, a[i]);
    }
    Integer mult = fact(r) / denom;
    multinomial.push_back(from_integer<C>(mult));
    support.push_back(std::move(s));
  }

  std::vector<C> sums(monomials.size(), C(0));
  for (const auto& form : forms) {
    if (form.num_vars() != num_vars) throw ValidationError("power-sum expansion: form dimension mismatch");
    for (std::size_t t = 0; t < monomials.size(); ++t) {
      C prod(1);
      for (const auto& [var, e] : support[t]) {
        for (unsigned k = 0; k < e; ++k) prod *= form.coeffs[var];
      }
      sums[t] += prod;
    }
  }
  for (std::size_t t = 0; t < monomials.size(); ++t) out.add_term(monomials[t], multinomial[t] * sums[t]);
  return out;
}

/// h_r in n variables: every degree-r monomial with coefficient 1.
template <class C>
SparsePolynomial<C> complete_symmetric(std::size_t n, unsigned r) {
  SparsePolynomial<C> h(n);
  for_each_monomial(n, r, [&](const Monomial& a) { h.add_term(a, C(1)); });
  return h;
}

/// e_r in n variables: every square-free degree-r monomial with coefficient 1.
template <class C>
SparsePolynomial<C> elementary_symmetric(std::size_t n, unsigned r) {
  SparsePolynomial<C> e(n);
  if (r > n) return e;
  for_each_monomial(n, r, [&](const Monomial& a) { e.add_term(a, C(1)); }, std::vector<unsigned>(n, 1));
  return e;
}

/// ⟨f, g⟩ for f(x) = q(ℓ₁(x),…,ℓ_k(x)) and g = ∏ₛ gₛ(x), computed in k
/// variables. Each g-factor gₛ is carried to the k-variate form whose i-th
/// coefficient is ⟨ℓᵢ, gₛ⟩ (the truncation of g(Ax) with the rows of A
/// beyond k set to zero); the product ĝ of those forms is paired with q.
/// ĝ is pruned to q's per-variable exponent range, which never changes the result.
template <class C>
C reduced_pairing(const SparsePolynomial<C>& q, const std::vector<LinearForm<C>>& forms,
                  const std::vector<LinearForm<C>>& g_forms, std::size_t max_terms = kDefaultTermCap) {
  const std::size_t k = q.num_vars();
  if (forms.size() != k) {
    throw ValidationError("reduced pairing: q has " + std::to_string(k) + " variables but " +
                          std::to_string(forms.size()) + " forms were given");
  }
  const std::size_t n = forms.front().num_vars();
  for (const auto& f : forms) {
    if (f.num_vars() != n) throw ValidationError("reduced pairing: forms over differing variable counts");
  }
  for (const auto& g : g_forms) {
    if (g.num_vars() != n) {
      throw ValidationError("reduced pairing: g-factor over " + std::to_string(g.num_vars()) +
                            " variables, forms over " + std::to_string(n));
    }
  }

  Truncation trunc;
  trunc.max_exponents = q.max_exponents();
  trunc.max_degree = static_cast<unsigned>(g_forms.size());

  SparsePolynomial<C> g_hat = SparsePolynomial<C>::constant(k, C(1));
  // Runs of identical factors are expanded as a single power.
  std::size_t s = 0;
  while (s < g_forms.size()) {
    std::size_t run = 1;
    while (s + run < g_forms.size() && g_forms[s + run] == g_forms[s]) ++run;
    LinearForm<C> transported{std::vector<C>(k)};
    for (std::size_t i = 0; i < k; ++i) transported.coeffs[i] = dot(forms[i], g_forms[s]);
    const auto factor = expand_form_power(transported, static_cast<unsigned>(run), trunc);
    if (factor.size() > max_terms) {
      throw BudgetError("reduced pairing: factor expansion exceeds term cap of " + std::to_string(max_terms));
    }
    g_hat = poly_mul(g_hat, factor, trunc, max_terms);
    s += run;
  }
  return scalar_product(q, g_hat);
}

/// Canonical text form: one "coeff e₁ … eₙ" line per term in graded-lex order.
template <class C>
std::string to_text(const SparsePolynomial<C>& p) {
  std::ostringstream os;
  for (const auto& [a, c] : p.terms()) {
    os << to_string(c);
    for (unsigned e : a) os << ' ' << e;
    os << '\n';
  }
  return os.str();
}

template <class C>
SparsePolynomial<C> from_text(const std::string& text, std::size_t num_vars) {
  SparsePolynomial<C> p(num_vars);
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string coeff_text;
    ls >> coeff_text;
    Monomial a;
    long e;
    while (ls >> e) {
      if (e < 0) throw ValidationError("line " + std::to_string(line_no) + ": negative exponent");
      a.push_back(static_cast<unsigned>(e));
    }
    if (!ls.eof()) throw ValidationError("line " + std::to_string(line_no) + ": malformed exponent");
    C c;
    if constexpr (is_exact_v<C>) {
      c = parse_rational(coeff_text);
    } else {
      try {
        c = std::stod(coeff_text);
      } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed coefficient '" + coeff_text + "'");
      }
    }
    p.add_term(a, c);
  }
  return p;
}

}  // namespace tablecount
