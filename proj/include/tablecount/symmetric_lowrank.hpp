#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tablecount/numeric.hpp"
#include "tablecount/polynomial.hpp"
#include "tablecount/random.hpp"

namespace tablecount {

/// Truncation threshold κ for exponential draws such that
/// e^{-κ}·Σ_{i≤r} κⁱ/i! ≤ δ, i.e. (1−δ)·α! ≤ E γ̄^α ≤ α! for α ≤ r.
struct TruncationSpec {
  unsigned r = 0;
  double delta = 0.0;
  double kappa = 0.0;
};

/// e^{-κ}·Σ_{i=0}^{r} κⁱ/i!, the Poisson(κ) lower tail.
double truncated_tail(unsigned r, double kappa);

/// ∫₀^κ t^α e^{-t} dt = α!·(1 − truncated_tail(α, κ)) = E[γ^α·1{γ ≤ κ}].
double truncated_moment(unsigned alpha, double kappa);

/// Smallest κ (bisection to 1e-9) satisfying the TruncationSpec invariant.
TruncationSpec solve_threshold(unsigned r, double delta);

/// γ = −ln(1−U), returned if γ ≤ κ and replaced by 0 otherwise.
double sample_truncated_exponential(const TruncationSpec& spec, Rng& rng);

/// δ = 1 − (1−ε)^{1/2}.
double delta_for_epsilon(double epsilon);

/// Number of forms for h̃_r: ⌈(2K²/t²)·ln(6·C(n+r−1, r))⌉ with K = κʳ and
/// t = min((1−ε)^{r/2} − (1−ε)ʳ, (1+ε)ʳ − 1), which puts every coefficient in
/// [(1−ε)ʳ, (1+ε)ʳ] with probability ≥ 2/3.
std::uint64_t choose_sample_count(unsigned r, double epsilon, std::size_t n);

/// Same union-bound construction for ẽ_r: each scaled coefficient lies in
/// [0, 1/β], so K = 1/β, t = min(1 − (1−ε)ʳ, (1+ε)ʳ − 1), over C(n, r) monomials.
std::uint64_t choose_sample_count_elementary(unsigned r, double epsilon, std::size_t n);

/// Surj(n, r) = Σ_{k=0}^{r} (−1)ᵏ C(r,k) (r−k)ⁿ.
Integer surjection_count(unsigned n, unsigned r);

/// β = r!·r^{n−r} / Surj(n, r): the probability that a uniform surjection
/// {1..n}→{1..r} is a bijection on a fixed r-subset.
Rational bijective_fraction(unsigned n, unsigned r);

enum class SymmetricKind { complete, elementary };

std::string to_string(SymmetricKind kind);

/// h̃_r = (1/normalizer)·Σᵢ ℓᵢʳ (complete) or ẽ_r = (1/normalizer)·Σᵢ ∏ⱼ ℓᵢⱼ
/// (elementary, r disjoint 0/1 forms per group).
struct ApproxSymmetricPoly {
  SymmetricKind kind = SymmetricKind::complete;
  unsigned r = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  /// r!·m for complete, β·m for elementary.
  double normalizer = 1.0;
  /// Truncation threshold used for complete; 0 for elementary.
  double kappa = 0.0;
  std::vector<LinearForm<double>> forms;
  std::vector<std::vector<LinearForm<double>>> groups;

  double scale() const { return 1.0 / normalizer; }
  std::size_t num_samples() const { return kind == SymmetricKind::complete ? forms.size() : groups.size(); }

  friend bool operator==(const ApproxSymmetricPoly&, const ApproxSymmetricPoly&) = default;
};

/// Form i draws its n coefficients from Rng(derive_seed(seed, i)).
/// `m` overrides choose_sample_count.
ApproxSymmetricPoly build_h_tilde(unsigned r, std::size_t n, double epsilon, std::uint64_t seed,
                                  std::optional<std::uint64_t> m = std::nullopt);

/// Group i samples a surjection from Rng(derive_seed(seed, i)) by uniform
/// assignment with rejection. Throws ValidationError if r > n and
/// BudgetError if a group needs more than 50 × (expected attempts).
ApproxSymmetricPoly build_e_tilde(unsigned r, std::size_t n, double epsilon, std::uint64_t seed,
                                  std::optional<std::uint64_t> m = std::nullopt);

/// Monomial expansion in n variables.
SparsePolynomial<double> expand(const ApproxSymmetricPoly& approx, std::size_t max_terms = kDefaultTermCap);

struct CoefficientReport {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  std::size_t checked = 0;
  /// Monomials whose ratio falls outside [lower_bound, upper_bound], plus
  /// any monomial that should be absent but is present.
  std::vector<Monomial> violations;

  bool passed() const { return violations.empty(); }
};

/// Compares every coefficient of `poly` against 1, the h_r/e_r coefficient,
/// with band [(1−ε)ʳ, (1+ε)ʳ].
CoefficientReport verify_coefficients(const SparsePolynomial<double>& poly, SymmetricKind kind, unsigned r,
                                      double epsilon, std::size_t max_terms = kDefaultTermCap);

CoefficientReport verify_coefficients(const ApproxSymmetricPoly& approx, std::size_t max_terms = kDefaultTermCap);

}  // namespace tablecount
