#include "tablecount/symmetric_lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tablecount/errors.hpp"

namespace tablecount {

namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
}

std::uint64_t azuma_count(double bound, double tolerance, double monomials) {
  const double m = std::ceil(2.0 * bound * bound / (tolerance * tolerance) * std::log(6.0 * monomials));
  if (!(m < 9.0e18)) throw BudgetError("sample count overflows 64 bits");
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(m));
}

}  // namespace

double truncated_tail(unsigned r, double kappa) {
  double term = std::exp(-kappa);
  double sum = term;
  for (unsigned i = 1; i <= r; ++i) {
    term *= kappa / i;
    sum += term;
  }
  return sum;
}

double truncated_moment(unsigned alpha, double kappa) {
  return std::tgamma(alpha + 1.0) * (1.0 - truncated_tail(alpha, kappa));
}

TruncationSpec solve_threshold(unsigned r, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (truncated_tail(r, hi) > delta) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (truncated_tail(r, mid) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {r, delta, hi};
}

double sample_truncated_exponential(const TruncationSpec& spec, Rng& rng) {
  const double g = rng.exponential();
  return g <= spec.kappa ? g : 0.0;
}

double delta_for_epsilon(double epsilon) {
  require_epsilon(epsilon);
  return 1.0 - std::sqrt(1.0 - epsilon);
}

std::uint64_t choose_sample_count(unsigned r, double epsilon, std::size_t n) {
  if (r < 1) throw ValidationError("degree r must be at least 1");
  if (n < 2) throw ValidationError("need at least 2 variables");
  const double kappa = solve_threshold(r, delta_for_epsilon(epsilon)).kappa;
  // ξ_a ∈ [0, κʳ] and E ξ_a ∈ [0, 1].
  const double bound = std::max(std::pow(kappa, r), 1.0);
  const double tol = std::min(std::pow(1.0 - epsilon, r / 2.0) - std::pow(1.0 - epsilon, r),
                              std::pow(1.0 + epsilon, r) - 1.0);
  return azuma_count(bound, tol, binomial(n + r - 1, r).get_d());
}

std::uint64_t choose_sample_count_elementary(unsigned r, double epsilon, std::size_t n) {
  require_epsilon(epsilon);
  if (r < 1 || r > n) throw ValidationError("elementary degree must satisfy 1 <= r <= n");
  const double bound = 1.0 / bijective_fraction(static_cast<unsigned>(n), r).get_d();
  const double tol = std::min(1.0 - std::pow(1.0 - epsilon, r), std::pow(1.0 + epsilon, r) - 1.0);
  return azuma_count(bound, tol, std::max(binomial(n, r).get_d(), 1.0));
}

Integer surjection_count(unsigned n, unsigned r) {
  Integer total = 0;
  for (unsigned k = 0; k <= r; ++k) {
    Integer term;
    mpz_ui_pow_ui(term.get_mpz_t(), r - k, n);
    term *= binomial(r, k);
    if (k % 2 == 0) {
      total += term;
    } else {
      total -= term;
    }
  }
  return total;
}

Rational bijective_fraction(unsigned n, unsigned r) {
  if (r < 1 || r > n) throw ValidationError("no surjection from " + std::to_string(n) + " onto " + std::to_string(r));
  Integer pow;
  mpz_ui_pow_ui(pow.get_mpz_t(), r, n - r);
  Rational beta(factorial(r) * pow, surjection_count(n, r));
  beta.canonicalize();
  return beta;
}

std::string to_string(SymmetricKind kind) { return kind == SymmetricKind::complete ? "complete" : "elementary"; }

ApproxSymmetricPoly build_h_tilde(unsigned r, std::size_t n, double epsilon, std::uint64_t seed,
                                  std::optional<std::uint64_t> m) {
  if (r < 1) throw ValidationError("degree r must be at least 1");
  if (n < 2) throw ValidationError("need at least 2 variables");
  const TruncationSpec spec = solve_threshold(r, delta_for_epsilon(epsilon));
  const std::uint64_t count = m ? *m : choose_sample_count(r, epsilon, n);
  if (count == 0) throw ValidationError("sample count must be positive");

  ApproxSymmetricPoly out;
  out.kind = SymmetricKind::complete;
  out.r = r;
  out.n = n;
  out.epsilon = epsilon;
  out.seed = seed;
  out.kappa = spec.kappa;
  out.normalizer = factorial(r).get_d() * static_cast<double>(count);
  out.forms.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    LinearForm<double> form{std::vector<double>(n)};
    for (auto& c : form.coeffs) c = sample_truncated_exponential(spec, rng);
    out.forms.push_back(std::move(form));
  }
  return out;
}

ApproxSymmetricPoly build_e_tilde(unsigned r, std::size_t n, double epsilon, std::uint64_t seed,
                                  std::optional<std::uint64_t> m) {
  require_epsilon(epsilon);
  if (r < 1) throw ValidationError("degree r must be at least 1");
  if (r > n) {
    throw ValidationError("no surjection from " + std::to_string(n) + " variables onto " + std::to_string(r) +
                          " blocks");
  }
  const std::uint64_t count = m ? *m : choose_sample_count_elementary(r, epsilon, n);
  if (count == 0) throw ValidationError("sample count must be positive");
  const Rational beta = bijective_fraction(static_cast<unsigned>(n), r);

  // Acceptance probability Surj(n,r)/rⁿ; allow 50 × expected attempts.
  Integer all_maps;
  mpz_ui_pow_ui(all_maps.get_mpz_t(), r, n);
  const double accept = Rational(surjection_count(static_cast<unsigned>(n), r), all_maps).get_d();
  const double limit = std::ceil(50.0 / accept);

  ApproxSymmetricPoly out;
  out.kind = SymmetricKind::elementary;
  out.r = r;
  out.n = n;
  out.epsilon = epsilon;
  out.seed = seed;
  out.normalizer = beta.get_d() * static_cast<double>(count);
  out.groups.reserve(count);

  std::vector<unsigned> omega(n);
  std::vector<bool> hit(r);
  for (std::uint64_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, i));
    bool accepted = false;
    for (double attempt = 0; attempt < limit && !accepted; attempt += 1.0) {
      std::fill(hit.begin(), hit.end(), false);
      for (auto& w : omega) {
        w = static_cast<unsigned>(rng.below(r));
        hit[w] = true;
      }
      accepted = std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
    }
    if (!accepted) {
      throw BudgetError("surjection sampling for group " + std::to_string(i) + " gave up after " +
                        std::to_string(static_cast<long long>(limit)) + " attempts");
    }
    std::vector<LinearForm<double>> group(r, LinearForm<double>{std::vector<double>(n, 0.0)});
    for (std::size_t j = 0; j < n; ++j) group[omega[j]].coeffs[j] = 1.0;
    out.groups.push_back(std::move(group));
  }
  return out;
}

SparsePolynomial<double> expand(const ApproxSymmetricPoly& approx, std::size_t max_terms) {
  if (approx.kind == SymmetricKind::complete) {
    auto sum = power_sum_expansion(approx.forms, approx.n, approx.r, Truncation{}, max_terms);
    SparsePolynomial<double> out(approx.n);
    for (const auto& [a, c] : sum.terms()) out.add_term(a, c / approx.normalizer);
    return out;
  }
  // Each group's product of disjoint 0/1 forms is a sum of square-free
  // monomials with coefficient 1; count them and divide once at the end.
  SparsePolynomial<double> counts(approx.n);
  for (const auto& group : approx.groups) {
    SparsePolynomial<double> prod = SparsePolynomial<double>::constant(approx.n, 1.0);
    for (const auto& form : group) prod = poly_mul(prod, expand_form_power(form, 1), max_terms);
    counts += prod;
    if (counts.size() > max_terms) throw BudgetError("expansion exceeds term cap of " + std::to_string(max_terms));
  }
  SparsePolynomial<double> out(approx.n);
  for (const auto& [a, c] : counts.terms()) out.add_term(a, c / approx.normalizer);
  return out;
}

CoefficientReport verify_coefficients(const SparsePolynomial<double>& poly, SymmetricKind kind, unsigned r,
                                      double epsilon, std::size_t max_terms) {
  require_epsilon(epsilon);
  const std::size_t n = poly.num_vars();
  const Integer expected_terms = kind == SymmetricKind::complete ? binomial(n + r - 1, r) : binomial(n, r);
  if (expected_terms > static_cast<unsigned long>(max_terms)) {
    throw BudgetError("verifying " + expected_terms.get_str() + " coefficients exceeds the cap of " +
                      std::to_string(max_terms));
  }
  CoefficientReport report;
  report.lower_bound = std::pow(1.0 - epsilon, r);
  report.upper_bound = std::pow(1.0 + epsilon, r);
  report.min_ratio = std::numeric_limits<double>::infinity();
  report.max_ratio = -std::numeric_limits<double>::infinity();

  const std::vector<unsigned> caps = kind == SymmetricKind::elementary ? std::vector<unsigned>(n, 1)
                                                                       : std::vector<unsigned>{};
  std::size_t present = 0;
  for_each_monomial(
      n, r,
      [&](const Monomial& a) {
        const double ratio = poly.coefficient(a);
        if (ratio != 0.0) ++present;
        ++report.checked;
        report.min_ratio = std::min(report.min_ratio, ratio);
        report.max_ratio = std::max(report.max_ratio, ratio);
        if (ratio < report.lower_bound || ratio > report.upper_bound) report.violations.push_back(a);
      },
      caps);
  if (present != poly.size()) {
    // Terms outside the support of h_r / e_r.
    for (const auto& [a, c] : poly.terms()) {
      const bool in_support = degree(a) == r && (kind == SymmetricKind::complete ||
                                                 std::all_of(a.begin(), a.end(), [](unsigned e) { return e <= 1; }));
      if (!in_support) report.violations.push_back(a);
    }
  }
  return report;
}

CoefficientReport verify_coefficients(const ApproxSymmetricPoly& approx, std::size_t max_terms) {
  return verify_coefficients(expand(approx, max_terms), approx.kind, approx.r, approx.epsilon, max_terms);
}

}  // namespace tablecount
