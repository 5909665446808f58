#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "tablecount/symmetric_lowrank.hpp"

using namespace tablecount;

namespace {

// Composite Simpson rule for ∫₀^κ t^α e^{-t} dt.
double simpson_moment(unsigned alpha, double kappa, int intervals = 20000) {
  const double h = kappa / intervals;
  const auto f = [&](double t) { return std::pow(t, alpha) * std::exp(-t); };
  double sum = f(0.0) + f(kappa);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return sum * h / 3.0;
}

}  // namespace

TEST_CASE("threshold fixtures") {
  CHECK(solve_threshold(0, 0.5).kappa == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  // Root of e^{-κ}(1 + κ + κ²/2) = 0.1, from an independent solver.
  CHECK(solve_threshold(2, 0.1).kappa == doctest::Approx(5.322320).epsilon(1e-6));
  CHECK(solve_threshold(3, 0.1).kappa > solve_threshold(2, 0.1).kappa);
  CHECK_THROWS_AS(solve_threshold(2, 0.0), ValidationError);
  CHECK_THROWS_AS(solve_threshold(2, 1.0), ValidationError);
}

TEST_CASE("threshold satisfies the tail invariant and is nearly tight") {
  for (unsigned r = 0; r <= 6; ++r) {
    for (double delta : {0.01, 0.1, 0.3, 0.7}) {
      const auto spec = solve_threshold(r, delta);
      CHECK(truncated_tail(r, spec.kappa) <= delta);
      CHECK(truncated_tail(r, spec.kappa - 1e-6) > delta);
    }
  }
}

TEST_CASE("truncated moment closed form matches numeric integration") {
  for (unsigned alpha = 0; alpha <= 4; ++alpha) {
    for (double kappa : {0.5, 2.0, 5.3, 9.0}) {
      CHECK(truncated_moment(alpha, kappa) == doctest::Approx(simpson_moment(alpha, kappa)).epsilon(1e-9));
    }
  }
}

TEST_CASE("truncated draws stay in [0, kappa] and have the stated moments") {
  const auto spec = solve_threshold(2, 0.1);
  Rng rng(99);
  const int draws = 1'000'000;
  double s1 = 0, s2 = 0, s1sq = 0, s2sq = 0;
  for (int i = 0; i < draws; ++i) {
    const double g = sample_truncated_exponential(spec, rng);
    REQUIRE(g >= 0.0);
    REQUIRE(g <= spec.kappa);
    s1 += g;
    s1sq += g * g;
    s2 += g * g;
    s2sq += g * g * g * g;
  }
  const double m1 = s1 / draws, m2 = s2 / draws;
  const double se1 = std::sqrt((s1sq / draws - m1 * m1) / draws);
  const double se2 = std::sqrt((s2sq / draws - m2 * m2) / draws);
  // (1−δ)·α! ≤ E γ̄^α ≤ α!
  CHECK(m1 >= 0.9 - 3 * se1);
  CHECK(m1 <= 1.0 + 3 * se1);
  CHECK(m2 >= 1.8 - 3 * se2);
  CHECK(m2 <= 2.0 + 3 * se2);
}

TEST_CASE("delta from epsilon") {
  CHECK(delta_for_epsilon(0.19) == doctest::Approx(0.1));
  CHECK_THROWS_AS(delta_for_epsilon(0.0), ValidationError);
  CHECK_THROWS_AS(delta_for_epsilon(1.0), ValidationError);
}

TEST_CASE("sample count fixtures and growth") {
  // Frozen from an independent evaluation of the same formula.
  CHECK(choose_sample_count(2, 0.25, 10) == 189071);
  CHECK(choose_sample_count(2, 0.25, 1000) == 486285);
  CHECK(choose_sample_count(2, 0.3, 10) == 117084);
  const double ratio = static_cast<double>(choose_sample_count(2, 0.25, 1000)) / choose_sample_count(2, 0.25, 10);
  const double log_ratio = std::log(6.0 * 500500) / std::log(6.0 * 55);
  CHECK(ratio <= log_ratio + 1e-5);

  const auto m1 = choose_sample_count(1, 0.25, 10);
  CHECK(m1 > 0);
  const double kappa = solve_threshold(1, delta_for_epsilon(0.25)).kappa;
  // For r = 1 the tolerance is (1−ε)^{1/2} − (1−ε), not ε.
  const double t = std::sqrt(0.75) - 0.75;
  CHECK(m1 == static_cast<std::uint64_t>(std::ceil(2 * kappa * kappa / (t * t) * std::log(6.0 * 10))));

  CHECK_THROWS_AS(choose_sample_count(0, 0.2, 10), ValidationError);
  CHECK_THROWS_AS(choose_sample_count(2, 0.2, 1), ValidationError);
  CHECK_THROWS_AS(choose_sample_count(2, 1.2, 10), ValidationError);
}

TEST_CASE("surjections and the bijective fraction") {
  CHECK(surjection_count(4, 2) == 14);
  CHECK(surjection_count(5, 3) == 150);
  CHECK(surjection_count(3, 3) == 6);
  CHECK(bijective_fraction(4, 2) == Rational(4, 7));
  CHECK(bijective_fraction(5, 5) == 1);
  CHECK_THROWS_AS(bijective_fraction(2, 3), ValidationError);
}

TEST_CASE("h-tilde with r = 1 is an average of truncated draws") {
  const auto h = build_h_tilde(1, 2, 0.3, 5, 40);
  CHECK(h.num_samples() == 40);
  CHECK(h.scale() == doctest::Approx(1.0 / 40));
  const auto p = expand(h);
  double mean = 0;
  for (const auto& f : h.forms) mean += f.coeffs[0];
  mean /= 40;
  CHECK(p.coefficient({1, 0}) == doctest::Approx(mean));
  CHECK(p.coefficient({1, 0}) >= 0.0);
  CHECK(p.coefficient({1, 0}) <= h.kappa);
}

TEST_CASE("h-tilde is reproducible and uses the selected number of forms") {
  const auto a = build_h_tilde(2, 5, 0.3, 77);
  const auto b = build_h_tilde(2, 5, 0.3, 77);
  CHECK(a == b);
  CHECK(a.num_samples() == choose_sample_count(2, 0.3, 5));
  CHECK(a.normalizer == doctest::Approx(2.0 * a.num_samples()));
  CHECK_FALSE(build_h_tilde(2, 5, 0.3, 78, 10) == build_h_tilde(2, 5, 0.3, 77, 10));
  for (const auto& f : a.forms) {
    for (double c : f.coeffs) REQUIRE((c >= 0.0 && c <= a.kappa));
  }
}

TEST_CASE("h-tilde passes the coefficient check for a fixed seed") {
  const auto h = build_h_tilde(2, 10, 0.3, 1);
  const auto report = verify_coefficients(h);
  CHECK(report.checked == 55);
  CHECK(report.lower_bound == doctest::Approx(0.49));
  CHECK(report.upper_bound == doctest::Approx(1.69));
  CHECK(report.passed());
}

TEST_CASE("expected h-tilde coefficients lie in the truncation band") {
  const double eps = 0.3, delta = delta_for_epsilon(eps);
  const unsigned r = 3;
  const double kappa = solve_threshold(r, delta).kappa;
  for_each_monomial(3, r, [&](const Monomial& a) {
    double expected = 1.0;
    for (unsigned e : a) {
      if (e > 0) expected *= truncated_moment(e, kappa) / std::tgamma(e + 1.0);
    }
    CHECK(expected <= 1.0);
    CHECK(expected >= std::pow(1.0 - delta, r));
  });

  // Empirical average of the x₁²x₂ coefficient over many seeds.
  const int seeds = 400;
  double sum = 0, sum_sq = 0;
  for (int s = 0; s < seeds; ++s) {
    const double c = expand(build_h_tilde(r, 3, eps, 1000 + s, 30)).coefficient({2, 1, 0});
    sum += c;
    sum_sq += c * c;
  }
  const double mean = sum / seeds, se = std::sqrt((sum_sq / seeds - mean * mean) / seeds);
  const double expected = truncated_moment(2, kappa) / 2.0 * truncated_moment(1, kappa);
  CHECK(std::abs(mean - expected) <= 4 * se);
}

TEST_CASE("h-tilde coefficients are symmetric in expectation") {
  const int seeds = 2000;
  double d1 = 0, d1sq = 0, d2 = 0, d2sq = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto p = expand(build_h_tilde(2, 3, 0.3, 5000 + s, 20));
    const double a = p.coefficient({2, 0, 0}) - p.coefficient({0, 0, 2});
    const double b = p.coefficient({1, 1, 0}) - p.coefficient({0, 1, 1});
    d1 += a;
    d1sq += a * a;
    d2 += b;
    d2sq += b * b;
  }
  const auto within = [&](double sum, double sum_sq) {
    const double mean = sum / seeds, se = std::sqrt((sum_sq / seeds - mean * mean) / seeds);
    return std::abs(mean) <= 3 * se;
  };
  CHECK(within(d1, d1sq));
  CHECK(within(d2, d2sq));
}

TEST_CASE("e-tilde structure") {
  const auto e = build_e_tilde(2, 4, 0.2, 3, 50);
  CHECK(e.num_samples() == 50);
  CHECK(e.normalizer == doctest::Approx(4.0 / 7.0 * 50));
  for (const auto& group : e.groups) {
    REQUIRE(group.size() == 2);
    std::vector<int> cover(4, 0);
    for (const auto& f : group) {
      bool nonempty = false;
      for (std::size_t j = 0; j < 4; ++j) {
        REQUIRE((f.coeffs[j] == 0.0 || f.coeffs[j] == 1.0));
        cover[j] += f.coeffs[j] == 1.0;
        nonempty |= f.coeffs[j] == 1.0;
      }
      CHECK(nonempty);
    }
    CHECK(std::all_of(cover.begin(), cover.end(), [](int c) { return c == 1; }));
  }
  CHECK(build_e_tilde(2, 4, 0.2, 3, 50) == e);
  CHECK_THROWS_AS(build_e_tilde(5, 4, 0.2, 3), ValidationError);
}

TEST_CASE("e-tilde coefficients are scaled averages of indicators") {
  const std::uint64_t m = 200;
  const auto e = build_e_tilde(3, 6, 0.2, 8, m);
  const auto p = expand(e);
  for (const auto& [a, c] : p.terms()) {
    CHECK(*std::max_element(a.begin(), a.end()) <= 1);
    const double count = c * e.normalizer;
    CHECK(std::abs(count - std::round(count)) < 1e-6);
    const double average = std::round(count) / m;
    CHECK(average >= 0.0);
    CHECK(average <= 1.0);
  }
}

TEST_CASE("e-tilde with r = n is exactly e_n") {
  const auto e = build_e_tilde(4, 4, 0.2, 1, 7);
  const auto p = expand(e);
  CHECK(p.size() == 1);
  CHECK(p.coefficient({1, 1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-14));
  const auto report = verify_coefficients(e);
  CHECK(report.min_ratio == doctest::Approx(1.0));
  CHECK(report.max_ratio == doctest::Approx(1.0));
  CHECK(report.passed());
}

TEST_CASE("e-tilde with the selected sample count") {
  const auto e = build_e_tilde(2, 5, 0.2, 4);
  CHECK(e.num_samples() == choose_sample_count_elementary(2, 0.2, 5));
  CHECK(verify_coefficients(e).passed());
}

TEST_CASE("verify_coefficients on exact polynomials") {
  const auto h = complete_symmetric<double>(4, 3);
  const auto rep = verify_coefficients(h, SymmetricKind::complete, 3, 0.1);
  CHECK(rep.min_ratio == 1.0);
  CHECK(rep.max_ratio == 1.0);
  CHECK(rep.checked == 20);
  CHECK(rep.passed());

  auto bad = elementary_symmetric<double>(3, 2);
  bad.add_term({2, 0, 0}, 1.0);
  const auto rep2 = verify_coefficients(bad, SymmetricKind::elementary, 2, 0.1);
  CHECK_FALSE(rep2.passed());
  CHECK(rep2.violations.size() == 1);

  auto low = complete_symmetric<double>(2, 2);
  low.add_term({1, 1}, -0.5);
  const auto rep3 = verify_coefficients(low, SymmetricKind::complete, 2, 0.1);
  CHECK(rep3.min_ratio == doctest::Approx(0.5));
  CHECK(rep3.violations == std::vector<Monomial>{{1, 1}});

  CHECK_THROWS_AS(verify_coefficients(h, SymmetricKind::complete, 3, 0.1, 5), BudgetError);
}
