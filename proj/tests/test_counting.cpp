#include <cmath>

#include "doctest.h"
#include "support.hpp"

using namespace tablecount;
using testing::margin_grid;
using testing::weighted_bruteforce;

namespace {

bool in_band(const LowRankEstimate& est, double exact) {
  const double ratio = est.value / exact;
  return ratio >= est.band_lower && ratio <= est.band_upper;
}

Integer count_01_by_enumeration(const Margins& m) {
  Integer c = 0;
  for_each_table(m, 1, [&](const std::vector<unsigned>&) { ++c; });
  return c;
}

}  // namespace

TEST_CASE("margins validation") {
  CHECK_NOTHROW(Margins({2, 2}, {1, 3}));
  CHECK_THROWS_AS(Margins({2, 0}, {1, 1}), ValidationError);
  CHECK_THROWS_AS(Margins({2}, {2, 0}), ValidationError);
  CHECK_THROWS_AS(Margins({}, {}), ValidationError);
  try {
    Margins({2, 2}, {3, 2});
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find('4') != std::string::npos);
    CHECK(msg.find('5') != std::string::npos);
  }
  const Margins m({3, 1}, {2, 1, 1});
  CHECK(m.total() == 4);
  CHECK(m.max_margin() == 3);
  CHECK(m.transposed() == Margins({2, 1, 1}, {3, 1}));
}

TEST_CASE("weight matrix validation and rank") {
  CHECK_THROWS_AS(WeightMatrix::from_rows({{1, -1}}), ValidationError);
  CHECK_THROWS_AS(WeightMatrix::from_rows({{1, std::nan("")}}), ValidationError);
  CHECK_THROWS_AS(WeightMatrix::from_rows({{1, 2}, {3}}), ValidationError);
  const auto w = WeightMatrix::from_rows({{1, 2, 3}, {2, 4, 6}});
  CHECK_THROWS_AS(w.require_shape(Margins({1, 1}, {2})), ValidationError);
  CHECK(numerical_rank(w) == 1);
  CHECK(numerical_rank(WeightMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}})) == 3);
  CHECK(numerical_rank(WeightMatrix(2, 2, 0.0)) == 0);
}

TEST_CASE("brute-force examples") {
  CHECK(exact_count_bruteforce(Margins({1, 1}, {1, 1})) == 2);
  CHECK(exact_count_bruteforce(Margins({2, 2}, {2, 2})) == 3);
  CHECK(exact_count_bruteforce(Margins({2, 2, 2}, {2, 2, 2})) == 21);
  CHECK_THROWS_AS(exact_count_bruteforce(Margins({4, 4, 4, 4}, {4, 4, 4, 4}), 100), BudgetError);
}

TEST_CASE("enumerated tables have the requested margins") {
  const Margins m({3, 1, 2}, {2, 2, 2});
  std::size_t seen = 0;
  for_each_table(m, 0, [&](const std::vector<unsigned>& d) {
    ++seen;
    for (std::size_t i = 0; i < 3; ++i) CHECK(d[3 * i] + d[3 * i + 1] + d[3 * i + 2] == m.rows()[i]);
    for (std::size_t j = 0; j < 3; ++j) CHECK(d[j] + d[3 + j] + d[6 + j] == m.cols()[j]);
  });
  CHECK(Integer(seen) == exact_count_dp(m));
}

TEST_CASE("dynamic programme examples") {
  CHECK(exact_count_dp(Margins({1, 1, 1}, {1, 1, 1})) == 6);
  CHECK(exact_count_dp(Margins({2, 2}, {1, 1, 1, 1})) == 6);
  // Frozen from an independent enumeration.
  CHECK(exact_count_dp(Margins({2, 2, 2, 2}, {2, 2, 2, 2})) == 282);
  CHECK(exact_count_dp(Margins(std::vector<unsigned>(6, 2), std::vector<unsigned>(6, 2))) == 202410);
  CHECK_THROWS_AS(exact_count_dp(Margins(std::vector<unsigned>(6, 3), std::vector<unsigned>(6, 3)), 5), BudgetError);
}

TEST_CASE("dynamic programme agrees with brute force on a small grid") {
  for (const auto& m : margin_grid(3, 6)) {
    REQUIRE(exact_count_dp(m) == exact_count_bruteforce(m));
  }
}

TEST_CASE("0-1 counts") {
  CHECK(exact_count_01(Margins({1, 1}, {1, 1})) == 2);
  CHECK(exact_count_01(Margins({2, 2}, {2, 2})) == 1);
  CHECK(exact_count_01(Margins({2, 2, 2}, {2, 2, 2})) == 6);
  CHECK(exact_count_01(Margins({2, 2, 2, 2}, {2, 2, 2, 2})) == 90);
  CHECK(exact_count_01(Margins({3}, {1, 2})) == 0);
  CHECK(exact_count_01(Margins({2, 1}, {3})) == 0);
  for (const auto& m : margin_grid(3, 6)) {
    REQUIRE(exact_count_01(m) == count_01_by_enumeration(m));
  }
}

TEST_CASE("exact counts are invariant under permuting margins") {
  std::mt19937_64 gen(8);
  for (const auto& m : margin_grid(3, 6)) {
    auto rows = m.rows(), cols = m.cols();
    std::shuffle(rows.begin(), rows.end(), gen);
    std::shuffle(cols.begin(), cols.end(), gen);
    const Margins p(rows, cols);
    REQUIRE(exact_count_dp(p) == exact_count_dp(m));
    REQUIRE(exact_count_01(p) == exact_count_01(m));
    REQUIRE(exact_count_dp(m.transposed()) == exact_count_dp(m));
  }
}

TEST_CASE("Fisher-Yates closed form") {
  CHECK(fisher_yates_count(Margins({1, 1}, {1, 1})) == 2);
  CHECK(fisher_yates_count(Margins({2, 2}, {2, 2})) == Rational(3, 2));
  CHECK(margin_factorial_product(Margins({2, 3}, {4, 1})) == 2 * 6 * 24);
  for (const auto& m : margin_grid(3, 6)) {
    const std::vector<std::vector<Rational>> ones(m.num_rows(), std::vector<Rational>(m.num_cols(), 1));
    REQUIRE(fisher_yates_count(m) == weighted_bruteforce(m, ones, true));
  }
}

TEST_CASE("Bekessy formula") {
  double fact = 1;
  for (unsigned n = 1; n <= 7; ++n) {
    fact *= n;
    const Margins m(std::vector<unsigned>(n, 1), std::vector<unsigned>(n, 1));
    CHECK(bekessy_estimate(m) == fact);
  }
  CHECK(bekessy_estimate(Margins({2, 2}, {2, 2})) == doctest::Approx(1.5 * std::exp(0.5)));
  CHECK(bekessy_estimate(Margins({2, 2}, {2, 2})) == doctest::Approx(2.47308).epsilon(1e-5));

  // Relative error against exact counts shrinks for all-2 margins.
  double previous = 1e9;
  for (unsigned k : {2u, 4u, 6u}) {
    const Margins m(std::vector<unsigned>(k, 2), std::vector<unsigned>(k, 2));
    const double err = std::abs(bekessy_estimate(m) / exact_count_dp(m).get_d() - 1.0);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("single-sample estimator is the block-matrix permanent") {
  const Margins m({1, 1}, {1, 1});
  const std::vector<std::vector<double>> g = {{0.3, 1.7}, {2.5, 0.9}};
  CHECK(sample_permanent(m, g) == doctest::Approx(0.3 * 0.9 + 1.7 * 2.5).epsilon(1e-15));

  // The drawn values of sample i come from derive_seed(seed, i), row-major.
  const std::uint64_t seed = 42;
  const auto alphas = sample_permanents(m, nullptr, 3, seed);
  for (std::uint64_t i = 0; i < 3; ++i) {
    Rng rng(derive_seed(seed, i));
    const double g11 = rng.exponential(), g12 = rng.exponential(), g21 = rng.exponential(), g22 = rng.exponential();
    CHECK(alphas[i] == doctest::Approx(g11 * g22 + g12 * g21).epsilon(1e-15));
  }

  const auto w = WeightMatrix::from_rows({{2, 0}, {1, 3}});
  CHECK(sample_permanent(m, g, &w) == doctest::Approx(0.3 * 2 * 0.9 * 3));
}

TEST_CASE("single-sample estimator respects permuted margins") {
  // Permuting rows of the margins together with the drawn cells leaves the permanent unchanged.
  const Margins m({2, 1, 1}, {1, 3});
  const Margins p({1, 1, 2}, {3, 1});
  Rng rng(5);
  std::vector<std::vector<double>> g(3, std::vector<double>(2));
  for (auto& row : g) {
    for (auto& v : row) v = rng.exponential();
  }
  const std::vector<std::vector<double>> gp = {{g[2][1], g[2][0]}, {g[1][1], g[1][0]}, {g[0][1], g[0][0]}};
  CHECK(sample_permanent(p, gp) == doctest::Approx(sample_permanent(m, g)).epsilon(1e-14));
}

TEST_CASE("Monte Carlo estimates cover exact counts") {
  const auto a = mc_estimate_count(Margins({1, 1}, {1, 1}), 100000, 7);
  CHECK(a.ci_low <= 2.0);
  CHECK(a.ci_high >= 2.0);
  const auto b = mc_estimate_count(Margins({2, 2}, {2, 2}), 100000, 7);
  CHECK(b.ci_low <= 3.0);
  CHECK(b.ci_high >= 3.0);
  for (const auto& est : {a, b}) {
    CHECK(est.std_err >= 0.0);
    CHECK(est.ci_low <= est.mean);
    CHECK(est.mean <= est.ci_high);
    CHECK(est.mean >= 0.0);
    CHECK(est.num_samples == 100000);
    CHECK(est.seed == 7);
    CHECK(est.exact_divisor_applied);
  }
  CHECK_THROWS_AS(mc_estimate_count(Margins({1, 1}, {1, 1}), 1, 7), ValidationError);
  CHECK_THROWS_AS(mc_estimate_count(Margins({12, 11}, {12, 11}), 10, 7), BudgetError);
}

TEST_CASE("Monte Carlo mean over disjoint seeds is unbiased") {
  const Margins m({2, 1, 1}, {2, 2});
  const double exact = exact_count_dp(m).get_d();
  double total = 0, var = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto est = mc_estimate_count(m, 2000, seed * 1000003);
    total += est.mean;
    var += est.std_err * est.std_err;
  }
  CHECK(std::abs(total / 50 - exact) <= 3 * std::sqrt(var) / 50);
}

TEST_CASE("Monte Carlo is deterministic across thread counts") {
  const Margins m({2, 2, 1}, {1, 2, 2});
  const auto one = sample_permanents(m, nullptr, 1001, 9, {1});
  const auto three = sample_permanents(m, nullptr, 1001, 9, {3});
  const auto all = sample_permanents(m, nullptr, 1001, 9, {0});
  CHECK(one == three);
  CHECK(one == all);
  const auto e1 = mc_estimate_count(m, 1001, 9, {1});
  const auto e4 = mc_estimate_count(m, 1001, 9, {4});
  CHECK(e1.mean == e4.mean);
  CHECK(e1.std_err == e4.std_err);
}

TEST_CASE("Chebyshev sample count") {
  CHECK(chebyshev_sample_count(2.5, 0.1) == 450);
  CHECK(chebyshev_sample_count(1.0, 0.1) == 1);
  CHECK_THROWS_AS(chebyshev_sample_count(2.0, 0.0), ValidationError);
}

TEST_CASE("variance ratio report") {
  const auto rep = variance_ratio_report(Margins({1, 1}, {1, 1}), 200000, 3);
  CHECK(rep.bound_part2 == 16.0);
  CHECK(std::abs(rep.empirical_ratio - 2.5) <= 3 * rep.ratio_std_err);
  CHECK(rep.within_part2());
  REQUIRE(rep.bound_part3);
  CHECK(*rep.bound_part3 == doctest::Approx(std::exp(2.0)));
  CHECK(rep.part3_applicable);

  const auto six = variance_ratio_report(Margins({2, 2, 2}, {2, 2, 2}), 2000, 3);
  CHECK(six.bound_part2 == 4096.0);
  CHECK(six.bound_part3_exponent == 4 * 24);
  REQUIRE(six.bound_part3);

  const auto big = variance_ratio_report(Margins({3, 1}, {2, 2}), 100, 3);
  CHECK(big.bound_part3_exponent == 9 * 720);
  CHECK_FALSE(big.bound_part3);

  const auto w = WeightMatrix::from_rows({{1, 2}, {0.5, 1}});
  const auto weighted = weighted_variance_ratio_report(Margins({1, 1}, {1, 1}), w, 1000, 3);
  CHECK_FALSE(weighted.part3_applicable);
  CHECK(weighted.within_part2());
}

TEST_CASE("weighted Fisher-Yates count") {
  const Margins m({2, 2}, {2, 2});
  const ExactWeightMatrix ones(2, 2, Rational(1));
  CHECK(weighted_fy_count(m, ones) == fisher_yates_count(m));
  CHECK(weighted_fy_count(m, ExactWeightMatrix(2, 2, Rational(0))) == 0);
  CHECK(weighted_fy_count(m, WeightMatrix(2, 2, 1.0)) == doctest::Approx(1.5));

  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<Rational>> w(2, std::vector<Rational>(2));
    for (auto& row : w) {
      for (auto& v : row) v = testing::random_rational(gen, 0, 6, 5);
    }
    CHECK(weighted_fy_count(m, ExactWeightMatrix::from_rows(w)) == weighted_bruteforce(m, w, true));
  }
}

TEST_CASE("weighted Monte Carlo") {
  const Margins m({2, 2}, {2, 2});
  const auto ones = mc_weighted_count(m, WeightMatrix(2, 2, 1.0), 100000, 4);
  CHECK(ones.ci_low <= 3.0);
  CHECK(ones.ci_high >= 3.0);

  // Allowed-cell counting with a 0/1 pattern.
  const Margins k({2, 1, 1}, {1, 2, 1});
  const std::vector<std::vector<double>> pattern = {{1, 1, 0}, {0, 1, 1}, {1, 0, 1}};
  const double allowed = weighted_bruteforce(k, pattern, false);
  const auto est = mc_weighted_count(k, WeightMatrix::from_rows(pattern), 100000, 4);
  CHECK(est.ci_low <= allowed);
  CHECK(est.ci_high >= allowed);

  const auto zero_row = mc_weighted_count(m, WeightMatrix::from_rows({{0, 0}, {1, 1}}), 100, 4);
  CHECK(zero_row.mean == 0.0);
}

TEST_CASE("low-rank pipeline with exact h reproduces exact counts") {
  LowRankOptions direct, reduced;
  direct.exact_surrogate = reduced.exact_surrogate = true;
  direct.route = PairingRoute::direct;
  reduced.route = PairingRoute::reduced;
  for (const auto& m : margin_grid(3, 6)) {
    if (m.num_cols() < 2) continue;
    const double exact = exact_count_dp(m).get_d();
    REQUIRE(lowrank_asymptotic_count(m, 0.2, 1, direct).value == exact);
    REQUIRE(lowrank_asymptotic_count(m, 0.2, 1, reduced).value == exact);
    REQUIRE(lowrank_01_count(m, 0.2, 1, direct).value == exact_count_01(m).get_d());
    const auto q = exact_complete_product<Rational>(m.rows(), m.num_cols());
    REQUIRE(pair_with_monomial(q, m.cols(), PairingRoute::reduced).value == exact_count_dp(m));
  }
}

TEST_CASE("low-rank counts land in the band") {
  const Margins m({2, 2, 2}, {2, 2, 2});
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto est = lowrank_asymptotic_count(m, 0.2, seed);
    CHECK(est.samples_per_degree.at(2) == choose_sample_count(2, 0.2, 3));
    CHECK(est.band_lower == doctest::Approx(std::pow(0.8, 6)));
    CHECK(est.band_upper == doctest::Approx(std::pow(1.2, 6)));
    hits += in_band(est, 21.0);
  }
  CHECK(hits >= 2);

  const auto single = lowrank_asymptotic_count(Margins({2}, {1, 1}), 0.2, 5);
  CHECK(in_band(single, 1.0));
  CHECK(lowrank_asymptotic_count(m, 0.2, 1).value == lowrank_asymptotic_count(m, 0.2, 1).value);
}

TEST_CASE("reduced and direct routes agree") {
  const Margins m({2, 2}, {1, 1, 1, 1});
  LowRankOptions opts;
  opts.samples = 1;
  opts.route = PairingRoute::reduced;
  const auto reduced = lowrank_asymptotic_count(m, 0.3, 11, opts);
  CHECK(reduced.rank == 1);
  CHECK(reduced.route == PairingRoute::reduced);
  opts.route = PairingRoute::direct;
  const auto direct = lowrank_asymptotic_count(m, 0.3, 11, opts);
  CHECK(direct.route == PairingRoute::direct);
  CHECK(reduced.value == doctest::Approx(direct.value).epsilon(1e-12));
  opts.route = PairingRoute::automatic;
  CHECK(lowrank_asymptotic_count(m, 0.3, 11, opts).route == PairingRoute::reduced);

  const Margins three({2, 1, 1}, {1, 1, 2});
  for (std::uint64_t forms : {1u, 2u, 5u}) {
    opts.samples = forms;
    opts.route = PairingRoute::reduced;
    const double a = lowrank_asymptotic_count(three, 0.3, 2, opts).value;
    opts.route = PairingRoute::direct;
    const double b = lowrank_asymptotic_count(three, 0.3, 2, opts).value;
    CHECK(a == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("reduced route reports its cost when over budget") {
  LowRankOptions opts;
  opts.samples = 200;
  opts.route = PairingRoute::reduced;
  opts.term_cap = 5000;
  try {
    lowrank_asymptotic_count(Margins({2, 2, 2}, {2, 2, 2}), 0.2, 1, opts);
    FAIL("expected a budget error");
  } catch (const BudgetError& e) {
    CHECK(std::string(e.what()).find("rank 200") != std::string::npos);
  }
  LowRankOptions tiny;
  tiny.term_cap = 100;
  CHECK_THROWS_AS(lowrank_asymptotic_count(Margins({2, 2, 2}, {2, 2, 2}), 0.2, 1, tiny), BudgetError);
}

TEST_CASE("repeats return the median") {
  LowRankOptions opts;
  opts.repeats = 3;
  opts.samples = 50;
  const auto est = lowrank_asymptotic_count(Margins({2, 2}, {2, 2}), 0.2, 4, opts);
  REQUIRE(est.repeat_values.size() == 3);
  auto sorted = est.repeat_values;
  std::sort(sorted.begin(), sorted.end());
  CHECK(est.value == sorted[1]);
  CHECK(sorted[0] != sorted[2]);
  CHECK_THROWS_AS(lowrank_asymptotic_count(Margins({2, 2}, {2, 2}), 0.2, 4, LowRankOptions{.repeats = 0}),
                  ValidationError);
}

TEST_CASE("column-set queries") {
  const std::vector<unsigned> rows = {2, 2, 2};
  const std::vector<std::set<unsigned>> singletons = {{2}, {2}, {2}};
  const auto a = lowrank_column_sets_count(rows, singletons, 0.2, 9);
  const auto b = lowrank_asymptotic_count(Margins(rows, {2, 2, 2}), 0.2, 9);
  CHECK(a.value == b.value);

  LowRankOptions exact;
  exact.exact_surrogate = true;
  for (const auto& r : std::vector<std::vector<unsigned>>{{1, 1}, {2, 1}, {2, 2}, {3}, {1, 3}}) {
    const unsigned total = std::accumulate(r.begin(), r.end(), 0U);
    std::set<unsigned> all;
    for (unsigned v = 0; v <= total; ++v) all.insert(v);
    // Sum over column-sum vectors (c₁, c₂) of the exact counts; zero columns drop out.
    double expected = 0;
    for (unsigned c1 = 0; c1 <= total; ++c1) {
      std::vector<unsigned> cols;
      if (c1 > 0) cols.push_back(c1);
      if (total - c1 > 0) cols.push_back(total - c1);
      expected += exact_count_bruteforce(Margins(r, cols)).get_d();
    }
    CHECK(lowrank_column_sets_count(r, {all, all}, 0.2, 1, exact).value == expected);
    exact.route = PairingRoute::reduced;
    CHECK(lowrank_column_sets_count(r, {all, all}, 0.2, 1, exact).value == expected);
    exact.route = PairingRoute::automatic;
  }

  // Mixed sets, exact surrogate, both routes.
  const std::vector<std::set<unsigned>> mixed = {{0, 2}, {1, 3}, {1, 2}};
  double expected = 0;
  for (unsigned c1 : mixed[0]) {
    for (unsigned c2 : mixed[1]) {
      for (unsigned c3 : mixed[2]) {
        if (c1 + c2 + c3 != 4) continue;
        std::vector<unsigned> cols;
        for (unsigned c : {c1, c2, c3}) {
          if (c > 0) cols.push_back(c);
        }
        expected += exact_count_dp(Margins({2, 2}, cols)).get_d();
      }
    }
  }
  exact.route = PairingRoute::direct;
  CHECK(lowrank_column_sets_count({2, 2}, mixed, 0.2, 1, exact).value == expected);
  exact.route = PairingRoute::reduced;
  CHECK(lowrank_column_sets_count({2, 2}, mixed, 0.2, 1, exact).value == expected);

  CHECK(lowrank_column_sets_count(rows, {{2}, {}, {2}}, 0.2, 9).value == 0.0);
  CHECK_THROWS_AS(lowrank_column_sets_count(rows, {{2}, {7}, {2}}, 0.2, 9), ValidationError);
}

TEST_CASE("low-rank 0-1 counts") {
  CHECK(in_band(lowrank_01_count(Margins({1, 1}, {1, 1}), 0.2, 1), 2.0));
  const auto forced = lowrank_01_count(Margins({2, 2}, {2, 2}), 0.2, 1);
  CHECK(forced.value == doctest::Approx(1.0).epsilon(1e-12));
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) hits += in_band(lowrank_01_count(Margins({2, 2, 2}, {2, 2, 2}), 0.2, seed), 6.0);
  CHECK(hits >= 2);
  CHECK(lowrank_01_count(Margins({3, 1}, {2, 2}), 0.2, 1).value == 0.0);
}

TEST_CASE("weight factorization") {
  const auto w = WeightMatrix::from_rows({{1, 2, 0}, {2, 4, 0}, {0, 1, 1}});
  const auto f = factor_weights(w);
  REQUIRE(f.basis_rows.size() == 2);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      double v = 0;
      for (std::size_t t = 0; t < 2; ++t) v += f.coefficients[i][t] * f.basis_rows[t].coeffs[j];
      CHECK(v == doctest::Approx(w(i, j)).epsilon(1e-12));
    }
  }
  CHECK(factor_weights(WeightMatrix(2, 3, 0.0)).basis_rows.empty());
}

TEST_CASE("low-rank weighted counts") {
  const Margins m({2, 1, 1}, {2, 1, 1});
  const WeightMatrix ones(3, 3, 1.0);
  const auto fy = lowrank_weighted_count(m, ones, 0.2, 1, {}, Weighting::fisher_yates);
  CHECK(fy.value == doctest::Approx(weighted_fy_count(m, ones)).epsilon(1e-12));
  CHECK(fy.band_lower == 1.0);

  std::mt19937_64 gen(23);
  for (const auto& mm : margin_grid(3, 6)) {
    if (mm.num_cols() < 2) continue;
    std::vector<std::vector<double>> u(mm.num_rows(), std::vector<double>(mm.num_cols()));
    for (auto& row : u) {
      for (auto& v : row) v = std::uniform_int_distribution<int>(0, 4)(gen) / 2.0;
    }
    const auto w = WeightMatrix::from_rows(u);
    LowRankOptions opts;
    opts.max_weight_rank = 3;
    const double got = lowrank_weighted_count(mm, w, 0.2, 1, opts, Weighting::fisher_yates).value;
    CHECK(got == doctest::Approx(weighted_bruteforce(mm, u, true)).epsilon(1e-10));
  }

  // Rank-1 W = u·vᵀ scales every table by ∏uᵢ^rᵢ ∏vⱼ^cⱼ.
  const std::vector<double> u = {1.0, 2.0, 0.5}, v = {1.5, 1.0, 0.5};
  std::vector<std::vector<double>> rank1(3, std::vector<double>(3));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) rank1[i][j] = u[i] * v[j];
  }
  const double target = weighted_bruteforce(m, rank1, false);
  double factor = 1;
  for (std::size_t i = 0; i < 3; ++i) factor *= std::pow(u[i], m.rows()[i]) * std::pow(v[i], m.cols()[i]);
  CHECK(target == doctest::Approx(factor * exact_count_dp(m).get_d()));
  const auto plain = lowrank_weighted_count(m, WeightMatrix::from_rows(rank1), 0.2, 3);
  CHECK(plain.rank == choose_sample_count(2, 0.2, 3) + choose_sample_count(1, 0.2, 3));
  CHECK(in_band(plain, target));

  const auto plain_ones = lowrank_weighted_count(m, ones, 0.2, 3);
  CHECK(in_band(plain_ones, exact_count_dp(m).get_d()));

  const auto zero_col = WeightMatrix::from_rows({{1, 0, 1}, {1, 0, 1}, {1, 0, 1}});
  CHECK(lowrank_weighted_count(m, zero_col, 0.2, 1).value == 0.0);
  CHECK(lowrank_weighted_count(m, WeightMatrix(3, 3, 0.0), 0.2, 1).value == 0.0);

  LowRankOptions strict;
  strict.max_weight_rank = 1;
  CHECK_THROWS_AS(lowrank_weighted_count(m, WeightMatrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}), 0.2, 1, strict),
                  BudgetError);
}
