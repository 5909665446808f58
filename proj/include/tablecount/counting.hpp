#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tablecount/lowrank_product.hpp"
#include "tablecount/margins.hpp"
#include "tablecount/numeric.hpp"
#include "tablecount/permanent.hpp"
#include "tablecount/symmetric_lowrank.hpp"

namespace tablecount {

inline constexpr std::uint64_t kDefaultEnumerationCap = 200'000'000;
inline constexpr std::size_t kDefaultStateCap = 10'000'000;

// ---------------------------------------------------------------------------
// Exact counts and closed forms

/// Calls visit(d) for every table d (row-major, m·n entries) with the given
/// margins and entries ≤ entry_cap (0 = unbounded), enumerating cell by cell
/// with remaining-sum pruning. Throws BudgetError after max_nodes search nodes.
void for_each_table(const Margins& margins, unsigned entry_cap,
                    const std::function<void(const std::vector<unsigned>&)>& visit,
                    std::uint64_t max_nodes = kDefaultEnumerationCap);

Integer exact_count_bruteforce(const Margins& margins, std::uint64_t max_nodes = kDefaultEnumerationCap);

/// Column-by-column dynamic programme; memo keyed by (column, sorted
/// remaining row sums), valid because later columns treat rows symmetrically.
Integer exact_count_dp(const Margins& margins, std::size_t max_states = kDefaultStateCap);

/// 0-1 tables with the given margins; infeasible margins give 0.
Integer exact_count_01(const Margins& margins, std::size_t max_states = kDefaultStateCap);

/// N!/(r₁!⋯r_m!·c₁!⋯cₙ!), the table count under weight ∏ 1/dᵢⱼ!.
Rational fisher_yates_count(const Margins& margins);

/// ∏ rᵢ! · ∏ cⱼ!.
Integer margin_factorial_product(const Margins& margins);

/// N!/(∏rᵢ!∏cⱼ!) · exp{(2/N²) Σᵢⱼ C(rᵢ,2) C(cⱼ,2)}.
double bekessy_estimate(const Margins& margins);

// ---------------------------------------------------------------------------
// Permanent-based Monte Carlo

struct MonteCarloOptions {
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 1;
  std::size_t permanent_cap = kDefaultPermanentCap;
};

struct CountEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  /// 95% normal-approximation interval, lower end clamped at 0.
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t num_samples = 0;
  std::uint64_t seed = 0;
  bool exact_divisor_applied = true;
  /// mean(α²)/mean(α)² over the same samples.
  double second_moment_ratio = 0.0;
};

/// per A for the block matrix whose block Rᵢ×Cⱼ holds gammas[i][j]·W(i,j)
/// (W omitted = all ones). This is the single-sample estimator before the
/// ∏rᵢ!∏cⱼ! divisor.
double sample_permanent(const Margins& margins, const std::vector<std::vector<double>>& gammas,
                        const WeightMatrix* weights = nullptr, std::size_t permanent_cap = kDefaultPermanentCap);

/// The raw permanents α₁..α_s. Sample i draws its m·n exponentials, row-major,
/// from Rng(derive_seed(seed, i)), so the output does not depend on threads.
std::vector<double> sample_permanents(const Margins& margins, const WeightMatrix* weights, std::uint64_t num_samples,
                                      std::uint64_t seed, const MonteCarloOptions& options = {});

/// Unbiased estimate of the number of tables: mean of per A / (∏rᵢ!∏cⱼ!).
CountEstimate mc_estimate_count(const Margins& margins, std::uint64_t num_samples, std::uint64_t seed,
                                const MonteCarloOptions& options = {});

/// Unbiased estimate of Σ over tables of ∏ wᵢⱼ^dᵢⱼ.
CountEstimate mc_weighted_count(const Margins& margins, const WeightMatrix& weights, std::uint64_t num_samples,
                                std::uint64_t seed, const MonteCarloOptions& options = {});

/// Samples needed so that, by Chebyshev, the sample mean is within relative
/// error ε with probability ≥ p, given E α²/E²α = ratio.
std::uint64_t chebyshev_sample_count(double ratio, double epsilon, double p = 2.0 / 3.0);

struct VarianceReport {
  double empirical_ratio = 0.0;
  /// Delta-method standard error of empirical_ratio.
  double ratio_std_err = 0.0;
  /// 2^{2N}.
  double bound_part2 = 0.0;
  /// ρ²(2ρ)!, the exponent of the bounded-margin constant.
  Integer bound_part3_exponent;
  /// exp{ρ²(2ρ)!} when finite in double precision.
  std::optional<double> bound_part3;
  /// False for weighted runs, where the bounded-margin constant does not apply.
  bool part3_applicable = true;
  std::uint64_t num_samples = 0;
  std::uint64_t seed = 0;

  /// empirical_ratio ≤ bound_part2 + 3·ratio_std_err.
  bool within_part2() const { return empirical_ratio <= bound_part2 + 3.0 * ratio_std_err; }
};

VarianceReport variance_ratio_report(const Margins& margins, std::uint64_t num_samples, std::uint64_t seed,
                                     const MonteCarloOptions& options = {});

VarianceReport weighted_variance_ratio_report(const Margins& margins, const WeightMatrix& weights,
                                              std::uint64_t num_samples, std::uint64_t seed,
                                              const MonteCarloOptions& options = {});

/// Σ over tables of ∏ wᵢⱼ^dᵢⱼ/dᵢⱼ!, as per A/(∏rᵢ!∏cⱼ!) for the block
/// matrix with constant wᵢⱼ on block Rᵢ×Cⱼ.
Rational weighted_fy_count(const Margins& margins, const ExactWeightMatrix& weights,
                           std::size_t permanent_cap = kDefaultPermanentCap);
double weighted_fy_count(const Margins& margins, const WeightMatrix& weights,
                         std::size_t permanent_cap = kDefaultPermanentCap);

// ---------------------------------------------------------------------------
// Low-rank asymptotic counting

struct LowRankOptions {
  PairingRoute route = PairingRoute::automatic;
  std::size_t term_cap = kDefaultTermCap;
  /// Independent repetitions; the median value is returned.
  unsigned repeats = 1;
  /// Overrides the Azuma-selected number of forms per approximation.
  std::optional<std::uint64_t> samples;
  /// Largest admissible numerical rank of a weight matrix.
  std::size_t max_weight_rank = 4;
  /// Use the exact h_r (or e_r) over the coordinate forms instead of the
  /// random approximation. The pipeline is otherwise unchanged, so this
  /// checks the pairing machinery against exact counts.
  bool exact_surrogate = false;
};

struct LowRankEstimate {
  double value = 0.0;
  /// value/exact is guaranteed (with probability ≥ 2/3 per repeat) to lie in
  /// [band_lower, band_upper] = [(1−ε)ᴺ, (1+ε)ᴺ].
  double band_lower = 1.0;
  double band_upper = 1.0;
  std::size_t rank = 0;
  PairingRoute route = PairingRoute::automatic;
  std::size_t left_terms = 0;
  std::size_t right_terms = 0;
  /// Forms (or surjections) per distinct row sum.
  std::map<unsigned, std::uint64_t> samples_per_degree;
  std::vector<double> repeat_values;
  std::uint64_t seed = 0;
};

/// Seed for the approximation of degree r in repeat `rep`.
std::uint64_t approximation_seed(std::uint64_t seed, unsigned repeats, unsigned rep, unsigned r);

/// Realizes ∏ h_{rᵢ} exactly over the coordinate basis e₁..eₙ.
template <class C>
LowRankProduct<C> exact_complete_product(const std::vector<unsigned>& rows, std::size_t n) {
  LowRankProduct<C> h;
  h.num_vars = n;
  for (std::size_t j = 0; j < n; ++j) h.basis.push_back(LinearForm<C>::coordinate(n, j));
  std::map<unsigned, std::size_t> factor_of;
  for (unsigned r : rows) {
    auto [it, inserted] = factor_of.try_emplace(r, h.factors.size());
    if (inserted) {
      LowRankFactor<C> f;
      for_each_monomial(n, r, [&](const Monomial& a) {
        FormProductTerm<C> term{C(1), {}};
        for (std::size_t j = 0; j < n; ++j) {
          if (a[j] > 0) term.powers.push_back({Combination<C>{{j, C(1)}}, a[j]});
        }
        f.terms.push_back(std::move(term));
      });
      h.factors.push_back(std::move(f));
    }
    h.row_factor.push_back(it->second);
  }
  return h;
}

/// Realizes ∏ e_{rᵢ} exactly over the coordinate basis.
template <class C>
LowRankProduct<C> exact_elementary_product(const std::vector<unsigned>& rows, std::size_t n) {
  LowRankProduct<C> h;
  h.num_vars = n;
  for (std::size_t j = 0; j < n; ++j) h.basis.push_back(LinearForm<C>::coordinate(n, j));
  std::map<unsigned, std::size_t> factor_of;
  for (unsigned r : rows) {
    auto [it, inserted] = factor_of.try_emplace(r, h.factors.size());
    if (inserted) {
      LowRankFactor<C> f;
      for_each_monomial(
          n, r,
          [&](const Monomial& a) {
            FormProductTerm<C> term{C(1), {}};
            for (std::size_t j = 0; j < n; ++j) {
              if (a[j] > 0) term.powers.push_back({Combination<C>{{j, C(1)}}, 1});
            }
            f.terms.push_back(std::move(term));
          },
          std::vector<unsigned>(n, 1));
      h.factors.push_back(std::move(f));
    }
    h.row_factor.push_back(it->second);
  }
  return h;
}

/// ∏ h̃_{rᵢ} with one approximation per distinct row sum; its forms form the basis.
LowRankProduct<double> complete_product(const std::vector<unsigned>& rows,
                                        const std::map<unsigned, ApproxSymmetricPoly>& approximations);

/// ∏ ẽ_{rᵢ}, likewise.
LowRankProduct<double> elementary_product(const std::vector<unsigned>& rows,
                                          const std::map<unsigned, ApproxSymmetricPoly>& approximations);

LowRankEstimate lowrank_asymptotic_count(const Margins& margins, double epsilon, std::uint64_t seed,
                                         const LowRankOptions& options = {});

LowRankEstimate lowrank_column_sets_count(const std::vector<unsigned>& rows,
                                          const std::vector<std::set<unsigned>>& column_sets, double epsilon,
                                          std::uint64_t seed, const LowRankOptions& options = {});

LowRankEstimate lowrank_01_count(const Margins& margins, double epsilon, std::uint64_t seed,
                                 const LowRankOptions& options = {});

enum class Weighting {
  plain,         ///< Σ ∏ wᵢⱼ^dᵢⱼ, randomized forms Σⱼ wᵢⱼ γⱼ xⱼ
  fisher_yates,  ///< Σ ∏ wᵢⱼ^dᵢⱼ/dᵢⱼ!, deterministic forms (Σⱼ wᵢⱼ xⱼ)^rᵢ/rᵢ!
};

std::string to_string(Weighting weighting);

/// W = U·B with B a set of linearly independent rows of W.
struct RankFactorization {
  std::vector<std::vector<double>> coefficients;  // m × k
  std::vector<LinearForm<double>> basis_rows;     // k forms over n variables
};

RankFactorization factor_weights(const WeightMatrix& weights, double tolerance = 1e-9);

LowRankEstimate lowrank_weighted_count(const Margins& margins, const WeightMatrix& weights, double epsilon,
                                       std::uint64_t seed, const LowRankOptions& options = {},
                                       Weighting weighting = Weighting::plain);

}  // namespace tablecount
