#include "tablecount/counting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "tablecount/errors.hpp"
#include "tablecount/random.hpp"

namespace tablecount {

namespace {

constexpr double kNormal975 = 1.959963984540054;

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in (0, 1)");
}

// Memoized column-by-column count; entry_cap 0 means unbounded entries.
class TableCounter {
public:
  TableCounter(const std::vector<unsigned>& cols, unsigned entry_cap, std::size_t max_states)
      : cols_(cols), cap_(entry_cap), max_states_(max_states), memo_(cols.size()) {}

  Integer count(std::vector<unsigned> rows) {
    std::sort(rows.begin(), rows.end(), std::greater<>());
    return solve(0, rows);
  }

private:
  Integer solve(std::size_t col, const std::vector<unsigned>& remaining) {
    if (col == cols_.size()) {
      return std::all_of(remaining.begin(), remaining.end(), [](unsigned v) { return v == 0; }) ? 1 : 0;
    }
    auto& memo = memo_[col];
    if (auto it = memo.find(remaining); it != memo.end()) return it->second;

    Integer total = 0;
    std::vector<unsigned> take(remaining.size(), 0);
    // capacity[i] = Σ_{k≥i} min(remaining[k], cap)
    std::vector<unsigned> capacity(remaining.size() + 1, 0);
    for (std::size_t i = remaining.size(); i-- > 0;) capacity[i] = capacity[i + 1] + limit(remaining[i]);

    std::function<void(std::size_t, unsigned)> distribute = [&](std::size_t i, unsigned left) {
      if (left > capacity[i]) return;
      if (i == remaining.size()) {
        std::vector<unsigned> next(remaining.size());
        for (std::size_t k = 0; k < next.size(); ++k) next[k] = remaining[k] - take[k];
        std::sort(next.begin(), next.end(), std::greater<>());
        total += solve(col + 1, next);
        return;
      }
      const unsigned hi = std::min(left, limit(remaining[i]));
      for (unsigned v = 0; v <= hi; ++v) {
        take[i] = v;
        distribute(i + 1, left - v);
      }
      take[i] = 0;
    };
    distribute(0, cols_[col]);

    if (++states_ > max_states_) {
      throw BudgetError("dynamic programme exceeds the cap of " + std::to_string(max_states_) + " memo states");
    }
    memo.emplace(remaining, total);
    return total;
  }

  unsigned limit(unsigned v) const { return cap_ == 0 ? v : std::min(v, cap_); }

  const std::vector<unsigned>& cols_;
  unsigned cap_;
  std::size_t max_states_;
  std::size_t states_ = 0;
  std::vector<std::map<std::vector<unsigned>, Integer>> memo_;
};

CountEstimate summarize(const std::vector<double>& alphas, double divisor, std::uint64_t seed) {
  const auto n = static_cast<double>(alphas.size());
  long double sum = 0, sum_sq = 0;
  for (double a : alphas) {
    const long double v = a / divisor;
    sum += v;
    sum_sq += v * v;
  }
  CountEstimate est;
  est.num_samples = alphas.size();
  est.seed = seed;
  est.mean = static_cast<double>(sum / n);
  long double centered = 0;
  for (double a : alphas) {
    const long double d = a / divisor - static_cast<long double>(est.mean);
    centered += d * d;
  }
  const double sd = std::sqrt(static_cast<double>(centered / (n - 1)));
  est.std_err = sd / std::sqrt(n);
  est.ci_low = std::max(0.0, est.mean - kNormal975 * est.std_err);
  est.ci_high = est.mean + kNormal975 * est.std_err;
  const long double mean = sum / n;
  est.second_moment_ratio = mean > 0 ? static_cast<double>((sum_sq / n) / (mean * mean)) : 0.0;
  return est;
}

VarianceReport variance_report(const Margins& margins, const std::vector<double>& alphas, std::uint64_t seed,
                               bool weighted) {
  VarianceReport rep;
  rep.num_samples = alphas.size();
  rep.seed = seed;
  rep.bound_part2 = std::ldexp(1.0, 2 * static_cast<int>(margins.total()));
  const unsigned rho = margins.max_margin();
  rep.bound_part3_exponent = Integer(rho) * rho * factorial(2 * rho);
  if (rep.bound_part3_exponent < 709) rep.bound_part3 = std::exp(rep.bound_part3_exponent.get_d());
  rep.part3_applicable = !weighted;

  const auto n = static_cast<long double>(alphas.size());
  long double sum = 0;
  for (double a : alphas) sum += a;
  const long double mean = sum / n;
  if (mean <= 0) return rep;
  // Work with x = α / mean(α): then mean(x) = 1 and the ratio is mean(x²).
  long double m2 = 0;
  for (double a : alphas) {
    const long double x = a / mean;
    m2 += x * x;
  }
  m2 /= n;
  long double var1 = 0, var2 = 0, cov = 0;
  for (double a : alphas) {
    const long double x = a / mean;
    const long double d1 = x - 1, d2 = x * x - m2;
    var1 += d1 * d1;
    var2 += d2 * d2;
    cov += d1 * d2;
  }
  var1 /= (n - 1);
  var2 /= (n - 1);
  cov /= (n - 1);
  // R = M₂/M₁²: ∂R/∂M₁ = −2R, ∂R/∂M₂ = 1 at M₁ = 1.
  const long double g1 = -2 * m2;
  const long double var_r = (g1 * g1 * var1 + var2 + 2 * g1 * cov) / n;
  rep.empirical_ratio = static_cast<double>(m2);
  rep.ratio_std_err = static_cast<double>(std::sqrt(std::max<long double>(var_r, 0)));
  return rep;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t k = values.size();
  return k % 2 == 1 ? values[k / 2] : 0.5 * (values[k / 2 - 1] + values[k / 2]);
}

struct RepeatOutcome {
  PairingResult<double> pairing;
  std::map<unsigned, std::uint64_t> samples;
};

LowRankEstimate run_repeats(double epsilon, unsigned total, std::uint64_t seed, const LowRankOptions& options,
                            const std::function<RepeatOutcome(unsigned)>& one) {
  if (options.repeats == 0) throw ValidationError("repeats must be at least 1");
  LowRankEstimate est;
  est.seed = seed;
  est.band_lower = std::pow(1.0 - epsilon, total);
  est.band_upper = std::pow(1.0 + epsilon, total);
  for (unsigned rep = 0; rep < options.repeats; ++rep) {
    const RepeatOutcome out = one(rep);
    est.repeat_values.push_back(out.pairing.value);
    if (rep == 0) {
      est.rank = out.pairing.rank;
      est.route = out.pairing.route;
      est.left_terms = out.pairing.left_terms;
      est.right_terms = out.pairing.right_terms;
      est.samples_per_degree = out.samples;
    }
  }
  est.value = median(est.repeat_values);
  return est;
}

// Resolves the number of forms (or surjections) for degree r and refuses
// approximations whose coefficients alone would exceed the term budget.
std::uint64_t forms_for(unsigned r, std::size_t n, double epsilon, const LowRankOptions& options, SymmetricKind kind,
                        std::size_t width = 1) {
  const std::uint64_t m = options.samples ? *options.samples
                          : kind == SymmetricKind::complete ? choose_sample_count(r, epsilon, n)
                                                            : choose_sample_count_elementary(r, epsilon, n);
  const double stored = static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(width);
  if (stored > static_cast<double>(options.term_cap)) {
    throw BudgetError("degree " + std::to_string(r) + " needs " + std::to_string(m) + " forms over " +
                      std::to_string(n) + " variables, beyond the term cap of " + std::to_string(options.term_cap));
  }
  return m;
}

std::vector<unsigned> distinct(const std::vector<unsigned>& values) {
  std::vector<unsigned> out(values);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

void for_each_table(const Margins& margins, unsigned entry_cap,
                    const std::function<void(const std::vector<unsigned>&)>& visit, std::uint64_t max_nodes) {
  const std::size_t m = margins.num_rows(), n = margins.num_cols();
  std::vector<unsigned> row_rem = margins.rows(), col_rem = margins.cols();
  std::vector<unsigned> table(m * n, 0);
  std::uint64_t nodes = 0;
  const auto cap = [&](unsigned v) { return entry_cap == 0 ? v : std::min(v, entry_cap); };

  std::function<void(std::size_t)> rec = [&](std::size_t cell) {
    if (++nodes > max_nodes) {
      throw BudgetError("table enumeration exceeds the cap of " + std::to_string(max_nodes) + " search nodes");
    }
    if (cell == m * n) {
      visit(table);
      return;
    }
    const std::size_t i = cell / n, j = cell % n;
    auto place = [&](unsigned v) {
      table[cell] = v;
      row_rem[i] -= v;
      col_rem[j] -= v;
      rec(cell + 1);
      row_rem[i] += v;
      col_rem[j] += v;
      table[cell] = 0;
    };
    if (i + 1 == m) {
      const unsigned v = col_rem[j];
      if (v <= row_rem[i] && cap(v) == v) place(v);
      return;
    }
    if (j + 1 == n) {
      const unsigned v = row_rem[i];
      if (v <= col_rem[j] && cap(v) == v) place(v);
      return;
    }
    unsigned later = 0;  // what columns j+1.. can still absorb from row i
    for (std::size_t k = j + 1; k < n; ++k) later += cap(col_rem[k]);
    const unsigned hi = cap(std::min(row_rem[i], col_rem[j]));
    for (unsigned v = 0; v <= hi; ++v) {
      if (row_rem[i] - v <= later) place(v);
    }
  };
  rec(0);
}

Integer exact_count_bruteforce(const Margins& margins, std::uint64_t max_nodes) {
  Integer count = 0;
  for_each_table(margins, 0, [&](const std::vector<unsigned>&) { ++count; }, max_nodes);
  return count;
}

Integer exact_count_dp(const Margins& margins, std::size_t max_states) {
  return TableCounter(margins.cols(), 0, max_states).count(margins.rows());
}

Integer exact_count_01(const Margins& margins, std::size_t max_states) {
  return TableCounter(margins.cols(), 1, max_states).count(margins.rows());
}

Integer margin_factorial_product(const Margins& margins) {
  Integer d = 1;
  for (unsigned r : margins.rows()) d *= factorial(r);
  for (unsigned c : margins.cols()) d *= factorial(c);
  return d;
}

Rational fisher_yates_count(const Margins& margins) {
  Rational v(factorial(margins.total()), margin_factorial_product(margins));
  v.canonicalize();
  return v;
}

double bekessy_estimate(const Margins& margins) {
  const double n = margins.total();
  double s = 0.0;
  for (unsigned r : margins.rows()) {
    for (unsigned c : margins.cols()) s += (r * (r - 1.0) / 2.0) * (c * (c - 1.0) / 2.0);
  }
  return fisher_yates_count(margins).get_d() * std::exp(2.0 / (n * n) * s);
}

double sample_permanent(const Margins& margins, const std::vector<std::vector<double>>& gammas,
                        const WeightMatrix* weights, std::size_t permanent_cap) {
  if (weights) weights->require_shape(margins);
  std::vector<std::vector<double>> cells = gammas;
  if (cells.size() != margins.num_rows()) throw ValidationError("gamma rows do not match margins");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != margins.num_cols()) throw ValidationError("gamma columns do not match margins");
    if (weights) {
      for (std::size_t j = 0; j < cells[i].size(); ++j) cells[i][j] *= (*weights)(i, j);
    }
  }
  return permanent_exact(build_block_matrix(BlockStructure(margins.rows(), margins.cols()), cells), permanent_cap);
}

std::vector<double> sample_permanents(const Margins& margins, const WeightMatrix* weights, std::uint64_t num_samples,
                                      std::uint64_t seed, const MonteCarloOptions& options) {
  if (weights) weights->require_shape(margins);
  if (margins.total() > options.permanent_cap) {
    throw BudgetError("N = " + std::to_string(margins.total()) + " exceeds the permanent size cap of " +
                      std::to_string(options.permanent_cap));
  }
  const std::size_t m = margins.num_rows(), n = margins.num_cols();
  const BlockStructure blocks(margins.rows(), margins.cols());
  const auto row_owner = blocks.row_owner();
  const auto col_owner = blocks.col_owner();
  const std::size_t size = blocks.size();

  std::vector<double> alphas(num_samples);
  auto work = [&](std::uint64_t lo, std::uint64_t hi) {
    std::vector<double> cells(m * n);
    SquareMatrix<double> a(size);
    for (std::uint64_t s = lo; s < hi; ++s) {
      Rng rng(derive_seed(seed, s));
      for (std::size_t c = 0; c < cells.size(); ++c) {
        cells[c] = rng.exponential();
        if (weights) cells[c] *= (*weights)(c / n, c % n);
      }
      for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) a(i, j) = cells[row_owner[i] * n + col_owner[j]];
      }
      alphas[s] = permanent_exact(a, options.permanent_cap);
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(num_samples, 1)));
  if (threads <= 1) {
    work(0, num_samples);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (num_samples + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::uint64_t lo = t * chunk, hi = std::min(num_samples, lo + chunk);
      if (lo < hi) pool.emplace_back(work, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  return alphas;
}

CountEstimate mc_estimate_count(const Margins& margins, std::uint64_t num_samples, std::uint64_t seed,
                                const MonteCarloOptions& options) {
  if (num_samples < 2) throw ValidationError("need at least 2 samples");
  const auto alphas = sample_permanents(margins, nullptr, num_samples, seed, options);
  return summarize(alphas, margin_factorial_product(margins).get_d(), seed);
}

CountEstimate mc_weighted_count(const Margins& margins, const WeightMatrix& weights, std::uint64_t num_samples,
                                std::uint64_t seed, const MonteCarloOptions& options) {
  if (num_samples < 2) throw ValidationError("need at least 2 samples");
  const auto alphas = sample_permanents(margins, &weights, num_samples, seed, options);
  return summarize(alphas, margin_factorial_product(margins).get_d(), seed);
}

std::uint64_t chebyshev_sample_count(double ratio, double epsilon, double p) {
  require_epsilon(epsilon);
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("confidence p must lie in (0, 1)");
  const double variance = std::max(ratio - 1.0, 0.0);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(variance / (epsilon * epsilon * (1.0 - p)))));
}

VarianceReport variance_ratio_report(const Margins& margins, std::uint64_t num_samples, std::uint64_t seed,
                                     const MonteCarloOptions& options) {
  if (num_samples < 2) throw ValidationError("need at least 2 samples");
  return variance_report(margins, sample_permanents(margins, nullptr, num_samples, seed, options), seed, false);
}

VarianceReport weighted_variance_ratio_report(const Margins& margins, const WeightMatrix& weights,
                                              std::uint64_t num_samples, std::uint64_t seed,
                                              const MonteCarloOptions& options) {
  if (num_samples < 2) throw ValidationError("need at least 2 samples");
  return variance_report(margins, sample_permanents(margins, &weights, num_samples, seed, options), seed, true);
}

Rational weighted_fy_count(const Margins& margins, const ExactWeightMatrix& weights, std::size_t permanent_cap) {
  weights.require_shape(margins);
  const auto a = build_block_matrix(BlockStructure(margins.rows(), margins.cols()), weights.to_rows());
  Rational v = permanent_exact(a, permanent_cap) / Rational(margin_factorial_product(margins));
  return v;
}

double weighted_fy_count(const Margins& margins, const WeightMatrix& weights, std::size_t permanent_cap) {
  weights.require_shape(margins);
  const auto a = build_block_matrix(BlockStructure(margins.rows(), margins.cols()), weights.to_rows());
  return permanent_exact(a, permanent_cap) / margin_factorial_product(margins).get_d();
}

std::uint64_t approximation_seed(std::uint64_t seed, unsigned repeats, unsigned rep, unsigned r) {
  const std::uint64_t base = repeats <= 1 ? seed : derive_seed(seed, rep);
  return derive_seed(base, (std::uint64_t{1} << 32) | r);
}

LowRankProduct<double> complete_product(const std::vector<unsigned>& rows,
                                        const std::map<unsigned, ApproxSymmetricPoly>& approximations) {
  LowRankProduct<double> h;
  std::map<unsigned, std::size_t> factor_of;
  for (unsigned r : rows) {
    auto [it, inserted] = factor_of.try_emplace(r, h.factors.size());
    if (inserted) {
      const auto& approx = approximations.at(r);
      if (approx.kind != SymmetricKind::complete || approx.r != r) {
        throw ValidationError("approximation for row sum " + std::to_string(r) + " has the wrong kind or degree");
      }
      if (h.num_vars == 0) h.num_vars = approx.n;
      if (approx.n != h.num_vars) throw ValidationError("approximations over differing variable counts");
      LowRankFactor<double> f;
      const double coeff = approx.scale();
      for (const auto& form : approx.forms) {
        f.terms.push_back({coeff, {{Combination<double>{{h.basis.size(), 1.0}}, r}}});
        h.basis.push_back(form);
      }
      h.factors.push_back(std::move(f));
    }
    h.row_factor.push_back(it->second);
  }
  return h;
}

LowRankProduct<double> elementary_product(const std::vector<unsigned>& rows,
                                          const std::map<unsigned, ApproxSymmetricPoly>& approximations) {
  LowRankProduct<double> h;
  std::map<unsigned, std::size_t> factor_of;
  for (unsigned r : rows) {
    auto [it, inserted] = factor_of.try_emplace(r, h.factors.size());
    if (inserted) {
      const auto& approx = approximations.at(r);
      if (approx.kind != SymmetricKind::elementary || approx.r != r) {
        throw ValidationError("approximation for row sum " + std::to_string(r) + " has the wrong kind or degree");
      }
      if (h.num_vars == 0) h.num_vars = approx.n;
      if (approx.n != h.num_vars) throw ValidationError("approximations over differing variable counts");
      LowRankFactor<double> f;
      const double coeff = 1.0 / approx.normalizer;
      for (const auto& group : approx.groups) {
        FormProductTerm<double> term{coeff, {}};
        for (const auto& form : group) {
          term.powers.push_back({Combination<double>{{h.basis.size(), 1.0}}, 1});
          h.basis.push_back(form);
        }
        f.terms.push_back(std::move(term));
      }
      h.factors.push_back(std::move(f));
    }
    h.row_factor.push_back(it->second);
  }
  return h;
}

LowRankEstimate lowrank_asymptotic_count(const Margins& margins, double epsilon, std::uint64_t seed,
                                         const LowRankOptions& options) {
  require_epsilon(epsilon);
  const std::size_t n = margins.num_cols();
  return run_repeats(epsilon, margins.total(), seed, options, [&](unsigned rep) {
    RepeatOutcome out;
    if (options.exact_surrogate) {
      out.pairing = pair_with_monomial(exact_complete_product<double>(margins.rows(), n), margins.cols(),
                                       options.route, options.term_cap);
      return out;
    }
    std::map<unsigned, ApproxSymmetricPoly> approx;
    for (unsigned r : distinct(margins.rows())) {
      auto h = build_h_tilde(r, n, epsilon, approximation_seed(seed, options.repeats, rep, r),
                             forms_for(r, n, epsilon, options, SymmetricKind::complete));
      out.samples[r] = h.num_samples();
      approx.emplace(r, std::move(h));
    }
    out.pairing =
        pair_with_monomial(complete_product(margins.rows(), approx), margins.cols(), options.route, options.term_cap);
    return out;
  });
}

LowRankEstimate lowrank_column_sets_count(const std::vector<unsigned>& rows,
                                          const std::vector<std::set<unsigned>>& column_sets, double epsilon,
                                          std::uint64_t seed, const LowRankOptions& options) {
  require_epsilon(epsilon);
  if (rows.empty()) throw ValidationError("need at least one row");
  if (column_sets.empty()) throw ValidationError("need at least one column set");
  for (unsigned r : rows) {
    if (r == 0) throw ValidationError("row sums must be positive");
  }
  const unsigned total = std::accumulate(rows.begin(), rows.end(), 0U);
  for (const auto& s : column_sets) {
    if (!s.empty() && *s.rbegin() > total) {
      throw ValidationError("column set element " + std::to_string(*s.rbegin()) + " exceeds the total " +
                            std::to_string(total));
    }
  }
  const std::size_t n = column_sets.size();
  return run_repeats(epsilon, total, seed, options, [&](unsigned rep) {
    RepeatOutcome out;
    if (options.exact_surrogate) {
      out.pairing = pair_with_column_sets(exact_complete_product<double>(rows, n), column_sets, total, options.route,
                                          options.term_cap);
      return out;
    }
    std::map<unsigned, ApproxSymmetricPoly> approx;
    for (unsigned r : distinct(rows)) {
      auto h = build_h_tilde(r, n, epsilon, approximation_seed(seed, options.repeats, rep, r),
                             forms_for(r, n, epsilon, options, SymmetricKind::complete));
      out.samples[r] = h.num_samples();
      approx.emplace(r, std::move(h));
    }
    out.pairing = pair_with_column_sets(complete_product(rows, approx), column_sets, total, options.route,
                                        options.term_cap);
    return out;
  });
}

LowRankEstimate lowrank_01_count(const Margins& margins, double epsilon, std::uint64_t seed,
                                 const LowRankOptions& options) {
  require_epsilon(epsilon);
  const std::size_t n = margins.num_cols();
  const unsigned widest = *std::max_element(margins.rows().begin(), margins.rows().end());
  if (widest > n) {
    // No 0-1 row can hold more ones than there are columns.
    LowRankEstimate est;
    est.seed = seed;
    est.band_lower = std::pow(1.0 - epsilon, margins.total());
    est.band_upper = std::pow(1.0 + epsilon, margins.total());
    est.repeat_values.assign(options.repeats, 0.0);
    return est;
  }
  return run_repeats(epsilon, margins.total(), seed, options, [&](unsigned rep) {
    RepeatOutcome out;
    if (options.exact_surrogate) {
      out.pairing = pair_with_monomial(exact_elementary_product<double>(margins.rows(), n), margins.cols(),
                                       options.route, options.term_cap);
      return out;
    }
    std::map<unsigned, ApproxSymmetricPoly> approx;
    for (unsigned r : distinct(margins.rows())) {
      auto e = build_e_tilde(r, n, epsilon, approximation_seed(seed, options.repeats, rep, r),
                             forms_for(r, n, epsilon, options, SymmetricKind::elementary));
      out.samples[r] = e.num_samples();
      approx.emplace(r, std::move(e));
    }
    out.pairing = pair_with_monomial(elementary_product(margins.rows(), approx), margins.cols(), options.route,
                                     options.term_cap);
    return out;
  });
}

std::string to_string(PairingRoute route) {
  switch (route) {
    case PairingRoute::reduced:
      return "reduced";
    case PairingRoute::direct:
      return "direct";
    default:
      return "automatic";
  }
}

std::string to_string(Weighting weighting) {
  return weighting == Weighting::plain ? "plain" : "fisher-yates";
}

RankFactorization factor_weights(const WeightMatrix& weights, double tolerance) {
  const std::size_t m = weights.rows(), n = weights.cols();
  Eigen::MatrixXd wt(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) wt(j, i) = weights(i, j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wt);
  qr.setThreshold(tolerance);
  const auto k = static_cast<std::size_t>(qr.rank());
  std::vector<std::size_t> chosen;
  for (std::size_t t = 0; t < k; ++t) chosen.push_back(static_cast<std::size_t>(qr.colsPermutation().indices()(t)));
  std::sort(chosen.begin(), chosen.end());

  RankFactorization out;
  Eigen::MatrixXd basis(n, k);
  for (std::size_t t = 0; t < k; ++t) {
    LinearForm<double> row{std::vector<double>(n)};
    for (std::size_t j = 0; j < n; ++j) {
      row.coeffs[j] = weights(chosen[t], j);
      basis(j, t) = row.coeffs[j];
    }
    out.basis_rows.push_back(std::move(row));
  }
  out.coefficients.assign(m, std::vector<double>(k, 0.0));
  if (k == 0) return out;
  const auto solver = basis.colPivHouseholderQr();
  for (std::size_t i = 0; i < m; ++i) {
    const auto pos = std::find(chosen.begin(), chosen.end(), i);
    if (pos != chosen.end()) {
      out.coefficients[i][static_cast<std::size_t>(pos - chosen.begin())] = 1.0;
      continue;
    }
    Eigen::VectorXd w(n);
    for (std::size_t j = 0; j < n; ++j) w(j) = weights(i, j);
    const Eigen::VectorXd u = solver.solve(w);
    for (std::size_t t = 0; t < k; ++t) out.coefficients[i][t] = u(t);
  }
  return out;
}

LowRankEstimate lowrank_weighted_count(const Margins& margins, const WeightMatrix& weights, double epsilon,
                                       std::uint64_t seed, const LowRankOptions& options, Weighting weighting) {
  require_epsilon(epsilon);
  weights.require_shape(margins);
  const std::size_t n = margins.num_cols();
  const auto factors = factor_weights(weights);
  const std::size_t k = factors.basis_rows.size();
  if (k > options.max_weight_rank) {
    throw BudgetError("weight matrix has numerical rank " + std::to_string(k) + ", above the bound of " +
                      std::to_string(options.max_weight_rank));
  }
  const unsigned total = margins.total();
  const auto row_combination = [&](std::size_t i, std::size_t offset) {
    Combination<double> comb;
    for (std::size_t t = 0; t < k; ++t) {
      if (factors.coefficients[i][t] != 0.0) comb.emplace_back(offset + t, factors.coefficients[i][t]);
    }
    return comb;
  };

  if (k == 0) {
    LowRankEstimate est;
    est.seed = seed;
    est.band_lower = weighting == Weighting::plain ? std::pow(1.0 - epsilon, total) : 1.0;
    est.band_upper = weighting == Weighting::plain ? std::pow(1.0 + epsilon, total) : 1.0;
    est.repeat_values.assign(options.repeats, 0.0);
    return est;
  }

  if (weighting == Weighting::fisher_yates) {
    // Row i contributes (Σⱼ wᵢⱼ xⱼ)^rᵢ / rᵢ!, whose coefficients are ∏ wᵢⱼ^dᵢⱼ/dᵢⱼ!.
    LowRankProduct<double> h;
    h.num_vars = n;
    h.basis = factors.basis_rows;
    for (std::size_t i = 0; i < margins.num_rows(); ++i) {
      const unsigned r = margins.rows()[i];
      h.factors.push_back({{{1.0 / factorial(r).get_d(), {{row_combination(i, 0), r}}}}});
      h.row_factor.push_back(i);
    }
    LowRankOptions single = options;
    single.repeats = 1;
    auto est = run_repeats(epsilon, total, seed, single, [&](unsigned) {
      return RepeatOutcome{pair_with_monomial(h, margins.cols(), options.route, options.term_cap), {}};
    });
    est.band_lower = est.band_upper = 1.0;
    return est;
  }

  return run_repeats(epsilon, total, seed, options, [&](unsigned rep) {
    // For each distinct row sum r: m shared draws γ⁽ˢ⁾ ∈ ℝⁿ; basis forms bₜ∘γ⁽ˢ⁾.
    // Row i then uses Σₛ (Σₜ uᵢₜ yₜₛ)^rᵢ / (rᵢ!·m), i.e. forms Σⱼ wᵢⱼ γⱼ⁽ˢ⁾ xⱼ.
    LowRankProduct<double> h;
    h.num_vars = n;
    RepeatOutcome out;
    std::map<unsigned, std::pair<std::size_t, std::uint64_t>> block_of;  // r -> (basis offset, m)
    for (unsigned r : distinct(margins.rows())) {
      const TruncationSpec spec = solve_threshold(r, delta_for_epsilon(epsilon));
      const std::uint64_t m = forms_for(r, n, epsilon, options, SymmetricKind::complete, k);
      const std::uint64_t base_seed = approximation_seed(seed, options.repeats, rep, r);
      block_of[r] = {h.basis.size(), m};
      out.samples[r] = m;
      for (std::uint64_t s = 0; s < m; ++s) {
        Rng rng(derive_seed(base_seed, s));
        std::vector<double> gamma(n);
        for (auto& g : gamma) g = sample_truncated_exponential(spec, rng);
        for (std::size_t t = 0; t < k; ++t) {
          LinearForm<double> form{std::vector<double>(n)};
          for (std::size_t j = 0; j < n; ++j) form.coeffs[j] = factors.basis_rows[t].coeffs[j] * gamma[j];
          h.basis.push_back(std::move(form));
        }
      }
    }
    for (std::size_t i = 0; i < margins.num_rows(); ++i) {
      const unsigned r = margins.rows()[i];
      const auto [offset, m] = block_of.at(r);
      LowRankFactor<double> f;
      const double coeff = 1.0 / (factorial(r).get_d() * static_cast<double>(m));
      for (std::uint64_t s = 0; s < m; ++s) {
        f.terms.push_back({coeff, {{row_combination(i, offset + s * k), r}}});
      }
      h.factors.push_back(std::move(f));
      h.row_factor.push_back(i);
    }
    out.pairing = pair_with_monomial(h, margins.cols(), options.route, options.term_cap);
    return out;
  });
}

}  // namespace tablecount
