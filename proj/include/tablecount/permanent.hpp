#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tablecount/errors.hpp"
#include "tablecount/numeric.hpp"
#include "tablecount/polynomial.hpp"

namespace tablecount {

inline constexpr std::size_t kDefaultPermanentCap = 22;

/// Dense N×N matrix, row-major.
template <class C>
class SquareMatrix {
public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t size, const C& fill = C(0)) : size_(size), data_(size * size, fill) {}

  static SquareMatrix from_rows(const std::vector<std::vector<C>>& rows) {
    SquareMatrix m(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) {
        throw ValidationError("matrix is not square: row " + std::to_string(i) + " has " +
                              std::to_string(rows[i].size()) + " entries, expected " + std::to_string(rows.size()));
      }
      for (std::size_t j = 0; j < rows.size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::size_t size() const { return size_; }
  C& operator()(std::size_t i, std::size_t j) { return data_[i * size_ + j]; }
  const C& operator()(std::size_t i, std::size_t j) const { return data_[i * size_ + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

private:
  std::size_t size_ = 0;
  std::vector<C> data_;
};

/// Row groups R₁..R_m of sizes r₁..r_m and column groups C₁..C_n of sizes
/// c₁..c_n, each a run of consecutive indices.
class BlockStructure {
public:
  BlockStructure(std::vector<unsigned> row_sizes, std::vector<unsigned> col_sizes)
      : row_sizes_(std::move(row_sizes)), col_sizes_(std::move(col_sizes)) {
    const auto rows = std::accumulate(row_sizes_.begin(), row_sizes_.end(), std::size_t{0});
    const auto cols = std::accumulate(col_sizes_.begin(), col_sizes_.end(), std::size_t{0});
    if (rows != cols) {
      throw ValidationError("block sizes do not cover a square matrix: rows total " + std::to_string(rows) +
                            ", columns total " + std::to_string(cols));
    }
    size_ = rows;
  }

  std::size_t size() const { return size_; }
  const std::vector<unsigned>& row_sizes() const { return row_sizes_; }
  const std::vector<unsigned>& col_sizes() const { return col_sizes_; }

  /// Block index of every row (or column) position.
  std::vector<std::size_t> row_owner() const { return owners(row_sizes_); }
  std::vector<std::size_t> col_owner() const { return owners(col_sizes_); }

private:
  static std::vector<std::size_t> owners(const std::vector<unsigned>& sizes) {
    std::vector<std::size_t> out;
    for (std::size_t b = 0; b < sizes.size(); ++b) out.insert(out.end(), sizes[b], b);
    return out;
  }

  std::vector<unsigned> row_sizes_;
  std::vector<unsigned> col_sizes_;
  std::size_t size_ = 0;
};

namespace detail {

// Neumaier-compensated running sum in extended precision.
struct CompensatedSum {
  long double sum = 0.0L;
  long double carry = 0.0L;

  void add(long double v) {
    const long double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  long double value() const { return sum + carry; }
};

}  // namespace detail

/// per M = Σ_σ ∏ a_{iσ(i)} by Ryser's inclusion–exclusion formula, visiting
/// column subsets in Gray-code order so each step updates the row sums by
/// one column. O(2ᴺ·N) time. Exact for Rational entries; compensated
/// long-double summation of the signed terms for double.
template <class C>
C permanent_exact(const SquareMatrix<C>& m, std::size_t max_size = kDefaultPermanentCap) {
  const std::size_t n = m.size();
  if (n > max_size) {
    throw BudgetError("permanent of a " + std::to_string(n) + "x" + std::to_string(n) +
                      " matrix exceeds the size cap of " + std::to_string(max_size));
  }
  if (n > 62) throw BudgetError("permanent size beyond subset enumeration range");
  if (n == 0) return C(1);

  std::vector<C> row_sums(n, C(0));
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray = 0;

  auto run = [&](auto& total) {
    for (std::uint64_t k = 1; k < subsets; ++k) {
      const auto j = static_cast<std::size_t>(std::countr_zero(k));
      const std::uint64_t bit = std::uint64_t{1} << j;
      gray ^= bit;
      if (gray & bit) {
        for (std::size_t i = 0; i < n; ++i) row_sums[i] += m(i, j);
      } else {
        for (std::size_t i = 0; i < n; ++i) row_sums[i] -= m(i, j);
      }
      // Sign (-1)^(N - |S|).
      const bool negative = ((n - static_cast<std::size_t>(std::popcount(gray))) & 1U) != 0;
      if constexpr (is_exact_v<C>) {
        C prod = row_sums[0];
        for (std::size_t i = 1; i < n; ++i) prod *= row_sums[i];
        if (negative) {
          total -= prod;
        } else {
          total += prod;
        }
      } else {
        // The 64-bit mantissa keeps integer products exact up to 2^64.
        long double prod = row_sums[0];
        for (std::size_t i = 1; i < n; ++i) prod *= row_sums[i];
        total.add(negative ? -prod : prod);
      }
    }
  };

  if constexpr (is_exact_v<C>) {
    C total(0);
    run(total);
    return total;
  } else {
    detail::CompensatedSum total;
    run(total);
    return static_cast<C>(total.value());
  }
}

/// B = (⟨fᵢ, gⱼ⟩), the m×m matrix of pairwise scalar products of linear forms.
template <class C>
SquareMatrix<C> gram_matrix(const std::vector<LinearForm<C>>& f, const std::vector<LinearForm<C>>& g) {
  if (f.size() != g.size()) {
    throw ValidationError("gram matrix: " + std::to_string(f.size()) + " forms vs " + std::to_string(g.size()));
  }
  SquareMatrix<C> b(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) b(i, j) = dot(f[i], g[j]);
  }
  return b;
}

/// ⟨f₁⋯f_m, g₁⋯g_m⟩ evaluated as per(⟨fᵢ, gⱼ⟩).
template <class C>
C pairing_via_permanent(const std::vector<LinearForm<C>>& f, const std::vector<LinearForm<C>>& g,
                        std::size_t max_size = kDefaultPermanentCap) {
  return permanent_exact(gram_matrix(f, g), max_size);
}

/// N×N matrix whose block Rᵢ×Cⱼ is filled with cells[i][j].
template <class C>
SquareMatrix<C> build_block_matrix(const BlockStructure& blocks, const std::vector<std::vector<C>>& cells) {
  const auto& rs = blocks.row_sizes();
  const auto& cs = blocks.col_sizes();
  if (cells.size() != rs.size()) {
    throw ValidationError("block matrix: " + std::to_string(cells.size()) + " cell rows for " +
                          std::to_string(rs.size()) + " row blocks");
  }
  for (const auto& row : cells) {
    if (row.size() != cs.size()) {
      throw ValidationError("block matrix: " + std::to_string(row.size()) + " cell columns for " +
                            std::to_string(cs.size()) + " column blocks");
    }
  }
  SquareMatrix<C> a(blocks.size());
  const auto row_owner = blocks.row_owner();
  const auto col_owner = blocks.col_owner();
  for (std::size_t s = 0; s < a.size(); ++s) {
    for (std::size_t t = 0; t < a.size(); ++t) a(s, t) = cells[row_owner[s]][col_owner[t]];
  }
  return a;
}

}  // namespace tablecount
