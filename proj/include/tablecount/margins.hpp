#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tablecount/numeric.hpp"

namespace tablecount {

/// Row sums r₁..r_m and column sums c₁..c_n of a contingency table.
/// Construction enforces m, n ≥ 1, all sums positive, and Σr = Σc.
class Margins {
public:
  Margins(std::vector<unsigned> rows, std::vector<unsigned> cols);

  const std::vector<unsigned>& rows() const { return rows_; }
  const std::vector<unsigned>& cols() const { return cols_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return cols_.size(); }
  /// Common total N.
  unsigned total() const { return total_; }
  /// ρ, the largest row or column sum.
  unsigned max_margin() const;

  Margins transposed() const { return Margins(cols_, rows_); }

  friend bool operator==(const Margins&, const Margins&) = default;

private:
  std::vector<unsigned> rows_;
  std::vector<unsigned> cols_;
  unsigned total_ = 0;
};

/// Non-negative m×n weights wᵢⱼ.
template <class C>
class BasicWeightMatrix {
public:
  BasicWeightMatrix(std::size_t rows, std::size_t cols, const C& fill = C(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static BasicWeightMatrix from_rows(const std::vector<std::vector<C>>& values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  C& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const C& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<std::vector<C>> to_rows() const {
    std::vector<std::vector<C>> out(rows_, std::vector<C>(cols_));
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
    }
    return out;
  }

  /// Throws unless the shape matches the margins.
  void require_shape(const Margins& margins) const;

private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<C> data_;
};

using WeightMatrix = BasicWeightMatrix<double>;
using ExactWeightMatrix = BasicWeightMatrix<Rational>;

ExactWeightMatrix to_exact(const WeightMatrix& w);

/// Numerical rank at relative tolerance 1e-9.
std::size_t numerical_rank(const WeightMatrix& w, double tolerance = 1e-9);

}  // namespace tablecount
