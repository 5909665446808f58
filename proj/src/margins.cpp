#include "tablecount/margins.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "tablecount/errors.hpp"

namespace tablecount {

Margins::Margins(std::vector<unsigned> rows, std::vector<unsigned> cols) : rows_(std::move(rows)), cols_(std::move(cols)) {
  if (rows_.empty() || cols_.empty()) throw ValidationError("margins need at least one row and one column");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i] == 0) throw ValidationError("row sum " + std::to_string(i + 1) + " is zero; sums must be positive");
  }
  for (std::size_t j = 0; j < cols_.size(); ++j) {
    if (cols_[j] == 0) throw ValidationError("column sum " + std::to_string(j + 1) + " is zero; sums must be positive");
  }
  const auto row_total = std::accumulate(rows_.begin(), rows_.end(), 0ULL);
  const auto col_total = std::accumulate(cols_.begin(), cols_.end(), 0ULL);
  if (row_total != col_total) {
    throw ValidationError("row sums total " + std::to_string(row_total) + " but column sums total " +
                          std::to_string(col_total));
  }
  total_ = static_cast<unsigned>(row_total);
}

unsigned Margins::max_margin() const {
  return std::max(*std::max_element(rows_.begin(), rows_.end()), *std::max_element(cols_.begin(), cols_.end()));
}

template <class C>
BasicWeightMatrix<C> BasicWeightMatrix<C>::from_rows(const std::vector<std::vector<C>>& values) {
  if (values.empty() || values.front().empty()) throw ValidationError("weight matrix is empty");
  BasicWeightMatrix<C> w(values.size(), values.front().size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != w.cols()) {
      throw ValidationError("weight matrix row " + std::to_string(i + 1) + " has " +
                            std::to_string(values[i].size()) + " entries, expected " + std::to_string(w.cols()));
    }
    for (std::size_t j = 0; j < w.cols(); ++j) {
      const C& v = values[i][j];
      if constexpr (is_exact_v<C>) {
        if (sgn(v) < 0) throw ValidationError("weights must be non-negative");
      } else {
        if (!std::isfinite(v) || v < 0) throw ValidationError("weights must be finite and non-negative");
      }
      w(i, j) = v;
    }
  }
  return w;
}

template <class C>
void BasicWeightMatrix<C>::require_shape(const Margins& margins) const {
  if (rows_ != margins.num_rows() || cols_ != margins.num_cols()) {
    throw ValidationError("weight matrix is " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                          " but margins are " + std::to_string(margins.num_rows()) + "x" +
                          std::to_string(margins.num_cols()));
  }
}

template class BasicWeightMatrix<double>;
template class BasicWeightMatrix<Rational>;

ExactWeightMatrix to_exact(const WeightMatrix& w) {
  ExactWeightMatrix out(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) out(i, j) = Rational(w(i, j));
  }
  return out;
}

std::size_t numerical_rank(const WeightMatrix& w, double tolerance) {
  Eigen::MatrixXd m(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) m(i, j) = w(i, j);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tolerance);
  return static_cast<std::size_t>(qr.rank());
}

}  // namespace tablecount
