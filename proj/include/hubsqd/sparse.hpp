#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace hubsqd {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed-row real matrix. Immutable after construction.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Duplicate (row, col) entries are summed in input order.
  static CsrMatrix from_triplets(std::size_t n, std::vector<Triplet> entries) {
    std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return std::tie(a.row, a.col) < std::tie(b.row, b.col);
    });
    CsrMatrix m;
    m.n_ = n;
    m.row_ptr_.assign(n + 1, 0);
    for (std::size_t k = 0; k < entries.size();) {
      const auto& e = entries[k];
      if (e.row >= n || e.col >= n) throw std::out_of_range("CsrMatrix: triplet index out of range");
      double v = 0.0;
      std::size_t j = k;
      for (; j < entries.size() && entries[j].row == e.row && entries[j].col == e.col; ++j) v += entries[j].value;
      m.col_.push_back(e.col);
      m.val_.push_back(v);
      ++m.row_ptr_[e.row + 1];
      k = j;
    }
    for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
    return m;
  }

  std::size_t dim() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return val_.size(); }

  double at(std::size_t r, std::size_t c) const {
    const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return 0.0;
    return val_[static_cast<std::size_t>(it - col_.begin())];
  }

  /// y = M x. Works for real or complex vectors since M is real.
  template <class T>
  void apply(std::span<const T> x, std::span<T> y) const {
    for (std::size_t r = 0; r < n_; ++r) {
      T acc{};
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) acc += val_[k] * x[col_[k]];
      y[r] = acc;
    }
  }

  std::vector<double> diagonal() const {
    std::vector<double> d(n_);
    for (std::size_t r = 0; r < n_; ++r) d[r] = at(r, r);
    return d;
  }

  bool is_symmetric() const {
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (at(col_[k], r) != val_[k]) return false;
    return true;
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t r = 0; r < n_; ++r)
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        d(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(col_[k])) = val_[k];
    return d;
  }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_index() const noexcept { return col_; }
  std::span<const double> values() const noexcept { return val_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

/// Real symmetric operator usable by the iterative eigensolvers.
template <class Op>
concept SymmetricOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.dim() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
  { op.diagonal() } -> std::convertible_to<std::vector<double>>;
};

/// Adapts a dense symmetric matrix to SymmetricOperator.
class DenseOperator {
 public:
  explicit DenseOperator(Eigen::MatrixXd m) : m_(std::move(m)) {}
  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  void apply(std::span<const double> x, std::span<double> y) const {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), m_.rows());
    Eigen::Map<Eigen::VectorXd> yv(y.data(), m_.rows());
    yv.noalias() = m_ * xv;
  }
  std::vector<double> diagonal() const {
    std::vector<double> d(dim());
    for (Eigen::Index i = 0; i < m_.rows(); ++i) d[static_cast<std::size_t>(i)] = m_(i, i);
    return d;
  }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }

 private:
  Eigen::MatrixXd m_;
};

}  // namespace hubsqd
