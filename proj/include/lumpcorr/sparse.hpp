#pragma once

// Compressed sparse row matrix with real entries, applied to real or complex
// vectors.

#include <algorithm>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lumpcorr/error.hpp"

namespace lumpcorr {

class CsrMatrix {
public:
  CsrMatrix() = default;

  /// Takes ownership of a complete CSR triple; column indices must be
  /// strictly increasing within each row.
  CsrMatrix(int rows, int cols, std::vector<int> offsets, std::vector<int> indices,
            std::vector<double> values)
      : rows_(rows), cols_(cols), offsets_(std::move(offsets)), indices_(std::move(indices)),
        values_(std::move(values)) {
    if (rows_ < 0 || cols_ < 0 || offsets_.size() != static_cast<std::size_t>(rows_) + 1 ||
        offsets_.front() != 0 || static_cast<std::size_t>(offsets_.back()) != indices_.size() ||
        indices_.size() != values_.size())
      throw DomainError("inconsistent CSR arrays");
    for (int i = 0; i < rows_; ++i) {
      if (offsets_[i] > offsets_[i + 1])
        throw DomainError("CSR row offsets must be non-decreasing");
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k) {
        if (indices_[k] < 0 || indices_[k] >= cols_ || (k > offsets_[i] && indices_[k - 1] >= indices_[k]))
          throw DomainError("CSR column indices must be in range and increasing");
      }
    }
  }

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  const std::vector<int>& offsets() const noexcept { return offsets_; }
  const std::vector<int>& indices() const noexcept { return indices_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  /// Entry (i, j), zero when outside the pattern.
  double at(int i, int j) const {
    const auto b = indices_.begin() + offsets_[i];
    const auto e = indices_.begin() + offsets_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return it != e && *it == j ? values_[it - indices_.begin()] : 0.0;
  }

  /// Position of (i, j) in the value array, or -1.
  int find(int i, int j) const {
    const auto b = indices_.begin() + offsets_[i];
    const auto e = indices_.begin() + offsets_[i + 1];
    const auto it = std::lower_bound(b, e, j);
    return it != e && *it == j ? static_cast<int>(it - indices_.begin()) : -1;
  }

  double row_sum(int i) const {
    double s = 0.0;
    for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
      s += values_[k];
    return s;
  }

  /// y = A x.
  template <class T>
  void multiply(std::span<const T> x, std::span<T> y) const {
    for (int i = 0; i < rows_; ++i) {
      T acc{};
      for (int k = offsets_[i]; k < offsets_[i + 1]; ++k)
        acc += values_[k] * x[indices_[k]];
      y[i] = acc;
    }
  }

  template <class T>
  std::vector<T> operator*(const std::vector<T>& x) const {
    if (x.size() != static_cast<std::size_t>(cols_))
      throw DomainError("matrix-vector dimension mismatch");
    std::vector<T> y(rows_);
    multiply<T>(x, y);
    return y;
  }

  /// y = a A + b B on the union pattern.
  friend CsrMatrix combine(double a, const CsrMatrix& A, double b, const CsrMatrix& B) {
    if (A.rows_ != B.rows_ || A.cols_ != B.cols_)
      throw DomainError("matrix dimension mismatch");
    std::vector<int> off(A.rows_ + 1, 0);
    std::vector<int> idx;
    std::vector<double> val;
    for (int i = 0; i < A.rows_; ++i) {
      int ka = A.offsets_[i], kb = B.offsets_[i];
      const int ea = A.offsets_[i + 1], eb = B.offsets_[i + 1];
      while (ka < ea || kb < eb) {
        const int ja = ka < ea ? A.indices_[ka] : A.cols_;
        const int jb = kb < eb ? B.indices_[kb] : B.cols_;
        const int j = std::min(ja, jb);
        double v = 0.0;
        if (ja == j)
          v += a * A.values_[ka++];
        if (jb == j)
          v += b * B.values_[kb++];
        idx.push_back(j);
        val.push_back(v);
      }
      off[i + 1] = static_cast<int>(idx.size());
    }
    return CsrMatrix(A.rows_, A.cols_, std::move(off), std::move(idx), std::move(val));
  }

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> offsets_{0};
  std::vector<int> indices_;
  std::vector<double> values_;
};

} // namespace lumpcorr
