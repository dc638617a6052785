#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace permform {

/// Raised when two operands disagree on shape.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix. Integer instantiations carry the exact 0/1
/// arithmetic of the formulations; double is used by the relaxation only.
template <typename T>
class Matrix {
 public:
  using value_type = T;

  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) throw DimensionError("ragged matrix literal");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix square(std::size_t n, T fill = T{}) { return Matrix(n, n, fill); }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const T* row(std::size_t r) const { return data_.data() + r * cols_; }
  T* row(std::size_t r) { return data_.data() + r * cols_; }

  const std::vector<T>& data() const noexcept { return data_; }
  std::vector<T>& data() noexcept { return data_; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  T sum() const {
    T s{};
    for (const T& v : data_) s += v;
    return s;
  }

  T trace() const {
    T s{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

  bool is_symmetric() const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> out(rows_, cols_);
    std::transform(data_.begin(), data_.end(), out.data().begin(),
                   [](const T& v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator+");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] += b.data_[i];
    return out;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "operator-");
    Matrix out = a;
    for (std::size_t i = 0; i < out.data_.size(); ++i) out.data_[i] -= b.data_[i];
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_)
      throw DimensionError("matrix product: " + a.shape() + " * " + b.shape());
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      T* dst = out.row(i);
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const T s = a(i, l);
        if (s == T{}) continue;
        const T* src = b.row(l);
        for (std::size_t j = 0; j < b.cols_; ++j) dst[j] += s * src[j];
      }
    }
    return out;
  }

  friend Matrix operator*(T s, const Matrix& a) {
    Matrix out = a;
    for (T& v : out.data_) v *= s;
    return out;
  }

  std::string shape() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  static void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw DimensionError(std::string(what) + ": " + a.shape() + " vs " + b.shape());
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMatrix = Matrix<std::int64_t>;
using RealMatrix = Matrix<double>;

/// Matrix-vector product.
template <typename T>
std::vector<T> operator*(const Matrix<T>& m, const std::vector<T>& v) {
  if (m.cols() != v.size()) throw DimensionError("matrix-vector product: size mismatch");
  std::vector<T> out(m.rows(), T{});
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const T* r = m.row(i);
    T s{};
    for (std::size_t j = 0; j < m.cols(); ++j) s += r[j] * v[j];
    out[i] = s;
  }
  return out;
}

}  // namespace permform
