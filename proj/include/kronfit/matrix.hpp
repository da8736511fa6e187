#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "kronfit/errors.hpp"

namespace kronfit {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Sized for desk-scale problems; all
// higher-level structure (symmetry, definiteness) lives in wrapper types.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}
  Matrix(int rows, int cols, std::initializer_list<double> xs) : Matrix(rows, cols) {
    if (static_cast<int>(xs.size()) != rows * cols) throw DimensionMismatch("initializer size");
    std::copy(xs.begin(), xs.end(), data_.begin());
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Matrix diag(const Vec& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    check_same_shape(o);
    for (size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    check_same_shape(o);
    for (size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Matrix& operator*=(double a) {
    for (double& x : data_) x *= a;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matrix product shapes");
    Matrix c(a.rows_, b.cols_);
    for (int i = 0; i < a.rows_; ++i) {
      for (int k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  friend Vec operator*(const Matrix& a, const Vec& x) {
    if (a.cols_ != static_cast<int>(x.size())) throw DimensionMismatch("matrix-vector shapes");
    Vec y(static_cast<size_t>(a.rows_), 0.0);
    for (int i = 0; i < a.rows_; ++i) {
      double acc = 0.0;
      for (int j = 0; j < a.cols_; ++j) acc += a(i, j) * x[static_cast<size_t>(j)];
      y[static_cast<size_t>(i)] = acc;
    }
    return y;
  }

  double frobenius() const {
    double s = 0.0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : data_) m = std::max(m, std::fabs(x));
    return m;
  }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
    return s;
  }

 private:
  void check_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("elementwise shapes");
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

inline Vec operator-(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

inline Vec operator+(const Vec& a, const Vec& b) {
  Vec c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

inline Vec operator*(double s, Vec a) {
  for (double& x : a) x *= s;
  return a;
}

// x y^T as a matrix.
inline Matrix outer(const Vec& x, const Vec& y) {
  Matrix m(static_cast<int>(x.size()), static_cast<int>(y.size()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = x[static_cast<size_t>(i)] * y[static_cast<size_t>(j)];
  return m;
}

}  // namespace kronfit
