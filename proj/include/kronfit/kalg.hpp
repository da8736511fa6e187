#pragma once

#include <cstdint>
#include <tuple>
#include <vector>

#include "kronfit/matrix.hpp"

namespace kronfit {

// Column-major stacking convention, fixed once and inherited by every module:
// vec(M)[j*n + i] = M(i,j); vech takes on-and-below-diagonal entries column by
// column.

inline Vec vec(const Matrix& m) {
  Vec v(static_cast<size_t>(m.rows()) * m.cols());
  for (int j = 0; j < m.cols(); ++j)
    for (int i = 0; i < m.rows(); ++i) v[static_cast<size_t>(j) * m.rows() + i] = m(i, j);
  return v;
}

inline Matrix unvec(const Vec& v, int rows, int cols) {
  if (static_cast<int>(v.size()) != rows * cols) throw DimensionMismatch("unvec length");
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = v[static_cast<size_t>(j) * rows + i];
  return m;
}

inline Matrix unvec(const Vec& v, int n) { return unvec(v, n, n); }

constexpr int vech_size(int n) { return n * (n + 1) / 2; }

// Index of entry (p, q), p >= q, within vech.
constexpr int vech_index(int n, int p, int q) { return q * n - q * (q - 1) / 2 + (p - q); }

// Dimension n from a vech length, or -1 when the length is not triangular.
inline int vech_dim(int len) {
  const int n = static_cast<int>((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0 + 0.5);
  return vech_size(n) == len ? n : -1;
}

inline Vec vech(const Matrix& m) {
  const int n = m.rows();
  Vec v(static_cast<size_t>(vech_size(n)));
  for (int q = 0; q < n; ++q)
    for (int p = q; p < n; ++p) v[static_cast<size_t>(vech_index(n, p, q))] = m(p, q);
  return v;
}

// Symmetric completion of a half-vectorization.
inline Matrix unvech(const Vec& v) {
  const int n = vech_dim(static_cast<int>(v.size()));
  if (n < 0) throw DimensionMismatch("unvech length is not n(n+1)/2");
  Matrix m(n, n);
  for (int q = 0; q < n; ++q)
    for (int p = q; p < n; ++p) {
      const double x = v[static_cast<size_t>(vech_index(n, p, q))];
      m(p, q) = x;
      m(q, p) = x;
    }
  return m;
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (int ia = 0; ia < a.rows(); ++ia)
    for (int ja = 0; ja < a.cols(); ++ja) {
      const double aij = a(ia, ja);
      if (aij == 0.0) continue;
      for (int ib = 0; ib < b.rows(); ++ib)
        for (int jb = 0; jb < b.cols(); ++jb)
          c(ia * b.rows() + ib, ja * b.cols() + jb) = aij * b(ib, jb);
    }
  return c;
}

// Structured 0/fraction selector, stored as triplets and realized densely on
// demand. Entries are dyadic rationals, so all selector identities hold
// exactly in floating point.
struct Selector {
  enum class Kind { Duplication, DuplicationPinv, Commutation, DiagSelect };

  Kind kind;
  int n = 0;
  int rows = 0;
  int cols = 0;
  std::vector<std::tuple<int, int, double>> entries;

  Matrix dense() const {
    Matrix m(rows, cols);
    for (const auto& [i, j, x] : entries) m(i, j) = x;
    return m;
  }

  Vec apply(const Vec& v) const {
    if (static_cast<int>(v.size()) != cols) throw DimensionMismatch("selector apply length");
    Vec out(static_cast<size_t>(rows), 0.0);
    for (const auto& [i, j, x] : entries) out[static_cast<size_t>(i)] += x * v[static_cast<size_t>(j)];
    return out;
  }
};

// D_n: vec(M) = D_n vech(M) for symmetric M; one 1 per row.
inline Selector duplication(int n) {
  Selector s{Selector::Kind::Duplication, n, n * n, vech_size(n), {}};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int p = std::max(i, j);
      const int q = std::min(i, j);
      s.entries.emplace_back(j * n + i, vech_index(n, p, q), 1.0);
    }
  return s;
}

// D_n^+ = (D_n^T D_n)^{-1} D_n^T; D_n^T D_n is diagonal with entries 1 or 2,
// so the pseudo-inverse has entries in {0, 1, 1/2}.
inline Selector duplication_pinv(int n) {
  Selector s{Selector::Kind::DuplicationPinv, n, vech_size(n), n * n, {}};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int p = std::max(i, j);
      const int q = std::min(i, j);
      s.entries.emplace_back(vech_index(n, p, q), j * n + i, i == j ? 1.0 : 0.5);
    }
  return s;
}

// K_{n,n}: K vec(M) = vec(M^T).
inline Selector commutation(int n) {
  Selector s{Selector::Kind::Commutation, n, n * n, n * n, {}};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s.entries.emplace_back(j * n + i, i * n + j, 1.0);
  return s;
}

// M_d = sum_i (e_i e_i^T) kron (e_i e_i^T): M_d vec(M) = vec(diagonal part of M).
inline Selector diag_select(int n) {
  Selector s{Selector::Kind::DiagSelect, n, n * n, n * n, {}};
  for (int i = 0; i < n; ++i) s.entries.emplace_back(i * n + i, i * n + i, 1.0);
  return s;
}

}  // namespace kronfit
