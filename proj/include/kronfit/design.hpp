#pragma once

#include <numeric>
#include <string>
#include <vector>

#include "kronfit/kalg.hpp"
#include "kronfit/linalg.hpp"
#include "kronfit/matfun.hpp"

namespace kronfit {

// Ordered factor dimensions (n_1, ..., n_v); the Kronecker structure and the
// design matrix are derived from these. Order is the caller's, never
// canonicalized.
class FactorDims {
 public:
  explicit FactorDims(std::vector<int> dims, int cap = 512) : dims_(std::move(dims)) {
    if (dims_.empty()) throw DimensionMismatch("at least one factor dimension required");
    long long prod = 1;
    for (int d : dims_) {
      if (d < 2) throw DimensionMismatch("factor dimensions must be >= 2");
      prod *= d;
      if (prod > cap)
        throw DimensionMismatch("product of factor dimensions exceeds cap " + std::to_string(cap));
    }
    n_ = static_cast<int>(prod);
  }

  const std::vector<int>& dims() const { return dims_; }
  int v() const { return static_cast<int>(dims_.size()); }
  int n() const { return n_; }
  int dim(int j) const { return dims_[static_cast<size_t>(j)]; }

  // Free log-parameter count: sum_j n_j(n_j+1)/2 minus one pinned diagonal
  // entry for each factor but the last.
  int s() const {
    int s = 0;
    for (int d : dims_) s += vech_size(d);
    return s - (v() - 1);
  }

  // Trailing Kronecker block size prod_{k>j} n_k.
  int stride(int j) const {
    int st = 1;
    for (int k = j + 1; k < v(); ++k) st *= dim(k);
    return st;
  }

  // Splits a row index of the full matrix into per-factor indices.
  std::vector<int> split_index(int p) const {
    std::vector<int> ix(static_cast<size_t>(v()));
    for (int j = v() - 1; j >= 0; --j) {
      ix[static_cast<size_t>(j)] = p % dim(j);
      p /= dim(j);
    }
    return ix;
  }

 private:
  std::vector<int> dims_;
  int n_ = 0;
};

using ThetaVector = Vec;

// The n(n+1)/2 x s matrix E with vech(Omega(theta)) = E theta, plus the
// bookkeeping of which factor log-entry each column carries and which entries
// were pinned to zero for identification.
struct DesignMatrix {
  struct FactorEntry {
    int factor;
    int row;
    int col;  // row >= col, lower-triangle entry of log Theta_factor
  };

  FactorDims dims;
  Matrix e;
  std::vector<FactorEntry> columns;     // one per free parameter
  std::vector<FactorEntry> restricted;  // pinned (0,0) log-entries of factors 0..v-2

  int s() const { return e.cols(); }

  // Column of the free parameter for factor j entry (row, col), or -1 if pinned.
  int column_of(int factor, int row, int col) const {
    for (size_t k = 0; k < columns.size(); ++k) {
      const FactorEntry& fe = columns[k];
      if (fe.factor == factor && fe.row == row && fe.col == col) return static_cast<int>(k);
    }
    return -1;
  }
};

// The diagonal incidence system: the 0/1 matrix mapping per-factor diagonal
// log-entries to the diagonal of the Kronecker sum. Its rank deficiency
// (sum n_j - rank = v - 1) is what forces the identification restrictions.
inline Matrix diag_incidence(const FactorDims& dims) {
  int cols = 0;
  for (int j = 0; j < dims.v(); ++j) cols += dims.dim(j);
  Matrix a(dims.n(), cols);
  for (int p = 0; p < dims.n(); ++p) {
    const std::vector<int> ix = dims.split_index(p);
    int offset = 0;
    for (int j = 0; j < dims.v(); ++j) {
      a(p, offset + ix[static_cast<size_t>(j)]) = 1.0;
      offset += dims.dim(j);
    }
  }
  return a;
}

// Builds E under the identification convention that the (0,0) diagonal
// log-entry of every factor except the last is pinned to zero.
inline DesignMatrix build_design(const FactorDims& dims) {
  DesignMatrix d{dims, Matrix(), {}, {}};
  const int v = dims.v();
  for (int j = 0; j < v; ++j) {
    for (int c = 0; c < dims.dim(j); ++c) {
      for (int r = c; r < dims.dim(j); ++r) {
        if (j < v - 1 && r == 0 && c == 0) {
          d.restricted.push_back({j, 0, 0});
        } else {
          d.columns.push_back({j, r, c});
        }
      }
    }
  }

  const int n = dims.n();
  d.e = Matrix(vech_size(n), static_cast<int>(d.columns.size()));
  for (int q = 0; q < n; ++q) {
    const std::vector<int> qx = dims.split_index(q);
    for (int p = q; p < n; ++p) {
      const std::vector<int> px = dims.split_index(p);
      int row = vech_index(n, p, q);
      int mismatch = -1;
      int mismatches = 0;
      for (int j = 0; j < v; ++j) {
        if (px[static_cast<size_t>(j)] != qx[static_cast<size_t>(j)]) {
          mismatch = j;
          ++mismatches;
        }
      }
      if (mismatches == 0) {
        // Diagonal of Omega: one unit per unpinned factor diagonal entry.
        for (int j = 0; j < v; ++j) {
          const int i = px[static_cast<size_t>(j)];
          const int col = d.column_of(j, i, i);
          if (col >= 0) d.e(row, col) = 1.0;
        }
      } else if (mismatches == 1) {
        const int j = mismatch;
        const int r = std::max(px[static_cast<size_t>(j)], qx[static_cast<size_t>(j)]);
        const int c = std::min(px[static_cast<size_t>(j)], qx[static_cast<size_t>(j)]);
        d.e(row, d.column_of(j, r, c)) = 1.0;
      }
    }
  }
  return d;
}

inline SymMatrix theta_to_omega(const DesignMatrix& design, const ThetaVector& theta) {
  if (static_cast<int>(theta.size()) != design.s())
    throw DimensionMismatch("theta length does not match design");
  return SymMatrix(unvech(design.e * theta));
}

// Reads per-factor logs back out of Omega: the restricted least-squares
// projection through E's pseudo-inverse, exact when Omega is a Kronecker sum.
inline std::vector<SymMatrix> theta_to_factor_logs(const DesignMatrix& design,
                                                   const ThetaVector& theta) {
  std::vector<Matrix> logs;
  for (int j = 0; j < design.dims.v(); ++j) logs.emplace_back(design.dims.dim(j), design.dims.dim(j));
  for (size_t k = 0; k < design.columns.size(); ++k) {
    const DesignMatrix::FactorEntry& fe = design.columns[k];
    logs[static_cast<size_t>(fe.factor)](fe.row, fe.col) = theta[k];
    logs[static_cast<size_t>(fe.factor)](fe.col, fe.row) = theta[k];
  }
  std::vector<SymMatrix> out;
  out.reserve(logs.size());
  for (Matrix& m : logs) out.emplace_back(std::move(m));
  return out;
}

inline ThetaVector omega_to_theta(const DesignMatrix& design, const SymMatrix& omega) {
  if (omega.dim() != design.dims.n()) throw DimensionMismatch("omega dimension");
  return lstsq(design.e, vech(omega.matrix()));
}

inline std::vector<SymMatrix> omega_to_factors(const DesignMatrix& design, const SymMatrix& omega) {
  return theta_to_factor_logs(design, omega_to_theta(design, omega));
}

struct CorrelationResult {
  SpdMatrix theta;
  double max_diag_deviation;  // max |diag - 1|; exp(Omega) need not be unit diagonal
};

inline CorrelationResult theta_to_correlation(const DesignMatrix& design, const ThetaVector& theta) {
  SpdMatrix t = spd_exp(theta_to_omega(design, theta));
  double dev = 0.0;
  for (int i = 0; i < t.dim(); ++i) dev = std::max(dev, std::fabs(t(i, i) - 1.0));
  return {std::move(t), dev};
}

// Projects the Kronecker sum of the given factor logs onto the restricted
// parameterization; exact because the sum lies in E's column span.
inline ThetaVector theta_from_factor_logs(const DesignMatrix& design,
                                          const std::vector<SymMatrix>& logs) {
  const FactorDims& dims = design.dims;
  if (static_cast<int>(logs.size()) != dims.v()) throw DimensionMismatch("factor count");
  Matrix omega(dims.n(), dims.n());
  for (int j = 0; j < dims.v(); ++j) {
    Matrix term = Matrix::identity(1);
    for (int k = 0; k < dims.v(); ++k)
      term = kron(term, k == j ? logs[static_cast<size_t>(k)].matrix()
                               : Matrix::identity(dims.dim(k)));
    omega += term;
  }
  return omega_to_theta(design, SymMatrix(omega));
}

inline ThetaVector theta_from_factors(const DesignMatrix& design,
                                      const std::vector<SpdMatrix>& factors) {
  std::vector<SymMatrix> logs;
  logs.reserve(factors.size());
  for (const SpdMatrix& f : factors) logs.push_back(spd_log(f));
  return theta_from_factor_logs(design, logs);
}

}  // namespace kronfit
