#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "kronfit/eigensym.hpp"
#include "kronfit/matrix.hpp"

namespace kronfit {

// Householder QR with column pivoting of an m x n matrix (m >= n expected).
// Rank is revealed by the decay of |R(k,k)|.
class QrPivot {
 public:
  explicit QrPivot(Matrix a) : a_(std::move(a)), perm_(static_cast<size_t>(a_.cols())) {
    const int m = a_.rows();
    const int n = a_.cols();
    std::iota(perm_.begin(), perm_.end(), 0);
    beta_.assign(static_cast<size_t>(n), 0.0);

    std::vector<double> colnorm(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += a_(i, j) * a_(i, j);
      colnorm[static_cast<size_t>(j)] = s;
    }

    const int kmax = std::min(m, n);
    for (int k = 0; k < kmax; ++k) {
      int pivot = k;
      for (int j = k + 1; j < n; ++j)
        if (colnorm[static_cast<size_t>(j)] > colnorm[static_cast<size_t>(pivot)]) pivot = j;
      if (pivot != k) {
        for (int i = 0; i < m; ++i) std::swap(a_(i, k), a_(i, pivot));
        std::swap(colnorm[static_cast<size_t>(k)], colnorm[static_cast<size_t>(pivot)]);
        std::swap(perm_[static_cast<size_t>(k)], perm_[static_cast<size_t>(pivot)]);
      }

      double alpha = 0.0;
      for (int i = k; i < m; ++i) alpha += a_(i, k) * a_(i, k);
      alpha = std::sqrt(alpha);
      if (alpha == 0.0) continue;
      if (a_(k, k) > 0.0) alpha = -alpha;
      const double v0 = a_(k, k) - alpha;
      // Householder vector stored below the diagonal with implicit leading v0.
      a_(k, k) = alpha;
      double vnorm2 = v0 * v0;
      for (int i = k + 1; i < m; ++i) vnorm2 += a_(i, k) * a_(i, k);
      if (vnorm2 == 0.0) continue;
      beta_[static_cast<size_t>(k)] = 2.0 / vnorm2;
      v0_.push_back(v0);

      for (int j = k + 1; j < n; ++j) {
        double w = v0 * a_(k, j);
        for (int i = k + 1; i < m; ++i) w += a_(i, k) * a_(i, j);
        w *= beta_[static_cast<size_t>(k)];
        a_(k, j) -= w * v0;
        for (int i = k + 1; i < m; ++i) a_(i, j) -= w * a_(i, k);
      }
      for (int j = k + 1; j < n; ++j) {
        colnorm[static_cast<size_t>(j)] -= a_(k, j) * a_(k, j);
        if (colnorm[static_cast<size_t>(j)] < 0.0) colnorm[static_cast<size_t>(j)] = 0.0;
      }
    }
  }

  int rank(double rel_tol = 1e-12) const {
    const int kmax = std::min(a_.rows(), a_.cols());
    const double r00 = std::fabs(a_(0, 0));
    if (r00 == 0.0) return 0;
    int r = 0;
    for (int k = 0; k < kmax; ++k)
      if (std::fabs(a_(k, k)) > rel_tol * r00) ++r;
    return r;
  }

  // Least-squares solution of min ||A x - b||_2; requires full column rank.
  Vec solve(Vec b) const {
    const int m = a_.rows();
    const int n = a_.cols();
    int hk = 0;
    for (int k = 0; k < std::min(m, n); ++k) {
      if (beta_[static_cast<size_t>(k)] == 0.0) continue;
      const double v0 = v0_[static_cast<size_t>(hk++)];
      double w = v0 * b[static_cast<size_t>(k)];
      for (int i = k + 1; i < m; ++i) w += a_(i, k) * b[static_cast<size_t>(i)];
      w *= beta_[static_cast<size_t>(k)];
      b[static_cast<size_t>(k)] -= w * v0;
      for (int i = k + 1; i < m; ++i) b[static_cast<size_t>(i)] -= w * a_(i, k);
    }
    Vec x(static_cast<size_t>(n), 0.0);
    for (int i = n - 1; i >= 0; --i) {
      double s = b[static_cast<size_t>(i)];
      for (int j = i + 1; j < n; ++j) s -= a_(i, j) * x[static_cast<size_t>(j)];
      x[static_cast<size_t>(i)] = s / a_(i, i);
    }
    Vec xp(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) xp[static_cast<size_t>(perm_[static_cast<size_t>(j)])] = x[static_cast<size_t>(j)];
    return xp;
  }

 private:
  Matrix a_;
  std::vector<int> perm_;
  std::vector<double> beta_;
  std::vector<double> v0_;
};

inline int rank_of(const Matrix& a, double rel_tol = 1e-12) { return QrPivot(a).rank(rel_tol); }

// min ||A x - b||_2 for full-column-rank A.
inline Vec lstsq(const Matrix& a, const Vec& b) { return QrPivot(a).solve(b); }

// Inverse of a symmetric positive definite matrix via its eigensystem.
inline Matrix inverse_spd_sym(const Matrix& s) {
  SymEig e = eigen_sym(s);
  Vec inv(e.values.size());
  for (size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / e.values[i];
  return compose_eigen(e.u, inv);
}

struct ClippedPinv {
  Matrix pinv;
  int clipped = 0;  // eigenvalues treated as zero
};

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix, zeroing eigenvalues
// below rel_tol * maxeval.
inline ClippedPinv pinv_sym_clipped(const Matrix& s, double rel_tol = 1e-10) {
  SymEig e = eigen_sym(s);
  const double cutoff = rel_tol * std::max(std::fabs(e.values.back()), std::fabs(e.values.front()));
  ClippedPinv out;
  Vec inv(e.values.size(), 0.0);
  for (size_t i = 0; i < inv.size(); ++i) {
    if (e.values[i] > cutoff) {
      inv[i] = 1.0 / e.values[i];
    } else {
      ++out.clipped;
    }
  }
  out.pinv = compose_eigen(e.u, inv);
  return out;
}

// Symmetric PSD square root; small negative eigenvalues from roundoff clamp to zero.
inline Matrix sqrt_sym_psd(const Matrix& s) {
  SymEig e = eigen_sym(s);
  Vec r(e.values.size());
  for (size_t i = 0; i < r.size(); ++i) r[i] = e.values[i] > 0.0 ? std::sqrt(e.values[i]) : 0.0;
  return compose_eigen(e.u, r);
}

}  // namespace kronfit
