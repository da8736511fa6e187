#pragma once

#include <cmath>
#include <utility>

#include "kronfit/eigensym.hpp"
#include "kronfit/kalg.hpp"
#include "kronfit/matrix.hpp"

namespace kronfit {

namespace detail {

// Symmetrize when the relative asymmetry is below tol, reject otherwise.
inline Matrix symmetrized(Matrix m, double tol = 1e-12) {
  if (m.rows() != m.cols()) throw DimensionMismatch("symmetric matrix must be square");
  double asym = 0.0;
  const double scale = std::max(m.max_abs(), 1e-300);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j)
      asym = std::max(asym, std::fabs(m(i, j) - m(j, i)) / scale);
  if (asym > tol) throw NotSymmetric(asym);
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j) {
      const double x = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = x;
      m(j, i) = x;
    }
  return m;
}

}  // namespace detail

// Real symmetric matrix; symmetrized on construction.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m) : m_(detail::symmetrized(std::move(m))) {}

  int dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

// Symmetric positive definite matrix with its eigendecomposition cached at
// construction. Construction fails on any non-positive eigenvalue, so every
// spectral function below is total on this type.
class SpdMatrix {
 public:
  explicit SpdMatrix(Matrix m) : m_(detail::symmetrized(std::move(m))), eig_(eigen_sym(m_)) {
    for (size_t i = 0; i < eig_.values.size(); ++i)
      if (!(eig_.values[i] > 0.0)) throw NotPositiveDefinite(static_cast<int>(i), eig_.values[i]);
  }

  static SpdMatrix from_eigen(Matrix u, Vec values) {
    Matrix composed = compose_eigen(u, values);
    SpdMatrix out(std::move(composed), SymEig{std::move(u), std::move(values)});
    for (size_t i = 0; i < out.eig_.values.size(); ++i)
      if (!(out.eig_.values[i] > 0.0))
        throw NotPositiveDefinite(static_cast<int>(i), out.eig_.values[i]);
    return out;
  }

  int dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  const SymEig& eig() const { return eig_; }
  const Vec& eigenvalues() const { return eig_.values; }

 private:
  SpdMatrix(Matrix m, SymEig eig) : m_(detail::symmetrized(std::move(m))), eig_(std::move(eig)) {}

  Matrix m_;
  SymEig eig_;
};

inline SymMatrix spd_log(const SpdMatrix& m) {
  Vec w = m.eigenvalues();
  for (double& x : w) x = std::log(x);
  return SymMatrix(compose_eigen(m.eig().u, w));
}

inline SpdMatrix spd_exp(const SymMatrix& m) {
  SymEig e = eigen_sym(m.matrix());
  for (double& x : e.values) x = std::exp(x);
  return SpdMatrix::from_eigen(std::move(e.u), std::move(e.values));
}

inline SpdMatrix spd_power(const SpdMatrix& m, double p) {
  Vec w = m.eigenvalues();
  for (double& x : w) x = std::pow(x, p);
  return SpdMatrix::from_eigen(m.eig().u, std::move(w));
}

namespace detail {

// Relative gap below which an eigenvalue pair is treated as equal: the divided
// differences are numerically unstable there while their limits are exact.
constexpr double kEqualEigTol = 1e-9;

inline bool eig_pair_equal(double li, double lj) {
  return std::fabs(li - lj) <= kEqualEigTol * std::max(li, lj);
}

// log(li) - log(lj) without cancellation for nearby eigenvalues.
inline double log_ratio(double li, double lj) { return std::log1p((li - lj) / lj); }

// Assembles (U kron U) diag(f(l_i, l_j)) (U kron U)^T. The diagonal entry at
// position i*n+j is f(l_i, l_j), matching the Kronecker ordering of U kron U.
template <typename F>
Matrix eigen_pair_operator(const SpdMatrix& theta, F&& f) {
  const int n = theta.dim();
  const Matrix uu = kron(theta.eig().u, theta.eig().u);
  const Vec& lam = theta.eigenvalues();
  Vec d(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      d[static_cast<size_t>(i) * n + j] = f(lam[static_cast<size_t>(i)], lam[static_cast<size_t>(j)]);
  return compose_eigen(uu, d);
}

}  // namespace detail

// Frechet derivative of exp at log(Theta):
// Psi = int_0^1 e^{t Omega} kron e^{(1-t) Omega} dt, with eigenvalue pairs
// mapping to (l_i - l_j) / (log l_i - log l_j) and to the eigenvalue itself on
// the equal branch.
inline Matrix psi_operator(const SpdMatrix& theta) {
  return detail::eigen_pair_operator(theta, [](double li, double lj) {
    if (detail::eig_pair_equal(li, lj)) return 0.5 * (li + lj);
    return (li - lj) / detail::log_ratio(li, lj);
  });
}

// Frechet derivative of log at Theta:
// H = int_0^1 [t(Theta - I) + I]^{-1} kron [t(Theta - I) + I]^{-1} dt = Psi^{-1}.
inline Matrix h_operator(const SpdMatrix& theta) {
  return detail::eigen_pair_operator(theta, [](double li, double lj) {
    if (detail::eig_pair_equal(li, lj)) return 2.0 / (li + lj);
    return detail::log_ratio(li, lj) / (li - lj);
  });
}

// Expected-Hessian kernel:
// Xi = int_0^1 int_0^1 Theta^{t+s-1} kron Theta^{1-t-s} dt ds, with pair
// entries [l_i/l_j + l_j/l_i - 2] / log^2(l_i/l_j) and 1 on the equal branch.
// Identical to Psi (Theta^{-1} kron Theta^{-1}) Psi.
inline Matrix xi_operator(const SpdMatrix& theta) {
  return detail::eigen_pair_operator(theta, [](double li, double lj) {
    if (detail::eig_pair_equal(li, lj)) return 1.0;
    const double dlog = detail::log_ratio(li, lj);
    const double psi = (li - lj) / dlog;
    return psi * psi / (li * lj);
  });
}

}  // namespace kronfit
