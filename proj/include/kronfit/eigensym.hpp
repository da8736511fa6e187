#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kronfit/matrix.hpp"

namespace kronfit {

// Process-wide convergence tolerance for the symmetric eigensolver: sweeps stop
// once the off-diagonal Frobenius mass drops below tol * ||M||_F. The CLI maps
// the KRONFIT_EIG_TOL environment variable onto this knob at startup.
inline double& eig_tolerance() {
  static double tol = 1e-13;
  return tol;
}

// Orthogonal eigendecomposition M = U diag(values) U^T, eigenvalues ascending,
// columns of U the matching eigenvectors.
struct SymEig {
  Matrix u;
  Vec values;
};

// Cyclic Jacobi for real symmetric matrices. Deterministic: fixed sweep order,
// no pivoting by magnitude, so identical inputs give identical outputs on a
// given platform.
inline SymEig eigen_sym(const Matrix& m, double tol = eig_tolerance()) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigen_sym needs a square matrix");
  const int n = m.rows();
  Matrix a = m;
  Matrix u = Matrix::identity(n);
  const double fro = std::max(a.frobenius(), 1e-300);

  auto off_mass = [&]() {
    double s = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
  };

  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps && off_mass() > tol * fro; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Rutishauser rotation: tan of the smaller angle that zeroes a_pq.
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = akp - s * (akq + tau * akp);
          a(p, k) = a(k, p);
          a(k, q) = akq + s * (akp - tau * akq);
          a(q, k) = a(k, q);
        }
        for (int k = 0; k < n; ++k) {
          const double ukp = u(k, p);
          const double ukq = u(k, q);
          u(k, p) = ukp - s * (ukq + tau * ukp);
          u(k, q) = ukq + s * (ukp - tau * ukq);
        }
      }
    }
  }

  SymEig out;
  out.values.resize(static_cast<size_t>(n));
  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (a(i, i) != a(j, j)) return a(i, i) < a(j, j);
    return i < j;
  });
  out.u = Matrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<size_t>(j)] = a(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);
    for (int i = 0; i < n; ++i) out.u(i, j) = u(i, order[static_cast<size_t>(j)]);
  }
  return out;
}

// Rebuilds U diag(values) U^T, exactly symmetric by construction.
inline Matrix compose_eigen(const Matrix& u, const Vec& values) {
  const int n = u.rows();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += u(i, k) * values[static_cast<size_t>(k)] * u(j, k);
      m(i, j) = s;
      m(j, i) = s;
    }
  return m;
}

inline double min_eigenvalue_sym(const Matrix& m) { return eigen_sym(m).values.front(); }
inline double max_eigenvalue_sym(const Matrix& m) { return eigen_sym(m).values.back(); }

}  // namespace kronfit
