#pragma once

#include <cmath>
#include <vector>

#include "kronfit/design.hpp"

namespace kronfit {

// Log-eigenvalues of a 2x2 correlation factor. The unit-diagonal constraint
// ties them together: exp(l1) + exp(l2) = 2, so l2 ranges over (-inf, log 2]
// and l1 = log(2 - exp(l2)).
struct TwoByTwoFactorParams {
  double lambda2 = 0.0;
  double lambda1 = 0.0;
};

namespace detail {

// C maps (l1, l2) to vech of the 2x2 log factor; eigenvectors are fixed at
// (1,1)/sqrt2 and (1,-1)/sqrt2 for any 2x2 correlation matrix.
inline Vec shrink_residual(const Vec& theta1, double t) {
  const double l1 = std::log(2.0 - std::exp(t));
  return {theta1[0] - 0.5 * (l1 + t), theta1[1] - 0.5 * (l1 - t), theta1[2] - 0.5 * (l1 + t)};
}

inline double shrink_objective_sq(const Vec& theta1, double t) {
  const Vec r = shrink_residual(theta1, t);
  return r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
}

// d/dt of the squared objective.
inline double shrink_objective_grad(const Vec& theta1, double t) {
  const Vec r = shrink_residual(theta1, t);
  const double dl1 = -std::exp(t) / (2.0 - std::exp(t));
  // residual derivative: -C * (dl1, 1)
  const double dr0 = -0.5 * (dl1 + 1.0);
  const double dr1 = -0.5 * (dl1 - 1.0);
  return 2.0 * (r[0] * dr0 + r[1] * dr1 + r[2] * dr0);
}

}  // namespace detail

struct ShrinkFactorResult {
  TwoByTwoFactorParams params;
  Matrix correlation;  // the shrunk 2x2 factor, unit diagonal by construction
};

// Shrinks an unrestricted vech(log Theta_1) of a 2x2 factor to the nearest
// admissible correlation-factor parameters: golden section on [-20, log 2]
// followed by bisection on the derivative sign. The lower bracket is safe
// because exp(-20) already saturates the objective.
inline ShrinkFactorResult shrink_factor_2x2(const Vec& theta1_hat) {
  if (theta1_hat.size() != 3) throw DimensionMismatch("2x2 factor vech must have 3 entries");
  const double log2 = std::log(2.0);
  double lo = -20.0;
  double hi = log2 - 1e-12;  // the objective diverges at the boundary itself

  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - gr * (b - a);
  double x2 = a + gr * (b - a);
  double f1 = detail::shrink_objective_sq(theta1_hat, x1);
  double f2 = detail::shrink_objective_sq(theta1_hat, x2);
  while (b - a > 1e-6) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = detail::shrink_objective_sq(theta1_hat, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = detail::shrink_objective_sq(theta1_hat, x2);
    }
  }

  double glo = detail::shrink_objective_grad(theta1_hat, a);
  double ghi = detail::shrink_objective_grad(theta1_hat, b);
  double t = 0.5 * (a + b);
  if (glo < 0.0 && ghi > 0.0) {
    for (int it = 0; it < 50; ++it) {
      t = 0.5 * (a + b);
      const double g = detail::shrink_objective_grad(theta1_hat, t);
      if (g > 0.0) {
        b = t;
      } else {
        a = t;
      }
    }
    t = 0.5 * (a + b);
  } else if (glo >= 0.0) {
    t = a;  // minimum pinned at the left end of the bracket
  } else {
    t = b;
  }

  ShrinkFactorResult out;
  out.params.lambda2 = t;
  out.params.lambda1 = std::log(2.0 - std::exp(t));
  const double e1 = std::exp(out.params.lambda1);
  const double e2 = std::exp(out.params.lambda2);
  Matrix corr(2, 2);
  corr(0, 0) = 1.0;
  corr(1, 1) = 1.0;
  corr(0, 1) = 0.5 * (e1 - e2);
  corr(1, 0) = corr(0, 1);
  out.correlation = std::move(corr);
  return out;
}

struct ShrinkModelResult {
  std::vector<ShrinkFactorResult> factors;
  SpdMatrix correlation;  // Kronecker product of the shrunk factors
};

// Applies the 2x2 shrinkage factor by factor and rebuilds the Kronecker
// product; only defined when every factor dimension equals 2 (renormalize is
// the documented fallback for anything larger).
inline ShrinkModelResult shrink_model(const DesignMatrix& design, const ThetaVector& theta_hat) {
  const FactorDims& dims = design.dims;
  for (int j = 0; j < dims.v(); ++j)
    if (dims.dim(j) != 2) throw UnsupportedFactorDim(j, dims.dim(j));

  const std::vector<SymMatrix> logs = theta_to_factor_logs(design, theta_hat);
  std::vector<ShrinkFactorResult> factors;
  factors.reserve(logs.size());
  Matrix prod = Matrix::identity(1);
  for (const SymMatrix& lg : logs) {
    factors.push_back(shrink_factor_2x2(vech(lg.matrix())));
    prod = kron(prod, factors.back().correlation);
  }
  SpdMatrix corr(std::move(prod));
  return ShrinkModelResult{std::move(factors), std::move(corr)};
}

// D^{-1/2} M D^{-1/2} with D = diag(M): restores an exactly unit diagonal.
inline SpdMatrix renormalize(const SpdMatrix& m) {
  const int n = m.dim();
  Matrix out(n, n);
  for (int i = 0; i < n; ++i) {
    if (!(m(i, i) > 0.0)) throw NonPositiveDiagonal(i);
  }
  for (int i = 0; i < n; ++i) {
    out(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      out(i, j) = m(i, j) / std::sqrt(m(i, i) * m(j, j));
      out(j, i) = out(i, j);
    }
  }
  return SpdMatrix(std::move(out));
}

}  // namespace kronfit
