#pragma once

#include <optional>

#include "kronfit/mdest.hpp"

namespace kronfit {

// Everything the Gaussian quasi-likelihood in theta needs once D is fixed:
// A = D^{-1/2} Sigma_tilde D^{-1/2} with Sigma_tilde the centered second
// moment (centered at ybar, or at a known mu in simulation mode).
struct LikelihoodContext {
  DesignMatrix design;
  Vec d;
  SpdMatrix a_matrix;
  int t_obs;
};

inline LikelihoodContext make_likelihood_context(const Panel& panel, const DesignMatrix& design,
                                                 const Vec& d,
                                                 std::optional<Vec> known_mu = std::nullopt) {
  panel.validate();
  const int t_obs = panel.t_obs();
  const int n = panel.n_series();
  if (static_cast<int>(d.size()) != n) throw DimensionMismatch("D length");
  Vec center(static_cast<size_t>(n), 0.0);
  if (known_mu) {
    center = *known_mu;
  } else {
    for (int t = 0; t < t_obs; ++t)
      for (int i = 0; i < n; ++i) center[static_cast<size_t>(i)] += panel.data(t, i);
    for (double& x : center) x /= t_obs;
  }
  Matrix a(n, n);
  for (int t = 0; t < t_obs; ++t)
    for (int i = 0; i < n; ++i) {
      const double yi = panel.data(t, i) - center[static_cast<size_t>(i)];
      for (int j = i; j < n; ++j)
        a(i, j) += yi * (panel.data(t, j) - center[static_cast<size_t>(j)]);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      a(i, j) /= t_obs * std::sqrt(d[static_cast<size_t>(i)] * d[static_cast<size_t>(j)]);
      a(j, i) = a(i, j);
    }
  return LikelihoodContext{design, d, SpdMatrix(std::move(a)), t_obs};
}

inline LikelihoodContext make_likelihood_context(const MomentSet& moments,
                                                 const DesignMatrix& design) {
  return LikelihoodContext{design, moments.d_hat, moments.theta_hat, moments.t_obs};
}

// l(theta) = -(T/2) [ tr Omega + tr(A e^{-Omega}) ], dropping theta-free terms.
inline double loglik(const LikelihoodContext& ctx, const ThetaVector& theta) {
  const SymMatrix omega = theta_to_omega(ctx.design, theta);
  SymEig e = eigen_sym(omega.matrix());
  double tr_omega = 0.0;
  for (double w : e.values) tr_omega += w;
  Vec inv_exp(e.values.size());
  for (size_t i = 0; i < inv_exp.size(); ++i) inv_exp[i] = std::exp(-e.values[i]);
  const Matrix em = compose_eigen(e.u, inv_exp);
  double tr_ae = 0.0;
  const int n = em.rows();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) tr_ae += ctx.a_matrix(i, j) * em(j, i);
  return -0.5 * ctx.t_obs * (tr_omega + tr_ae);
}

// Score: (T/2) E^T D_n^T Psi(Omega) vec(e^{-Omega} A e^{-Omega} - e^{-Omega}).
inline Vec score(const LikelihoodContext& ctx, const ThetaVector& theta) {
  const SymMatrix omega = theta_to_omega(ctx.design, theta);
  const SpdMatrix theta_m = spd_exp(omega);
  const SpdMatrix theta_inv = spd_power(theta_m, -1.0);
  const Matrix psi = psi_operator(theta_m);
  const Matrix inner =
      theta_inv.matrix() * ctx.a_matrix.matrix() * theta_inv.matrix() - theta_inv.matrix();
  const int n = theta_m.dim();
  const Vec rhs = psi * vec(inner);
  const Vec dn_rhs = duplication(n).dense().transpose() * rhs;
  Vec s = ctx.design.e.transpose() * dn_rhs;
  for (double& x : s) x *= 0.5 * ctx.t_obs;
  return s;
}

// Expected Hessian scaled by -1/T: Upsilon = (1/2) E^T D_n^T Xi(Omega) D_n E,
// evaluated at the fitted correlation exp(Omega(theta)).
inline Matrix upsilon(const DesignMatrix& design, const ThetaVector& theta) {
  const SpdMatrix theta_m = spd_exp(theta_to_omega(design, theta));
  const Matrix dn = duplication(theta_m.dim()).dense();
  const Matrix dne = dn * design.e;
  return 0.5 * (dne.transpose() * xi_operator(theta_m) * dne);
}

struct OneStepEstimate {
  ThetaVector theta_tilde;
  Matrix upsilon_hat;
  Matrix variance;  // (1/T) Upsilon_hat^{-1}
};

// theta_tilde = theta_hat - Upsilon_hat^{-1} score(theta_hat) / T.
// A non-PD Upsilon_hat aborts; clipping it would invalidate the variance report.
inline OneStepEstimate one_step(const MdEstimate& md, const LikelihoodContext& ctx) {
  Matrix ups = upsilon(ctx.design, md.theta);
  SymEig e = eigen_sym(ups);
  if (!(e.values.front() > 0.0)) throw HessianNotPd(e.values.front());
  Vec inv(e.values.size());
  for (size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / e.values[i];
  Matrix ups_inv = compose_eigen(e.u, inv);
  const Vec sc = score(ctx, md.theta);
  Vec step = ups_inv * sc;
  ThetaVector theta = md.theta;
  for (size_t i = 0; i < theta.size(); ++i) theta[i] -= step[i] / ctx.t_obs;
  Matrix variance = (1.0 / ctx.t_obs) * ups_inv;
  return OneStepEstimate{std::move(theta), std::move(ups), std::move(variance)};
}

}  // namespace kronfit
