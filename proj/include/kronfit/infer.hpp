#pragma once

#include <utility>

#include "kronfit/mdest.hpp"
#include "kronfit/prob.hpp"
#include "kronfit/qmle.hpp"

namespace kronfit {

struct SMatrix {
  Matrix s;
};

// S = D_n^+ H (D^{-1/2} kron D^{-1/2}) V (D^{-1/2} kron D^{-1/2}) H D_n^+T,
// with the derivative correction P inserted around the scaling when D is
// estimated.
inline SMatrix s_matrix(const MomentSet& moments, DRegime regime,
                        VSource vsource = VSource::Empirical) {
  return SMatrix{g_covariance(moments, regime, vsource)};
}

struct TestResult {
  double statistic = 0.0;
  int df = 0;
  double p_chi2 = 1.0;
  double z_diag = 0.0;
  double p_normal = 1.0;  // one-sided upper tail by default
  int clipped = 0;        // eigenvalues dropped when pseudo-inverting S_hat
  ThetaVector theta_opt;  // the estimate recomputed under W = S_hat^{-1}
};

// Over-identification test: T g^T S_hat^{-1} g with g = vech(log Theta_hat) -
// E theta_hat and theta_hat recomputed under W = S_hat^{-1}; the chi-squared
// limit requires the optimal weight. Also reports the diagonal-path normal
// approximation (stat - df)/sqrt(2 df).
inline TestResult overid_test(const MomentSet& moments, const DesignMatrix& design,
                              VSource vsource = VSource::Empirical, bool two_sided_normal = false) {
  const int df = vech_size(moments.n()) - design.s();
  if (df < 1) throw NotOveridentified();

  ClippedPinv sp = pinv_sym_clipped(g_covariance(moments, moments.regime, vsource), 1e-10);
  const Vec target = vech(spd_log(moments.theta_hat).matrix());
  ThetaVector theta = md_point_estimate(design.e, sp.pinv, target);
  const Vec g = target - design.e * theta;
  const double stat = moments.t_obs * dot(g, sp.pinv * g);

  TestResult out;
  out.statistic = stat;
  out.df = df;
  out.p_chi2 = chi2_sf(stat, df);
  out.z_diag = (stat - df) / std::sqrt(2.0 * df);
  out.p_normal = two_sided_normal ? 2.0 * normal_sf(std::fabs(out.z_diag)) : normal_sf(out.z_diag);
  out.clipped = sp.clipped;
  out.theta_opt = std::move(theta);
  return out;
}

// The estimate the caller already has does not enter the statistic (the
// optimal-weight refit does), so this overload only keeps the call shape of
// the estimation pipeline.
inline TestResult overid_test(const MdEstimate&, const MomentSet& moments,
                              const DesignMatrix& design, VSource vsource = VSource::Empirical,
                              bool two_sided_normal = false) {
  return overid_test(moments, design, vsource, two_sided_normal);
}

struct WaldResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

// Joint Wald test of A^T theta0 = r for a full-column-rank s x k contrast A,
// with avar the asymptotic variance of sqrt(T)(theta_hat - theta0): J for the
// MD estimator, Upsilon_hat^{-1} for the one-step.
inline WaldResult wald_joint(const ThetaVector& theta, const Matrix& avar, int t_obs,
                             const Matrix& a, const Vec& r) {
  const int k = a.cols();
  if (static_cast<int>(r.size()) != k) throw DimensionMismatch("restriction length");
  if (rank_of(a) < k) throw RankDeficientContrast();
  const Matrix aja = a.transpose() * avar * a;
  SymEig e = eigen_sym(detail::symmetrized(aja));
  if (!(e.values.front() > 1e-12 * std::fabs(e.values.back()))) throw RankDeficientContrast();
  Vec inv(e.values.size());
  for (size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / e.values[i];
  const Matrix aja_inv = compose_eigen(e.u, inv);
  const Vec diff = a.transpose() * theta - r;
  WaldResult out;
  out.statistic = t_obs * dot(diff, aja_inv * diff);
  out.df = k;
  out.p_value = chi2_sf(out.statistic, k);
  return out;
}

inline WaldResult wald_joint(const MdEstimate& md, int t_obs, const Matrix& a, const Vec& r) {
  return wald_joint(md.theta, md.j, t_obs, a, r);
}

inline WaldResult wald_joint(const OneStepEstimate& os, int t_obs, const Matrix& a, const Vec& r) {
  // variance is (1/T) Upsilon^{-1}; rescale to the sqrt(T) convention.
  return wald_joint(os.theta_tilde, static_cast<double>(t_obs) * os.variance, t_obs, a, r);
}

}  // namespace kronfit
