#pragma once

#include <utility>

#include "kronfit/design.hpp"
#include "kronfit/moments.hpp"

namespace kronfit {

// Weighting of the minimum-distance objective. FeasibleOptimal resolves to the
// eigen-clipped pseudo-inverse of the plug-in S matrix.
struct WeightSpec {
  enum class Kind { Identity, Supplied, FeasibleOptimal };

  Kind kind = Kind::Identity;
  Matrix w;  // only for Supplied

  static WeightSpec identity() { return {Kind::Identity, {}}; }
  static WeightSpec supplied(Matrix w) { return {Kind::Supplied, std::move(w)}; }
  static WeightSpec feasible_optimal() { return {Kind::FeasibleOptimal, {}}; }
};

struct MdEstimate {
  ThetaVector theta;
  Matrix j;  // asymptotic variance of sqrt(T) (theta_hat - theta0)
  DRegime regime = DRegime::Estimated;
  Matrix weight;  // the W actually used
  int weight_clipped = 0;
};

inline Matrix resolve_weight(const MomentSet& moments, const WeightSpec& spec, DRegime regime,
                             int* clipped = nullptr) {
  const int m = vech_size(moments.n());
  switch (spec.kind) {
    case WeightSpec::Kind::Identity:
      return Matrix::identity(m);
    case WeightSpec::Kind::Supplied: {
      if (spec.w.rows() != m || spec.w.cols() != m)
        throw DimensionMismatch("supplied weight must be n(n+1)/2 square");
      Matrix w = detail::symmetrized(spec.w);
      if (min_eigenvalue_sym(w) <= 0.0) throw NotPositiveDefinite(0, min_eigenvalue_sym(w));
      return w;
    }
    case WeightSpec::Kind::FeasibleOptimal: {
      ClippedPinv p = pinv_sym_clipped(g_covariance(moments, regime), 1e-10);
      if (clipped) *clipped = p.clipped;
      return std::move(p.pinv);
    }
  }
  throw DimensionMismatch("unreachable weight kind");
}

// Closed-form minimum-distance estimate: the minimizer of
// (vech log Theta_hat - E theta)^T W (vech log Theta_hat - E theta),
// computed through a rank-revealing QR of W^{1/2} E.
inline ThetaVector md_point_estimate(const Matrix& e, const Matrix& w, const Vec& target) {
  const Matrix wh = sqrt_sym_psd(w);
  QrPivot qr(wh * e);
  if (qr.rank(1e-12) < e.cols()) throw SingularNormalEquations();
  return qr.solve(wh * target);
}

// Sandwich variance of the MD estimator:
// (E^T W E)^{-1} E^T W S W E (E^T W E)^{-1} with S = g_covariance(regime).
inline Matrix md_variance(const MomentSet& moments, const DesignMatrix& design, const Matrix& w,
                          DRegime regime, VSource vsource = VSource::Empirical) {
  const Matrix& e = design.e;
  Matrix g = e.transpose() * w * e;
  if (min_eigenvalue_sym(g) <= 1e-14 * max_eigenvalue_sym(g)) throw SingularNormalEquations();
  const Matrix ginv = inverse_spd_sym(g);
  const Matrix s = g_covariance(moments, regime, vsource);
  const Matrix bread = ginv * (e.transpose() * w);
  return bread * s * bread.transpose();
}

inline MdEstimate md_estimate(const MomentSet& moments, const DesignMatrix& design,
                              const WeightSpec& wspec = WeightSpec::identity(),
                              VSource vsource = VSource::Empirical) {
  const DRegime regime = moments.regime;
  int clipped = 0;
  Matrix w = resolve_weight(moments, wspec, regime, &clipped);
  const Vec target = vech(spd_log(moments.theta_hat).matrix());
  ThetaVector theta = md_point_estimate(design.e, w, target);
  Matrix j = md_variance(moments, design, w, regime, vsource);
  return MdEstimate{std::move(theta), std::move(j), regime, std::move(w), clipped};
}

}  // namespace kronfit
