#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "kronfit/kalg.hpp"
#include "kronfit/linalg.hpp"
#include "kronfit/matfun.hpp"

namespace kronfit {

// Whether the variance diagonal D is taken from the data or supplied by the
// caller (simulation studies, CLI known-d mode). The choice changes which
// correlation estimate is formed and whether the derivative correction P
// enters the variance formulas.
enum class DRegime { Estimated, Known };

// T observations of an n-dimensional series, rows = time.
struct Panel {
  Matrix data;
  std::vector<std::string> names;  // optional column labels

  int t_obs() const { return data.rows(); }
  int n_series() const { return data.cols(); }

  void validate() const {
    if (data.rows() < 2 || data.cols() < 2)
      throw DimensionMismatch("panel needs T >= 2 and n >= 2");
    for (int t = 0; t < data.rows(); ++t)
      for (int i = 0; i < data.cols(); ++i)
        if (!std::isfinite(data(t, i))) throw DimensionMismatch("panel has non-finite entries");
  }
};

struct MomentSet {
  int t_obs = 0;
  DRegime regime = DRegime::Estimated;
  Vec mean;
  SpdMatrix sigma_hat;  // (1/T) sum (y - ybar)(y - ybar)^T
  Vec d_hat;            // variance diagonal: diag(sigma_hat) or the supplied D
  SpdMatrix theta_hat;  // D^{-1/2} sigma_hat D^{-1/2}
  Matrix v_hat;         // n^2 x n^2 fourth-moment matrix
  Matrix p_hat;         // I - D_n D_n^+ (I kron theta_hat) M_d

  int n() const { return sigma_hat.dim(); }
};

// P = I_{n^2} - D_n D_n^+ (I_n kron Theta) M_d, the derivative of the
// covariance-to-correlation map; annihilates pure variance rescalings.
inline Matrix p_matrix(const Matrix& theta) {
  const int n = theta.rows();
  const Matrix ddp = duplication(n).dense() * duplication_pinv(n).dense();
  Matrix p = Matrix::identity(n * n) - ddp * kron(Matrix::identity(n), theta) * diag_select(n).dense();
  return p;
}

namespace detail {

inline SpdMatrix checked_covariance(const Matrix& sigma, double floor_scale) {
  const int n = sigma.rows();
  const double floor = floor_scale * sigma.trace() / n;
  const double mineval = min_eigenvalue_sym(sigma);
  if (mineval <= floor) {
    // Suggest a ridge restoring definiteness; never applied silently.
    const double ridge = std::max(floor - mineval, floor) * 2.0;
    throw SingularCovariance(mineval, ridge);
  }
  return SpdMatrix(sigma);
}

}  // namespace detail

// Sample moments of a panel. Covariance uses 1/T. v_hat row (i-1)n+j, column
// (k-1)n+l carries (1/T) sum_t yt_i yt_j yt_k yt_l - sighat_ij sighat_kl over
// centered observations. With known_d supplied, the correlation estimate is
// D^{-1/2} sigma_hat D^{-1/2} against that fixed diagonal.
inline MomentSet compute_moments(const Panel& panel, std::optional<Vec> known_d = std::nullopt,
                                 double pd_floor_scale = 1e-10) {
  panel.validate();
  const int t_obs = panel.t_obs();
  const int n = panel.n_series();

  Vec mean(static_cast<size_t>(n), 0.0);
  for (int t = 0; t < t_obs; ++t)
    for (int i = 0; i < n; ++i) mean[static_cast<size_t>(i)] += panel.data(t, i);
  for (double& x : mean) x /= t_obs;

  Matrix sigma(n, n);
  for (int t = 0; t < t_obs; ++t)
    for (int i = 0; i < n; ++i) {
      const double yi = panel.data(t, i) - mean[static_cast<size_t>(i)];
      for (int j = i; j < n; ++j)
        sigma(i, j) += yi * (panel.data(t, j) - mean[static_cast<size_t>(j)]);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      sigma(i, j) /= t_obs;
      sigma(j, i) = sigma(i, j);
    }

  SpdMatrix sigma_hat = detail::checked_covariance(sigma, pd_floor_scale);

  DRegime regime = known_d ? DRegime::Known : DRegime::Estimated;
  Vec d(static_cast<size_t>(n));
  if (known_d) {
    if (known_d->size() != static_cast<size_t>(n)) throw DimensionMismatch("known D length");
    d = *known_d;
    for (size_t i = 0; i < d.size(); ++i)
      if (!(d[i] > 0.0)) throw NonPositiveDiagonal(static_cast<int>(i));
  } else {
    for (int i = 0; i < n; ++i) d[static_cast<size_t>(i)] = sigma(i, i);
  }

  Matrix theta(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      theta(i, j) = sigma(i, j) / std::sqrt(d[static_cast<size_t>(i)] * d[static_cast<size_t>(j)]);
  if (regime == DRegime::Estimated)
    for (int i = 0; i < n; ++i) theta(i, i) = 1.0;
  SpdMatrix theta_hat(theta);

  // v_hat = (1/T) sum_t w_t w_t^T - vec(sigma_hat) vec(sigma_hat)^T with
  // w_t = vec of the centered outer product.
  Matrix v_hat(n * n, n * n);
  Vec w(static_cast<size_t>(n) * n);
  Vec centered(static_cast<size_t>(n));
  for (int t = 0; t < t_obs; ++t) {
    for (int i = 0; i < n; ++i) centered[static_cast<size_t>(i)] = panel.data(t, i) - mean[static_cast<size_t>(i)];
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        w[static_cast<size_t>(j) * n + i] = centered[static_cast<size_t>(i)] * centered[static_cast<size_t>(j)];
    for (int a = 0; a < n * n; ++a)
      for (int b = a; b < n * n; ++b) v_hat(a, b) += w[static_cast<size_t>(a)] * w[static_cast<size_t>(b)];
  }
  const Vec vs = vec(sigma_hat.matrix());
  for (int a = 0; a < n * n; ++a)
    for (int b = a; b < n * n; ++b) {
      v_hat(a, b) = v_hat(a, b) / t_obs - vs[static_cast<size_t>(a)] * vs[static_cast<size_t>(b)];
      v_hat(b, a) = v_hat(a, b);
    }

  Matrix p_hat = p_matrix(theta_hat.matrix());

  return MomentSet{t_obs, regime, std::move(mean), std::move(sigma_hat),
                   std::move(d),  std::move(theta_hat), std::move(v_hat), std::move(p_hat)};
}

// The Gaussian fourth-moment shortcut V = 2 D_n D_n^+ (Sigma kron Sigma).
inline Matrix gaussian_v(const Matrix& sigma) {
  const int n = sigma.rows();
  return 2.0 * (duplication(n).dense() * duplication_pinv(n).dense() * kron(sigma, sigma));
}

inline Matrix dinv_half_kron(const Vec& d) {
  const int n = static_cast<int>(d.size());
  Vec dh(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) dh[static_cast<size_t>(i)] = 1.0 / std::sqrt(d[static_cast<size_t>(i)]);
  return kron(Matrix::diag(dh), Matrix::diag(dh));
}

// Derivative of vec(log Theta) with respect to vec(Sigma):
// H(Theta) P (D^{-1/2} kron D^{-1/2}).
inline Matrix correlation_jacobian(const SpdMatrix& theta_hat, const Vec& d_hat) {
  return h_operator(theta_hat) * p_matrix(theta_hat.matrix()) * dinv_half_kron(d_hat);
}

enum class VSource { Empirical, Gaussian };

// Asymptotic covariance of sqrt(T) (vech log Theta_hat - E theta), the S matrix:
//   Known D:     D_n^+ H X V X H D_n^+T,          X = D^{-1/2} kron D^{-1/2}
//   Estimated D: D_n^+ H P X V X P^T H D_n^+T
inline Matrix g_covariance(const MomentSet& m, DRegime regime, VSource vsource = VSource::Empirical) {
  const int n = m.n();
  const Matrix dp = duplication_pinv(n).dense();
  const Matrix h = h_operator(m.theta_hat);
  const Matrix x = dinv_half_kron(m.d_hat);
  const Matrix v = vsource == VSource::Empirical ? m.v_hat : gaussian_v(m.sigma_hat.matrix());
  const Matrix left = regime == DRegime::Known ? dp * (h * x) : dp * (h * (m.p_hat * x));
  return left * v * left.transpose();
}

}  // namespace kronfit
