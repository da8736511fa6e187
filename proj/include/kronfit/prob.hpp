#pragma once

#include <cmath>
#include <stdexcept>

namespace kronfit {

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace detail {

// Regularized lower incomplete gamma P(a, x) by series expansion; valid for
// x < a + 1.
inline double gamma_p_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int k = 1; k < 1000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz continued fraction;
// valid for x >= a + 1.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k < 1000; ++k) {
    const double an = -k * (k - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace detail

// Upper tail of the chi-squared distribution with df degrees of freedom.
inline double chi2_sf(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi2_sf requires df >= 1");
  if (x < 0.0) throw std::invalid_argument("chi2_sf requires x >= 0");
  if (x == 0.0) return 1.0;
  const double a = 0.5 * df;
  const double xx = 0.5 * x;
  if (xx < a + 1.0) return 1.0 - detail::gamma_p_series(a, xx);
  return detail::gamma_q_cf(a, xx);
}

}  // namespace kronfit
