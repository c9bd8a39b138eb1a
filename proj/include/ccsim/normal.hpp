#pragma once

#include <cmath>

namespace ccsim {

/// Standard normal density.
inline double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.39894228040143267794;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

/// Standard normal CDF, accurate in both tails.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Probability mass of N(mean, sigma^2) on [lo, hi). Uses the tail on the
/// side away from the mean so that small cells far out keep full precision.
inline double normal_interval(double lo, double hi, double mean, double sigma) {
  const double a = (lo - mean) / sigma;
  const double b = (hi - mean) / sigma;
  if (a >= 0.0) return normal_cdf(-a) - normal_cdf(-b);
  return normal_cdf(b) - normal_cdf(a);
}

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// Inverse error function on (-1, 1).
double erf_inverse(double y);

}  // namespace ccsim
