#pragma once

// Quantile functions of the error laws used by the simulation designs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "recurq/errors.hpp"

namespace recurq {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Acklam's rational approximation followed by one Halley step on erfc;
// absolute error well below 1e-12 on [1e-300, 1 - 1e-16].
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw InvalidArgument("normal_quantile: p outside [0, 1]");
  }
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley step.
  // e = Phi(x) - p, written as (1 - p) - Q(x) in the upper half.
  const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

// Student t with 3 degrees of freedom:
//   F(t) = 1/2 + (1/pi) [ (t/sqrt3) / (1 + t^2/3) + atan(t/sqrt3) ].
inline double student_t3_cdf(double t) {
  const double s = t / std::sqrt(3.0);
  return 0.5 + (s / (1.0 + s * s) + std::atan(s)) / std::numbers::pi;
}

inline double student_t3_pdf(double t) {
  const double v = 3.0 + t * t;
  return 6.0 * std::sqrt(3.0) / (std::numbers::pi * v * v);
}

// Safeguarded Newton inversion of the closed-form CDF.
inline double student_t3_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("student_t3_quantile: p must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -student_t3_quantile(1.0 - p);
  // p < 0.5: the root is negative; tail asymptote F(t) ~ 2 sqrt3 / (pi |t|^3) seeds it.
  double hi = 0.0;
  double lo = -1.0;
  while (student_t3_cdf(lo) > p) {
    hi = lo;
    lo *= 2.0;
  }
  double t = std::max(lo, -std::cbrt(2.0 * std::sqrt(3.0) / (std::numbers::pi * p)));
  if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double f = student_t3_cdf(t) - p;
    if (f > 0.0) hi = t; else lo = t;
    double next = t - f / student_t3_pdf(t);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * (1.0 + std::abs(t))) return next;
    t = next;
  }
  return t;
}

}  // namespace recurq
