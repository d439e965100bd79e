#include "focus/rng.hpp"

#include <algorithm>
#include <cmath>

#include "focus/error.hpp"

namespace focus {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

namespace {

// Acklam's rational approximation to the normal quantile (~1.15e-9 relative
// error), refined below with one Halley step to near machine precision.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double inverse_normal_cdf(double p) {
  internal_check(p > 0.0 && p < 1.0, "inverse_normal_cdf: p outside (0,1)");
  double x = acklam(p);
  // One Halley refinement against erfc.
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

double truncated_normal(double sigma, double bound, double u) {
  internal_check(sigma > 0.0 && bound > 0.0, "truncated_normal: nonpositive sigma or bound");
  const double z = bound / sigma;
  if (z >= 8.0) {
    // Truncation mass is below double resolution; draw untruncated and clamp.
    return std::clamp(sigma * inverse_normal_cdf(u), -bound, bound);
  }
  const double lo = normal_cdf(-z);
  const double p = lo + u * (1.0 - 2.0 * lo);
  return std::clamp(sigma * inverse_normal_cdf(p), -bound, bound);
}

}  // namespace focus
