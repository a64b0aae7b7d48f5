// heatdesc — kernels implementation.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace heatdesc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
// Computed rather than written as a literal so that w_profile(0) equals
// std::sqrt(pi) bit-for-bit.
const double kSqrtPi = std::sqrt(kPi);

void require_positive_sigma(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("gaussian kernel requires sigma > 0");
  }
}

}  // namespace

double gauss_norm_sq(double norm_sq, double sigma, int dim) {
  require_positive_sigma(sigma);
  const double two_var = 2.0 * sigma * sigma;
  double norm;
  switch (dim) {
    case 1:
      norm = 1.0 / std::sqrt(kPi * two_var);
      break;
    case 2:
      norm = 1.0 / (kPi * two_var);
      break;
    case 4: {
      const double n2 = kPi * two_var;
      norm = 1.0 / (n2 * n2);
      break;
    }
    default:
      throw std::domain_error("gaussian kernel supports dim in {1, 2, 4}");
  }
  return norm * std::exp(-norm_sq / two_var);
}

double gauss1(double x, double sigma) { return gauss_norm_sq(x * x, sigma, 1); }

double gauss2(double x, double y, double sigma) {
  return gauss_norm_sq(x * x + y * y, sigma, 2);
}

double gauss4(const std::array<double, 4>& x, double sigma) {
  return gauss_norm_sq(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[3] * x[3],
                       sigma, 4);
}

double gauss_periodic(double phi, double sigma, int wraps) {
  require_positive_sigma(sigma);
  if (wraps < 1) {
    throw std::domain_error("gauss_periodic requires wraps >= 1");
  }
  // Reduce to [-pi, pi); periodicity becomes exact regardless of branch.
  double phi_r = std::remainder(phi, kTwoPi);

  // The finite comb covers offsets up to 2*pi*wraps + pi from the reduced
  // angle; beyond +-8 sigma the omitted tail is < 1e-12 of the total, so the
  // literal truncated sum is faithful. Otherwise use the Fourier series of
  // the wrapped Gaussian — exact, and rapidly convergent precisely when
  // sigma is large relative to the period.
  if (kTwoPi * wraps + kPi >= 8.0 * sigma) {
    double sum = 0.0;
    for (int k = -wraps; k <= wraps; ++k) {
      sum += gauss1(phi_r + kTwoPi * k, sigma);
    }
    return sum;
  }
  double series = 0.0;
  for (int m = 1; m <= 64; ++m) {
    const double amp = std::exp(-0.5 * m * m * sigma * sigma);
    if (amp < 1e-18) break;
    series += amp * std::cos(m * phi_r);
  }
  return (1.0 + 2.0 * series) / kTwoPi;
}

double erfcx(double x) {
  if (std::isnan(x)) {
    throw std::domain_error("erfcx: NaN input");
  }
  if (x < 26.0) {
    // exp(x^2) stays below the overflow threshold until |x| ~ 26.6 and
    // std::erfc is still normal at x = 26 (~1e-295), so the direct product
    // is accurate here. Below x ~ -26.6 the true value exceeds the double
    // range; the product then overflows to +inf, as documented.
    return std::exp(x * x) * std::erfc(x);
  }
  // Asymptotic expansion: erfcx(x) = 1/(x sqrt(pi)) sum (-1)^n (2n-1)!!/(2x^2)^n.
  // At x >= 26 the terms shrink by >= 1/1352 per order; a dozen terms reach
  // machine precision long before the divergent tail of the series matters.
  const double inv_2x2 = 1.0 / (2.0 * x * x);
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n <= 16; ++n) {
    term *= -(2.0 * n - 1.0) * inv_2x2;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum / (x * kSqrtPi);
}

double w_profile(double x) {
  if (x < 10.0) {
    return kSqrtPi * (1.0 + 2.0 * x * x) * erfcx(x) - 2.0 * x;
  }
  // Direct evaluation subtracts two O(x) quantities to expose an O(1/x^3)
  // residue; fold the erfcx expansion into the difference instead:
  //   w(x) = 2x * sum_{n>=2} (-1)^n (2n-3)!! (2n-2) q^n,  q = 1/(2x^2),
  // whose leading term is 1/x^3.
  const double q = 1.0 / (2.0 * x * x);
  double term = 2.0 * q * q;  // n = 2
  double sum = term;
  for (int n = 2; n <= 40; ++n) {
    term *= -q * (2.0 * n - 1.0) * static_cast<double>(n) / (n - 1.0);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return 2.0 * x * sum;
}

double gauss_halfline_moment2(double a1, double a2) {
  if (!(a2 > 0.0)) {
    throw std::domain_error("gauss_halfline_moment2 requires a2 > 0");
  }
  const double sum_sq = a1 * a1 + a2 * a2;
  if (a1 >= 0.0) {
    // All three contributions are non-negative; no cancellation.
    const double z = a1 / (std::sqrt(2.0) * a2);
    return a1 * a2 * a2 * std::exp(-z * z) +
           std::sqrt(kPi / 2.0) * a2 * sum_sq * (1.0 + std::erf(z));
  }
  // For a1 < 0 both terms carry the same exponentially small factor and
  // nearly cancel. Factor exp(-u^2) out once via erfc = exp(-u^2) erfcx so
  // the subtraction happens between well-scaled quantities.
  const double u = -a1 / (std::sqrt(2.0) * a2);
  const double bracket =
      a1 * a2 * a2 + std::sqrt(kPi / 2.0) * a2 * sum_sq * erfcx(u);
  return std::exp(-u * u) * bracket;
}

double radial_profile_integral(double c1, double c2, double sigma1,
                               const std::array<double, 2>& c3,
                               const std::array<double, 2>& c4, double sigma2) {
  require_positive_sigma(sigma1);
  require_positive_sigma(sigma2);
  const double var1 = sigma1 * sigma1;
  const double var2 = sigma2 * sigma2;
  const double c3_sq = c3[0] * c3[0] + c3[1] * c3[1];
  const double c4_sq = c4[0] * c4[0] + c4[1] * c4[1];
  const double t1_sq = c1 * c1 / (2.0 * var1) + c3_sq / (2.0 * var2);
  if (t1_sq == 0.0) {
    throw std::domain_error(
        "radial_profile_integral: degenerate direction (c1 = 0 and c3 = 0)");
  }
  const double t1 = std::sqrt(t1_sq);
  const double c3_dot_c4 = c3[0] * c4[0] + c3[1] * c4[1];
  const double t2 = (c1 * c2 / var1 + c3_dot_c4 / var2) / (2.0 * t1);
  const double envelope =
      std::exp(-c2 * c2 / (2.0 * var1) - c4_sq / (2.0 * var2));
  const double denom = 8.0 * std::sqrt(2.0) * kPi * kSqrtPi * sigma1 * var2 *
                       t1 * t1 * t1;
  return envelope * w_profile(t2) / denom;
}

double pooled_window_inner(const std::array<double, 2>& x,
                           const std::array<double, 2>& y, double sigma_d,
                           double sigma_s, double eps_x) {
  require_positive_sigma(sigma_d);
  if (sigma_s < 0.0) {
    throw std::domain_error("pooled_window_inner requires sigma_s >= 0");
  }
  const double dx = y[0] - x[0];
  const double dy = y[1] - x[1];
  const double window = gauss2(dx, dy, sigma_d);
  const double x_sq = x[0] * x[0] + x[1] * x[1];
  if (x_sq < eps_x * eps_x || sigma_s == 0.0) {
    // Pooling over domain size has no first-order effect at the window
    // center; fall back to the plain spatial window.
    return window;
  }
  const double m_sq = sigma_d * sigma_d / x_sq;       // (sigma_d/|x|)^2
  const double sp_sq = sigma_s * sigma_s + m_sq;      // widened variance
  const double x_dot_y = x[0] * y[0] + x[1] * y[1];
  const double q = 1.0 - (x_dot_y + sigma_d * sigma_d) / x_sq;
  // gauss1(q, m)^(-1) * gauss1(q, sp) with the exponents merged: the ratio
  // is (m/sp) exp(q^2 sigma_s^2 / (2 m^2 sp^2)), always >= m/sp and finite
  // for all parameters this library feeds it.
  const double factor =
      std::sqrt(m_sq / sp_sq) *
      std::exp(0.5 * q * q * sigma_s * sigma_s / (m_sq * sp_sq));
  return window * factor;
}

double pooled_window_both(const std::array<double, 2>& x,
                          const std::array<double, 2>& y, double sigma_d,
                          double sigma_s) {
  require_positive_sigma(sigma_d);
  if (sigma_s < 0.0) {
    throw std::domain_error("pooled_window_both requires sigma_s >= 0");
  }
  const double var_d = sigma_d * sigma_d;
  const double var_s = sigma_s * sigma_s;
  const double x_sq = x[0] * x[0] + x[1] * x[1];
  const double x_dot_y = x[0] * y[0] + x[1] * y[1];
  const double big = var_d + var_s * x_sq;  // combined pooling variance
  const double dx = y[0] - x[0];
  const double dy = y[1] - x[1];
  // x . y_perp with y_perp = (y2, -y1): the component of y across x, which
  // scale pooling cannot blur away.
  const double cross = x[0] * y[1] - x[1] * y[0];
  const double prefactor =
      (var_d + var_s * x_dot_y) / (kTwoPi * sigma_d * big * std::sqrt(big));
  const double exponent =
      -(var_d * (dx * dx + dy * dy) + var_s * cross * cross) /
      (2.0 * var_d * big);
  return prefactor * std::exp(exponent);
}

}  // namespace heatdesc
