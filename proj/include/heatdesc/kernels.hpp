// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// kernels: scalar special functions and the closed-form Gaussian integral
// identities that every descriptor in this library is assembled from.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <array>
#include <cstddef>

namespace heatdesc {

/// Unit-mass isotropic Gaussian density in d dimensions, evaluated at a point
/// with squared norm `norm_sq`:
///
///     (2 pi sigma^2)^(-d/2) * exp(-norm_sq / (2 sigma^2))
///
/// The dimension enters only through the normalization, so all overloads
/// funnel through this helper.
///
/// Throws std::domain_error if sigma <= 0 or d is not one of {1, 2, 4}.
double gauss_norm_sq(double norm_sq, double sigma, int dim);

/// 1D unit-mass Gaussian density.
double gauss1(double x, double sigma);

/// 2D isotropic unit-mass Gaussian density.
double gauss2(double x, double y, double sigma);

/// 4D isotropic unit-mass Gaussian density (used for pooling over the four
/// entries of a 2x2 linear map).
double gauss4(const std::array<double, 4>& x, double sigma);

/// Wrapped (periodic) Gaussian density on the circle of period 2*pi:
///
///     sum_{k = -wraps..wraps} gauss1(phi + 2 pi k, sigma)
///
/// `wraps` controls the comb truncation. The finite comb is evaluated
/// literally whenever it covers +-8 sigma around the reduced angle, which
/// keeps its truncation error below ~1e-12 relative. For larger sigma —
/// where any practical wrap count leaves visible tail mass outside the
/// window — the evaluation switches to the Fourier expansion of the wrapped
/// Gaussian,
///
///     (1/2pi) * (1 + 2 sum_{m>=1} exp(-m^2 sigma^2 / 2) cos(m phi)),
///
/// which is the exact limit the comb converges to and needs only a handful
/// of terms precisely when the comb does not. phi is reduced to [-pi, pi)
/// first, so 2*pi-periodicity is exact by construction.
///
/// Throws std::domain_error if sigma <= 0 or wraps < 1.
double gauss_periodic(double phi, double sigma, int wraps = 4);

/// Scaled complementary error function, erfcx(x) = exp(x^2) * erfc(x),
/// evaluated without overflow for x up to at least 1e4.
///
/// The naive product exp(x^2)*erfc(x) overflows once x^2 > 709 (x ~ 26.6)
/// because erfc underflows before exp overflows is checked; this routine
/// switches to the asymptotic expansion
///
///     erfcx(x) ~ 1/(x sqrt(pi)) * sum_n (-1)^n (2n-1)!! / (2 x^2)^n
///
/// for x >= 26 where the direct product is unusable. For x < 26 (including
/// all negative x down to ~-26, where exp(x^2) is still representable) the
/// direct product is accurate to a few parts in 1e13. Below x ~ -26.6 the
/// true value exceeds the double range and the result overflows to +inf,
/// mirroring the function itself.
///
/// Throws std::domain_error on NaN input.
double erfcx(double x);

/// Half-line second-moment profile
///
///     w(x) = sqrt(pi) * (1 + 2 x^2) * erfcx(x) - 2 x
///          = 4 * exp(x^2) * integral_x^inf (v - x)^2 exp(-v^2) dv,
///
/// the universal radial shape produced by integrating r^2 times a Gaussian
/// over the half line r >= 0. Strictly positive everywhere, w(0) = sqrt(pi),
/// grows like -2x as x -> -inf and decays like 1/x^3 as x -> +inf.
///
/// The defining expression cancels catastrophically for large positive x
/// (two O(x) terms leaving an O(1/x^3) residue), so for x >= 10 the value is
/// summed from its own asymptotic series
///
///     w(x) = 2x * sum_{n>=2} (-1)^n (2n-3)!! (2n-2) q^n,   q = 1/(2 x^2),
///
/// obtained by folding the erfcx expansion into the difference analytically.
double w_profile(double x);

/// Second moment of a (non-normalized) Gaussian over the half line:
///
///     integral_0^inf r^2 exp(-(r - a1)^2 / (2 a2^2)) dr
///   = a1 a2^2 exp(-a1^2/(2 a2^2))
///     + sqrt(pi/2) a2 (a1^2 + a2^2) (1 + erf(a1 / (sqrt(2) a2)))
///
/// For a1 < 0 the two terms cancel; that branch is evaluated with the shared
/// exponential factored out through erfcx, which keeps the subtraction
/// between quantities of comparable scale.
///
/// Throws std::domain_error if a2 <= 0.
double gauss_halfline_moment2(double a1, double a2);

/// Closed form of the radial profile integral
///
///     integral_0^inf r^2 * gauss1(r c1 + c2, sigma1)
///                        * gauss2(r c3 + c4, sigma2) dr
///   = exp(-c2^2/(2 sigma1^2) - |c4|^2/(2 sigma2^2))
///     * w_profile(t2) / (8 sqrt(2) pi^(3/2) sigma1 sigma2^2 t1^3)
///
/// with t1 = sqrt(c1^2/(2 sigma1^2) + |c3|^2/(2 sigma2^2)) the combined
/// radial decay rate and t2 = (c1 c2 / sigma1^2 + c3.c4 / sigma2^2) / (2 t1)
/// the normalized offset of the product Gaussian from the half-line origin.
/// This is the integral that turns a joint translation/linear-map pooling of
/// an oriented-gradient comb into the affine ("heat") descriptor integrand.
///
/// Throws std::domain_error if sigma1 <= 0, sigma2 <= 0, or t1 == 0 (the
/// profile direction is degenerate and the integral diverges).
double radial_profile_integral(double c1, double c2, double sigma1,
                               const std::array<double, 2>& c3,
                               const std::array<double, 2>& c4, double sigma2);

/// Scale-and-contrast pooled spatial weight, inner linearization only.
///
/// Pooling the SIFT spatial window over domain size s (log-scale, linearized
/// e^s ~ 1+s, Gaussian weight of std sigma_s) admits the closed form
///
///     [e^s gauss2(y - (1+s) x, sigma_d) * gauss1(., sigma_s)](s = 0)
///   = gauss2(y - x, sigma_d)
///     * gauss1(q, sigma_d/|x|)^(-1) * gauss1(q, sqrt(sigma_s^2 + sigma_d^2/|x|^2)),
///     q = 1 - (x.y + sigma_d^2) / |x|^2.
///
/// The two 1D factors are combined into a single exponential before
/// evaluation, since the inverse factor alone overflows when q is many
/// widths from the origin. For |x| < eps_x the pooled weight degenerates to
/// the plain window gauss2(y - x, sigma_d), which is also the sigma_s -> 0
/// limit.
double pooled_window_inner(const std::array<double, 2>& x,
                           const std::array<double, 2>& y, double sigma_d,
                           double sigma_s, double eps_x = 1e-6);

/// Scale-and-contrast pooled spatial weight, both factors linearized.
///
///     [(1+s) gauss2(y - (1+s) x, sigma_d) * gauss1(., sigma_s)](s = 0)
///   = (sigma_d^2 + sigma_s^2 x.y)
///     / (2 pi sigma_d (sigma_d^2 + sigma_s^2 |x|^2)^(3/2))
///     * exp(-(sigma_d^2 |y - x|^2 + sigma_s^2 (x.y_perp)^2)
///           / (2 sigma_d^2 (sigma_d^2 + sigma_s^2 |x|^2)))
///
/// where y_perp = (y2, -y1). Unlike the inner-linearized form this one is a
/// plain completed square — no inverse Gaussian — and it can go negative
/// when x.y < -sigma_d^2/sigma_s^2 (the linearized contrast factor changes
/// sign). At sigma_s = 0 it reduces to gauss2(y - x, sigma_d) exactly.
double pooled_window_both(const std::array<double, 2>& x,
                          const std::array<double, 2>& y, double sigma_d,
                          double sigma_s);

}  // namespace heatdesc
