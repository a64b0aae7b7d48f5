// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// descriptors: the six descriptor variants as sampled functions h(beta, x) on
// an orientation x spatial grid — the plain pooled form, scale pooling by
// numerical sampling, two closed-form scale-pooling approximations, the
// affine-diffusion ("heat") form, and intensity distribution fields — plus
// the raw binned density used for templates, and (de)serialization.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "heatdesc/field.hpp"

namespace heatdesc {

/// Descriptor families. The *values* of a descriptor are nonnegative for
/// Sift, DspSampled, Df, RawDensity, and Heat (their integrands are products
/// of positive factors); the closed-form scale-pooling variants may be
/// signed (their pooled window carries a factor that can change sign).
enum class DescriptorKind {
  Sift,
  DspSampled,
  DspClosedInner,
  DspClosedBoth,
  Heat,
  Df,
  RawDensity,
};

/// Canonical serialized spelling, e.g. "DSP_CLOSED_INNER".
std::string to_string(DescriptorKind kind);

/// Inverse of to_string; throws std::invalid_argument on unknown names.
DescriptorKind descriptor_kind_from_string(std::string_view name);

/// Parameters shared by all descriptor variants. Each variant validates the
/// subset it uses and throws std::invalid_argument on violations.
struct DescriptorParams {
  /// Angular pooling std in radians. 0 means "derive from the bin count":
  /// 2*pi/n_beta_bins, the conventional choice for 8 bins.
  double sigma_r = 0.0;
  /// Spatial pooling std, in units of x.
  double sigma_d = 1.5;
  /// Nominal domain size: the center of the scale-pooling window used by the
  /// sampled variant.
  double sigma_d0 = 1.5;
  /// Scale-pooling std. The sampled variant treats it in units of sigma_d;
  /// the closed-form variants inherit their source formulas' dimensionless
  /// (log-scale) convention. No computation mixes the two.
  double sigma_s = 0.5;
  /// Affine-diffusion std (heat variant only).
  double sigma_a = 0.5;
  /// Intensity-pooling std (distribution fields only).
  double sigma_l = 0.1;
  /// Orientation bins; bin i covers [i*d, (i+1)*d) with d = 2*pi/n_beta_bins
  /// and has center (i + 0.5)*d.
  int n_beta_bins = 8;
  /// Intensity levels for distribution fields: l in {0, 1/(n-1), ..., 1}.
  int n_levels = 16;
  /// Quadrature nodes for the sampled scale pooling.
  int n_scale_samples = 9;
  /// Gradient magnitude floor: pixels below it contribute nothing to the
  /// raw density and are excluded from the heat integrand (which divides by
  /// the squared magnitude).
  double eps_grad = 1e-6;
  /// When set, the heat values carry the full closed-form normalization
  /// 1/(8 sqrt(2) pi^{3/2} sigma_d sigma_a^2) * exp(-1/(2 sigma_a^2))
  /// instead of dropping those constants. Matching by argmax is invariant
  /// to the choice; default off.
  bool full_heat_constant = false;
  /// Spatial sample lattice. A default-constructed grid (width 0) selects
  /// the standard 16x16 lattice spanning [-3*sigma_d0, 3*sigma_d0]^2.
  FieldGrid grid{};
};

/// The standard descriptor lattice: 16x16 samples whose extreme rows and
/// columns sit at +-3*sigma_d0.
FieldGrid default_descriptor_grid(double sigma_d0);

/// Orientation bin centers (i + 0.5) * 2*pi/n for i = 0..n-1.
std::vector<double> beta_bin_centers(int n_beta_bins);

/// A sampled descriptor h indexed [beta_bin][grid_y][grid_x]. For Df the
/// first axis is the (non-periodic) intensity-level axis and beta_centers
/// holds the level values.
struct Descriptor {
  DescriptorKind kind = DescriptorKind::Sift;
  DescriptorParams params;
  FieldGrid grid;                     ///< resolved spatial lattice
  std::vector<double> beta_centers;   ///< orientation bin centers, or levels
  std::vector<double> values;         ///< [beta][y][x], row-major spatially

  double at(int beta, int iy, int ix) const noexcept {
    return values[(static_cast<std::size_t>(beta) * grid.height + iy) * grid.width + ix];
  }
  double& at(int beta, int iy, int ix) noexcept {
    return values[(static_cast<std::size_t>(beta) * grid.height + iy) * grid.width + ix];
  }
};

/// Raw binned gradient-orientation density of `patch` at a single (beta, x):
/// the gradient at x is hard-assigned to the orientation bin containing it,
/// scaled by magnitude / bin_width; zero when the magnitude is below
/// eps_grad or when beta falls in a different bin. x must be interior to the
/// patch domain (one-pixel erosion), as required by the gradient stencil.
double raw_density(const ScalarField& patch, double beta, const Vec2& x,
                   const DescriptorParams& params);

/// raw_density evaluated over the full (beta-center, grid) lattice.
Descriptor raw_density_descriptor(const ScalarField& patch, const DescriptorParams& params);

/// Orientation-pooled descriptor: for each (beta, x), the Riemann sum over
/// the field's interior pixels y of
///
///     gauss_periodic(beta - angle(grad f(y)), sigma_r)
///       * gauss2(y - x, sigma_d) * |grad f(y)| * spacing^2.
Descriptor sift(const ScalarField& field, const DescriptorParams& params);

/// Scale pooling by numerical quadrature: Gauss-Legendre sampling of
/// sigma_d over [sigma_d0 - 3 sigma_s, sigma_d0 + 3 sigma_s] intersected
/// with (0, inf), each sift evaluation weighted by
/// gauss1(sigma_d - sigma_d0, sigma_s) times its quadrature weight; the
/// discrete weights are normalized to unit mass so the sigma_s -> 0 limit
/// reproduces sift at sigma_d0 exactly. Throws std::domain_error when the
/// clipped interval is empty.
Descriptor dsp_sampled(const ScalarField& field, const DescriptorParams& params);

/// Closed-form scale pooling, inner linearization: the spatial window
/// gauss2(y - x, sigma_d) is replaced by the pooled window that integrates
/// e^s * gauss2(y - (1+s) x, sigma_d) against gauss1(s, sigma_s) in closed
/// form (pooled_window_inner). Sample points with |x| below the window's
/// eps_x floor fall back to the plain window, the exact x -> 0 limit.
Descriptor dsp_closed_inner(const ScalarField& field, const DescriptorParams& params);

/// Closed-form scale pooling with both occurrences of the scale linearized
/// (pooled_window_both). The pooled window can be negative where
/// x . y < -sigma_d^2/sigma_s^2, so this descriptor is signed.
Descriptor dsp_closed_both(const ScalarField& field, const DescriptorParams& params);

/// Affine-diffusion descriptor: for each (beta, x), the Riemann sum over
/// interior pixels y with |grad f(y)| >= eps_grad of
///
///     heat_integrand_scalar(x, y, beta, grad f(y), sigma_d, sigma_a)
///       * gauss1(grad f(y)^T (x - y)_perp / |grad f(y)|,
///                sqrt(sigma_d^2 + sigma_a^2 |x|^2)) * spacing^2,
///
/// where (a, b)_perp = (b, -a). Every factor is positive, so values are
/// nonnegative; see full_heat_constant for the normalization choice.
Descriptor heat(const ScalarField& field, const DescriptorParams& params);

/// The scalar fraction of the affine-diffusion integrand at one (x, y, beta)
/// triple with gradient (gx, gy):
///
///     exp(-(y^T n)^2 / (2 sigma_d^2)) * w(-(n^T (y x^T / sigma_d^2
///         + I / sigma_a^2) v(beta) / |g|) / (2 t)) / (|g|^2 t^3),
///
/// with n = g/|g| and t^2 = (x^T v(beta))^2 / (2 sigma_d^2 |g|^2)
/// + 1 / (2 sigma_a^2 |g|^2). Exposed so the assembly can be validated
/// against the closed-form half-line integral it is derived from.
double heat_integrand_scalar(const Vec2& x, const Vec2& y, double beta,
                             double gx, double gy, double sigma_d, double sigma_a);

/// Orthogonal change of basis on vectorized 2x2 linear maps
/// a = (a11, a12, a21, a22) that decouples the joint gradient/position
/// Gaussian product gauss1(a^T g + c) * gauss2(A x + d) into independent 1D
/// factors, which is what makes the affine-diffusion integrand reduce to
/// the half-line profile integral. Returned row-major; R^T R = R R^T = I
/// holds exactly up to rounding. The construction divides by |g| |x| and
/// takes signs of every component, so it requires g1, g2, x1, x2 all
/// nonzero; otherwise throws std::domain_error.
std::array<double, 16> alignment_rotation(const Vec2& g, const Vec2& x);

/// Distribution-field descriptor over intensity levels: for each (l, x),
/// the Riemann sum over all pixels y of
/// gauss1(l - f(y), sigma_l) * gauss2(y - x, sigma_d) * spacing^2. The
/// first descriptor axis holds the n_levels levels (non-periodic).
Descriptor df(const ScalarField& field, const DescriptorParams& params);

/// Dispatch by kind (RawDensity routes to raw_density_descriptor).
Descriptor compute_descriptor(DescriptorKind kind, const ScalarField& field,
                              const DescriptorParams& params);

/// JSON header describing a descriptor: kind, params, grid, beta_centers,
/// and the payload layout.
std::string descriptor_header_json(const Descriptor& d);

/// Payload bytes: IEEE float32, little-endian, [beta][y][x] order.
std::vector<unsigned char> descriptor_payload(const Descriptor& d);

/// Parse a header + payload pair back into a Descriptor (values are float32
/// precision). Throws std::invalid_argument on malformed headers and
/// std::runtime_error on payload size mismatches.
Descriptor descriptor_from_parts(std::string_view header_json,
                                 const std::vector<unsigned char>& payload);

/// Write/read the file pair. The header is JSON text; the payload is raw
/// float32 bytes. Throws std::runtime_error on I/O failure.
void save_descriptor(const Descriptor& d, const std::string& header_path,
                     const std::string& payload_path);
Descriptor load_descriptor(const std::string& header_path, const std::string& payload_path);

/// CSV export for plotting: header line "beta,y,x,value", then one row per
/// cell in [beta][y][x] order with world coordinates.
std::string descriptor_csv(const Descriptor& d);

}  // namespace heatdesc
