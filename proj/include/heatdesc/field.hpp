// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// field: discretized scalar images on world-coordinate grids, bilinear
// sampling, finite-difference gradients, and the geometric warps the
// descriptors and the matching energy are built on.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heatdesc {

/// 2-vector in world coordinates (units of x).
using Vec2 = std::array<double, 2>;

/// Error raised by the PGM parser. `byte_offset()` reports where in the
/// input buffer the problem was detected, and the offset is repeated in the
/// what() message ("... at byte N").
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t byte_offset);

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

/// Placement of a pixel grid in world coordinates: `origin` is the world
/// position of pixel (0, 0) and pixel (i, j) sits at
///
///     (origin[0] + i * spacing, origin[1] + j * spacing),
///
/// with the column index i advancing along world x and the row index j
/// advancing along world y.
struct FieldGrid {
  int width = 0;
  int height = 0;
  double spacing = 1.0;
  Vec2 origin{0.0, 0.0};
};

/// Grid placement whose pixel lattice is centered on the world origin:
/// origin = -spacing * ((width-1)/2, (height-1)/2). Keypoint-centered
/// patches use this throughout.
FieldGrid centered_grid(int width, int height, double spacing = 1.0);

/// A scalar image f: X -> [0, 1] sampled on a regular grid. X is the
/// axis-aligned rectangle spanned by the pixel centers,
///
///     [origin_x, origin_x + (width-1) * spacing] x
///     [origin_y, origin_y + (height-1) * spacing],
///
/// which is the domain all continuous-integral approximations in this
/// library restrict themselves to. Values are stored row-major
/// (index = j * width + i) and are immutable after construction; every
/// operation on a ScalarField is read-only and thread-safe.
///
/// The constructors validate all invariants (positive dimensions and
/// spacing, values.size() == width * height, every value inside [0, 1]) and
/// throw std::invalid_argument on violation.
class ScalarField {
 public:
  /// Field on an explicit grid placement.
  ScalarField(const FieldGrid& grid, std::vector<double> values);

  /// Field on a centered grid (see centered_grid).
  ScalarField(int width, int height, std::vector<double> values,
              double spacing = 1.0);

  int width() const noexcept { return grid_.width; }
  int height() const noexcept { return grid_.height; }
  double spacing() const noexcept { return grid_.spacing; }
  const Vec2& origin() const noexcept { return grid_.origin; }
  const FieldGrid& grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Stored value at pixel (ix, iy); indices are not range-checked.
  double at(int ix, int iy) const noexcept {
    return values_[static_cast<std::size_t>(iy) * grid_.width + ix];
  }

  /// World coordinates of the center of pixel (ix, iy).
  Vec2 world(int ix, int iy) const noexcept {
    return {grid_.origin[0] + ix * grid_.spacing,
            grid_.origin[1] + iy * grid_.spacing};
  }

 private:
  FieldGrid grid_;
  std::vector<double> values_;
};

/// Result of sampling a field at a world point: `inside` is false when the
/// point lies outside the domain rectangle X, in which case `value` is 0.
struct SampleResult {
  double value = 0.0;
  bool inside = false;
};

/// Bilinear interpolation of `field` at world point `p`. Queries at pixel
/// centers reproduce the stored values exactly; queries outside X return
/// {0, false} rather than extrapolating, matching the convention that all
/// spatial integrals are restricted to X.
SampleResult sample_bilinear(const ScalarField& field, const Vec2& p);

/// Image gradient sample: components, magnitude = sqrt(gx^2 + gy^2), and
/// orientation = atan2(gy, gx) reduced to [0, 2*pi).
struct GradientSample {
  double gx = 0.0;
  double gy = 0.0;
  double magnitude = 0.0;
  double orientation = 0.0;
};

/// Central-difference gradient of the bilinearly interpolated field at world
/// point `p`, with step h equal to one pixel spacing:
///
///     gx = (f(p + h e1) - f(p - h e1)) / (2 h),   and likewise gy.
///
/// `p` must lie inside the domain eroded by one pixel so that both stencil
/// points stay inside X; throws std::domain_error for points in the
/// one-pixel border (or outside), which also rejects fields narrower than
/// three pixels along a queried axis. No sigma-proportional pre-blur is
/// applied: descriptors take f as given.
GradientSample gradient(const ScalarField& field, const Vec2& p);

/// Similarity transform tau(x) = e^s * R_alpha * x + b, with R_alpha the
/// counterclockwise rotation by alpha radians in the (x, y) world frame.
struct SimilarityTransform {
  double alpha = 0.0;  ///< rotation angle, radians
  double s = 0.0;      ///< log-scale (unitless)
  Vec2 b{0.0, 0.0};    ///< translation, units of x

  Vec2 apply(const Vec2& x) const;

  /// Exact inverse as a SimilarityTransform:
  /// tau^-1(y) = e^-s R_-alpha (y - b). Composing apply with
  /// inverse().apply returns the argument to within roundoff.
  SimilarityTransform inverse() const;
};

/// General affine transform tau(x) = A x + b. A is stored row-major
/// [a00, a01, a10, a11]. Construction does not require invertibility; warp
/// checks det(A) != 0 at call time.
struct AffineTransform {
  std::array<double, 4> A{1.0, 0.0, 0.0, 1.0};
  Vec2 b{0.0, 0.0};

  Vec2 apply(const Vec2& x) const;
  double det() const noexcept { return A[0] * A[3] - A[1] * A[2]; }

  static AffineTransform from_similarity(const SimilarityTransform& t);
};

/// A warped field together with its coverage mask: coverage[j * width + i]
/// is 1 where the warped sample fell inside the source domain and 0 where
/// the output pixel had to be filled with 0.
struct WarpResult {
  ScalarField field;
  std::vector<std::uint8_t> coverage;
};

/// Resample `field` under `t` onto the grid `out_spec`: the output pixel at
/// world x stores sample_bilinear(field, t(x)), i.e. the result represents
/// f o tau on the new grid. Out-of-domain samples are 0 and recorded in the
/// coverage mask. Throws std::domain_error if t is singular (affine only;
/// a similarity is always invertible).
WarpResult warp(const ScalarField& field, const AffineTransform& t,
                const FieldGrid& out_spec);
WarpResult warp(const ScalarField& field, const SimilarityTransform& t,
                const FieldGrid& out_spec);

/// Parse a PGM image (plain "P2" or binary "P5", maxval <= 65535) into a
/// ScalarField with intensities divided by maxval, spacing 1.0, and the
/// origin placed so the image center is the world origin. Header comments
/// ('#' to end of line) are honored anywhere whitespace may appear in the
/// header and within a P2 raster. Throws ParseError (with byte offset) on
/// malformed input: bad magic, missing or out-of-range header fields,
/// samples exceeding maxval, or a truncated raster.
ScalarField load_pgm(std::string_view bytes);

/// Serialize to a plain-text PGM ("P2") with the given maxval, quantizing
/// each value to round(value * maxval). Grid placement is not stored; PGM
/// round-trips recenter the origin. Throws std::domain_error if maxval is
/// outside [1, 65535].
std::string to_pgm(const ScalarField& field, int maxval = 255);

/// Serialize values as CSV, one image row per line, full double precision.
std::string to_csv(const ScalarField& field);

}  // namespace heatdesc
