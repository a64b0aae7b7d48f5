// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// field implementation: grid bookkeeping, bilinear sampling, central
// differences, similarity/affine warps, and PGM/CSV (de)serialization.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <utility>

namespace heatdesc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Pixel-space coordinates within this distance of an integer are snapped
// onto it before interpolation. World coordinates of pixel centers are
// usually recomputed by callers as origin + index * spacing, which can land
// an ulp away from the stored lattice; snapping keeps grid-point queries
// bit-exact reproductions of the stored values.
constexpr double kGridSnap = 1e-9;

double snap_to_lattice(double u) {
  const double r = std::round(u);
  return std::abs(u - r) < kGridSnap ? r : u;
}

}  // namespace

ParseError::ParseError(const std::string& message, std::size_t byte_offset)
    : std::runtime_error(message + " at byte " + std::to_string(byte_offset)),
      byte_offset_(byte_offset) {}

FieldGrid centered_grid(int width, int height, double spacing) {
  FieldGrid grid;
  grid.width = width;
  grid.height = height;
  grid.spacing = spacing;
  grid.origin = {-spacing * (width - 1) / 2.0, -spacing * (height - 1) / 2.0};
  return grid;
}

ScalarField::ScalarField(const FieldGrid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (grid_.width <= 0 || grid_.height <= 0) {
    throw std::invalid_argument("ScalarField: width and height must be positive, got " +
                                std::to_string(grid_.width) + "x" + std::to_string(grid_.height));
  }
  if (!(grid_.spacing > 0.0)) {
    throw std::invalid_argument("ScalarField: spacing must be positive, got " +
                                std::to_string(grid_.spacing));
  }
  const std::size_t expected =
      static_cast<std::size_t>(grid_.width) * static_cast<std::size_t>(grid_.height);
  if (values_.size() != expected) {
    throw std::invalid_argument("ScalarField: expected " + std::to_string(expected) +
                                " values, got " + std::to_string(values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0 && values_[i] <= 1.0)) {  // also rejects NaN
      throw std::invalid_argument("ScalarField: value at index " + std::to_string(i) +
                                  " is outside [0, 1]");
    }
  }
}

ScalarField::ScalarField(int width, int height, std::vector<double> values, double spacing)
    : ScalarField(centered_grid(width, height, spacing), std::move(values)) {}

SampleResult sample_bilinear(const ScalarField& field, const Vec2& p) {
  const FieldGrid& g = field.grid();
  const double u = snap_to_lattice((p[0] - g.origin[0]) / g.spacing);
  const double v = snap_to_lattice((p[1] - g.origin[1]) / g.spacing);
  if (!(u >= 0.0 && u <= g.width - 1 && v >= 0.0 && v <= g.height - 1)) {
    return {0.0, false};
  }
  // Clamp the base cell so boundary queries (u == width-1) and degenerate
  // one-pixel axes still index a valid 2x2 neighborhood.
  const int i0 = std::max(0, std::min(static_cast<int>(u), g.width - 2));
  const int j0 = std::max(0, std::min(static_cast<int>(v), g.height - 2));
  const int i1 = std::min(i0 + 1, g.width - 1);
  const int j1 = std::min(j0 + 1, g.height - 1);
  const double fu = u - i0;
  const double fv = v - j0;
  const double value = (1.0 - fu) * (1.0 - fv) * field.at(i0, j0) +
                       fu * (1.0 - fv) * field.at(i1, j0) +
                       (1.0 - fu) * fv * field.at(i0, j1) +
                       fu * fv * field.at(i1, j1);
  return {value, true};
}

GradientSample gradient(const ScalarField& field, const Vec2& p) {
  const FieldGrid& g = field.grid();
  const double u = (p[0] - g.origin[0]) / g.spacing;
  const double v = (p[1] - g.origin[1]) / g.spacing;
  // Domain eroded by one pixel, so both central-difference stencil points
  // stay inside X. Fields narrower than three pixels have no interior.
  if (!(u >= 1.0 - kGridSnap && u <= g.width - 2 + kGridSnap &&
        v >= 1.0 - kGridSnap && v <= g.height - 2 + kGridSnap)) {
    throw std::domain_error(
        "gradient: query point lies in the one-pixel border or outside the field domain");
  }
  const double h = g.spacing;
  const double fxp = sample_bilinear(field, {p[0] + h, p[1]}).value;
  const double fxm = sample_bilinear(field, {p[0] - h, p[1]}).value;
  const double fyp = sample_bilinear(field, {p[0], p[1] + h}).value;
  const double fym = sample_bilinear(field, {p[0], p[1] - h}).value;
  GradientSample out;
  out.gx = (fxp - fxm) / (2.0 * h);
  out.gy = (fyp - fym) / (2.0 * h);
  out.magnitude = std::hypot(out.gx, out.gy);
  out.orientation = std::atan2(out.gy, out.gx);
  if (out.orientation < 0.0) out.orientation += kTwoPi;
  if (out.orientation >= kTwoPi) out.orientation = 0.0;
  return out;
}

Vec2 SimilarityTransform::apply(const Vec2& x) const {
  const double c = std::cos(alpha);
  const double sn = std::sin(alpha);
  const double scale = std::exp(s);
  return {scale * (c * x[0] - sn * x[1]) + b[0],
          scale * (sn * x[0] + c * x[1]) + b[1]};
}

SimilarityTransform SimilarityTransform::inverse() const {
  // tau^-1(y) = e^-s R_-alpha (y - b), so the inverse translation is
  // -e^-s R_-alpha b.
  const double c = std::cos(alpha);
  const double sn = std::sin(alpha);
  const double scale = std::exp(-s);
  SimilarityTransform inv;
  inv.alpha = -alpha;
  inv.s = -s;
  inv.b = {-scale * (c * b[0] + sn * b[1]), -scale * (-sn * b[0] + c * b[1])};
  return inv;
}

Vec2 AffineTransform::apply(const Vec2& x) const {
  return {A[0] * x[0] + A[1] * x[1] + b[0], A[2] * x[0] + A[3] * x[1] + b[1]};
}

AffineTransform AffineTransform::from_similarity(const SimilarityTransform& t) {
  const double c = std::cos(t.alpha);
  const double sn = std::sin(t.alpha);
  const double scale = std::exp(t.s);
  AffineTransform out;
  out.A = {scale * c, -scale * sn, scale * sn, scale * c};
  out.b = t.b;
  return out;
}

WarpResult warp(const ScalarField& field, const AffineTransform& t, const FieldGrid& out_spec) {
  if (t.det() == 0.0) {
    throw std::domain_error("warp: transform is singular (det(A) == 0)");
  }
  const std::size_t n =
      static_cast<std::size_t>(out_spec.width) * static_cast<std::size_t>(out_spec.height);
  std::vector<double> values(n, 0.0);
  std::vector<std::uint8_t> coverage(n, 0);
  for (int j = 0; j < out_spec.height; ++j) {
    for (int i = 0; i < out_spec.width; ++i) {
      const Vec2 x = {out_spec.origin[0] + i * out_spec.spacing,
                      out_spec.origin[1] + j * out_spec.spacing};
      const SampleResult s = sample_bilinear(field, t.apply(x));
      const std::size_t idx = static_cast<std::size_t>(j) * out_spec.width + i;
      // Bilinear weights sum to 1 only up to roundoff; clamp so the [0, 1]
      // codomain invariant survives resampling of extremal values.
      values[idx] = std::clamp(s.value, 0.0, 1.0);
      coverage[idx] = s.inside ? 1 : 0;
    }
  }
  return {ScalarField(out_spec, std::move(values)), std::move(coverage)};
}

WarpResult warp(const ScalarField& field, const SimilarityTransform& t, const FieldGrid& out_spec) {
  return warp(field, AffineTransform::from_similarity(t), out_spec);
}

namespace {

bool pgm_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Minimal tokenizer over a PGM buffer. Tracks the byte position for error
// reporting; '#' starts a comment running to end of line wherever
// whitespace is allowed.
class PgmReader {
 public:
  PgmReader(std::string_view buf, std::size_t pos) : buf_(buf), pos_(pos) {}

  std::size_t pos() const noexcept { return pos_; }
  std::size_t last_token_pos() const noexcept { return last_token_pos_; }

  void skip_space_and_comments() {
    for (;;) {
      while (pos_ < buf_.size() && pgm_space(buf_[pos_])) ++pos_;
      if (pos_ < buf_.size() && buf_[pos_] == '#') {
        while (pos_ < buf_.size() && buf_[pos_] != '\n') ++pos_;
        continue;
      }
      return;
    }
  }

  unsigned long read_uint(const char* what) {
    skip_space_and_comments();
    if (pos_ >= buf_.size()) {
      throw ParseError(std::string("unexpected end of input while reading ") + what, pos_);
    }
    const char first = buf_[pos_];
    if (first < '0' || first > '9') {
      throw ParseError(std::string("expected unsigned integer for ") + what, pos_);
    }
    last_token_pos_ = pos_;
    unsigned long value = 0;
    while (pos_ < buf_.size() && buf_[pos_] >= '0' && buf_[pos_] <= '9') {
      value = value * 10 + static_cast<unsigned long>(buf_[pos_] - '0');
      if (value > 1000000000UL) {
        throw ParseError(std::string(what) + " is out of range", last_token_pos_);
      }
      ++pos_;
    }
    return value;
  }

 private:
  std::string_view buf_;
  std::size_t pos_ = 0;
  std::size_t last_token_pos_ = 0;
};

}  // namespace

ScalarField load_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5')) {
    throw ParseError("not a PGM image: expected magic \"P2\" or \"P5\"", 0);
  }
  const bool binary = bytes[1] == '5';
  PgmReader reader(bytes, 2);

  const unsigned long width = reader.read_uint("width");
  if (width == 0) throw ParseError("width must be positive", reader.last_token_pos());
  const unsigned long height = reader.read_uint("height");
  if (height == 0) throw ParseError("height must be positive", reader.last_token_pos());
  const unsigned long maxval = reader.read_uint("maxval");
  if (maxval < 1 || maxval > 65535) {
    throw ParseError("maxval must be in [1, 65535]", reader.last_token_pos());
  }
  const std::size_t pixel_count = static_cast<std::size_t>(width) * height;
  if (pixel_count > (1UL << 26)) {
    throw ParseError("image dimensions are unreasonably large", reader.last_token_pos());
  }

  std::vector<double> values(pixel_count);
  // Normalize by direct division: sample/maxval is correctly rounded, so
  // quantized exports (k/maxval) round-trip bit-exactly.
  const double maxval_d = static_cast<double>(maxval);

  if (!binary) {
    for (std::size_t i = 0; i < pixel_count; ++i) {
      const unsigned long sample = reader.read_uint("pixel sample");
      if (sample > maxval) {
        throw ParseError("pixel sample " + std::to_string(sample) + " exceeds maxval " +
                             std::to_string(maxval),
                         reader.last_token_pos());
      }
      values[i] = static_cast<double>(sample) / maxval_d;
    }
  } else {
    if (reader.pos() >= bytes.size() || !pgm_space(bytes[reader.pos()])) {
      throw ParseError("expected a single whitespace byte between maxval and the P5 raster",
                       reader.pos());
    }
    const std::size_t data_start = reader.pos() + 1;
    const std::size_t bytes_per_sample = maxval < 256 ? 1 : 2;
    const std::size_t need = pixel_count * bytes_per_sample;
    if (bytes.size() - data_start < need) {
      throw ParseError("truncated P5 raster: expected " + std::to_string(need) +
                           " bytes, found " + std::to_string(bytes.size() - data_start),
                       bytes.size());
    }
    for (std::size_t i = 0; i < pixel_count; ++i) {
      const std::size_t at = data_start + i * bytes_per_sample;
      unsigned long sample = static_cast<unsigned char>(bytes[at]);
      if (bytes_per_sample == 2) {  // two-byte samples are most-significant-byte first
        sample = (sample << 8) | static_cast<unsigned char>(bytes[at + 1]);
      }
      if (sample > maxval) {
        throw ParseError("pixel sample " + std::to_string(sample) + " exceeds maxval " +
                             std::to_string(maxval),
                         at);
      }
      values[i] = static_cast<double>(sample) / maxval_d;
    }
  }

  return ScalarField(static_cast<int>(width), static_cast<int>(height), std::move(values));
}

std::string to_pgm(const ScalarField& field, int maxval) {
  if (maxval < 1 || maxval > 65535) {
    throw std::domain_error("to_pgm: maxval must be in [1, 65535], got " + std::to_string(maxval));
  }
  std::string out = "P2\n";
  out += std::to_string(field.width()) + " " + std::to_string(field.height()) + "\n";
  out += std::to_string(maxval) + "\n";
  // Plain PGM recommends lines no longer than 70 characters; wrap tokens.
  std::size_t line_length = 0;
  for (int j = 0; j < field.height(); ++j) {
    for (int i = 0; i < field.width(); ++i) {
      long q = std::lround(field.at(i, j) * maxval);
      q = std::clamp(q, 0L, static_cast<long>(maxval));
      const std::string token = std::to_string(q);
      if (line_length > 0 && line_length + 1 + token.size() > 70) {
        out += '\n';
        line_length = 0;
      }
      if (line_length > 0) {
        out += ' ';
        ++line_length;
      }
      out += token;
      line_length += token.size();
    }
    if (line_length > 0) {
      out += '\n';
      line_length = 0;
    }
  }
  return out;
}

std::string to_csv(const ScalarField& field) {
  std::string out;
  char buf[32];
  for (int j = 0; j < field.height(); ++j) {
    for (int i = 0; i < field.width(); ++i) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), field.at(i, j));
      (void)ec;  // shortest round-trip form of a double always fits 32 chars
      out.append(buf, ptr);
      out += (i + 1 < field.width()) ? ',' : '\n';
    }
  }
  return out;
}

}  // namespace heatdesc
