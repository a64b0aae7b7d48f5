// Field-layer tests: grid placement, PGM parsing, bilinear sampling,
// finite-difference gradients, and similarity/affine warps.
//
// Methodology: interpolation and warp identities are checked against exact
// hand-computed cases (grid points, translations by whole pixels, analytic
// ramps); differential properties (chain rule, orientation equivariance) are
// checked on smooth synthetic fields at tolerances dominated by the bilinear
// and central-difference truncation error; parser errors are checked for
// both the exception type and the reported byte offset.
//
// SPDX-License-Identifier: MIT

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatdesc/field.hpp"

using namespace heatdesc;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Builds a field by evaluating f(x, y) at the pixel centers of a centered
// grid. The callable must land inside [0, 1].
template <typename F>
ScalarField make_synthetic(int width, int height, double spacing, F&& f) {
  const FieldGrid grid = centered_grid(width, height, spacing);
  std::vector<double> values(static_cast<std::size_t>(width) * height);
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i < width; ++i) {
      const double x = grid.origin[0] + i * spacing;
      const double y = grid.origin[1] + j * spacing;
      values[static_cast<std::size_t>(j) * width + i] = f(x, y);
    }
  }
  return ScalarField(grid, std::move(values));
}

// Absolute difference of two angles on the circle, in [0, pi].
double circular_diff(double a, double b) {
  return std::abs(std::remainder(a - b, kTwoPi));
}

}  // namespace

TEST_CASE("ScalarField validates invariants and centers its grid") {
  const ScalarField f(5, 3, std::vector<double>(15, 0.25), 0.5);
  CHECK(f.width() == 5);
  CHECK(f.height() == 3);
  CHECK(f.spacing() == 0.5);
  // Centered placement: origin = -spacing * ((w-1)/2, (h-1)/2).
  CHECK(f.origin()[0] == -1.0);
  CHECK(f.origin()[1] == -0.5);
  CHECK(f.at(2, 1) == 0.25);
  const Vec2 c = f.world(2, 1);
  CHECK(c[0] == 0.0);
  CHECK(c[1] == 0.0);

  CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>(3, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(0, 2, std::vector<double>(0)), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>(4, 0.0), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>(4, -0.1)), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>(4, 1.1)), std::invalid_argument);
  CHECK_THROWS_AS(ScalarField(2, 2, std::vector<double>{0.0, 0.5, 1.0, std::nan("")}),
                  std::invalid_argument);
}

TEST_CASE("load_pgm parses plain P2 with normalization and centered origin") {
  const ScalarField f = load_pgm("P2\n2 2\n255\n0 255 128 64\n");
  REQUIRE(f.width() == 2);
  REQUIRE(f.height() == 2);
  CHECK(f.values()[0] == 0.0);
  CHECK(f.values()[1] == 1.0);
  CHECK(f.values()[2] == doctest::Approx(0.50196).epsilon(1e-4));
  CHECK(f.values()[3] == doctest::Approx(0.25098).epsilon(1e-4));
  CHECK(f.values()[2] == doctest::Approx(128.0 / 255.0).epsilon(1e-14));
  CHECK(f.spacing() == 1.0);
  CHECK(f.origin()[0] == -0.5);
  CHECK(f.origin()[1] == -0.5);
}

TEST_CASE("load_pgm parses binary P5 identically to its P2 equivalent") {
  const ScalarField plain = load_pgm("P2\n2 2\n255\n0 255 128 64\n");
  std::string raw = "P5\n2 2\n255\n";
  raw.push_back(static_cast<char>(0));
  raw.push_back(static_cast<char>(255));
  raw.push_back(static_cast<char>(128));
  raw.push_back(static_cast<char>(64));
  const ScalarField binary = load_pgm(raw);
  REQUIRE(binary.width() == plain.width());
  REQUIRE(binary.height() == plain.height());
  for (std::size_t i = 0; i < plain.values().size(); ++i) {
    CHECK(binary.values()[i] == plain.values()[i]);  // bitwise: same division path
  }
}

TEST_CASE("load_pgm reads two-byte P5 samples most-significant-byte first") {
  std::string raw = "P5 1 1 65535 ";
  raw.back() = '\n';
  raw.push_back(static_cast<char>(0x12));
  raw.push_back(static_cast<char>(0x34));
  const ScalarField f = load_pgm(raw);
  CHECK(f.values()[0] == doctest::Approx(double(0x1234) / 65535.0).epsilon(1e-14));
}

TEST_CASE("load_pgm honors comments and arbitrary whitespace in the header") {
  const ScalarField f = load_pgm(
      "P2 # magic comment\n"
      "# a full-line comment\n"
      "  2\t1 # dimensions\n"
      "255\n"
      "# raster comment\n"
      " 128\n255 ");
  REQUIRE(f.width() == 2);
  REQUIRE(f.height() == 1);
  CHECK(f.values()[0] == doctest::Approx(128.0 / 255.0).epsilon(1e-14));
  CHECK(f.values()[1] == 1.0);
}

TEST_CASE("load_pgm reports parse errors with byte offsets") {
  // Wrong magic: rejected at offset 0.
  CHECK_THROWS_AS(load_pgm("P3\n1 1\n255\n0\n"), ParseError);
  try {
    load_pgm("P3\n1 1\n255\n0\n");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() == 0);
    CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
  }

  // Truncated binary raster: reported at the end of the buffer.
  const std::string truncated = std::string("P5\n2 2\n255\n") + "\x01\x02";
  try {
    load_pgm(truncated);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() == truncated.size());
  }

  // Plain sample exceeding maxval: reported at the offending token.
  const std::string over = "P2\n2 1\n100\n5 101\n";
  try {
    load_pgm(over);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.byte_offset() == over.find("101"));
  }

  // Binary sample exceeding maxval (possible whenever maxval < 255).
  std::string over5 = "P5\n1 1\n100\n";
  over5.push_back(static_cast<char>(200));
  CHECK_THROWS_AS(load_pgm(over5), ParseError);

  // Header runs out of tokens.
  CHECK_THROWS_AS(load_pgm("P2\n2"), ParseError);
  // Non-numeric token where a number is required.
  CHECK_THROWS_AS(load_pgm("P2\nx 2\n255\n0 0\n"), ParseError);
  // Degenerate and out-of-range header values.
  CHECK_THROWS_AS(load_pgm("P2\n0 2\n255\n"), ParseError);
  CHECK_THROWS_AS(load_pgm("P2\n1 1\n0\n0\n"), ParseError);
  CHECK_THROWS_AS(load_pgm("P2\n1 1\n70000\n0\n"), ParseError);
  CHECK_THROWS_AS(load_pgm(""), ParseError);
}

TEST_CASE("sample_bilinear reproduces grid points and interpolates midpoints") {
  // Row 0 holds {0, 0}, row 1 holds {1, 1}.
  const ScalarField f(2, 2, std::vector<double>{0.0, 0.0, 1.0, 1.0});
  for (int j = 0; j < 2; ++j) {
    for (int i = 0; i < 2; ++i) {
      const SampleResult s = sample_bilinear(f, f.world(i, j));
      CHECK(s.inside);
      CHECK(s.value == f.at(i, j));  // exact interpolation identity
    }
  }
  // Center of the four pixels: average of {0, 0, 1, 1}.
  const SampleResult mid = sample_bilinear(f, {0.0, 0.0});
  CHECK(mid.inside);
  CHECK(mid.value == 0.5);

  // Far outside the domain rectangle: zero with the outside flag.
  const SampleResult out = sample_bilinear(f, {10.5, 0.0});
  CHECK_FALSE(out.inside);
  CHECK(out.value == 0.0);

  // Domain boundary is inclusive.
  CHECK(sample_bilinear(f, {0.5, 0.5}).inside);
  CHECK(sample_bilinear(f, {0.5, 0.5}).value == 1.0);
}

TEST_CASE("sample_bilinear supports one-pixel-tall fields on their axis line") {
  // Degenerate vertical extent: the domain is the segment y == 0.
  const ScalarField f(5, 1, std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  const SampleResult on = sample_bilinear(f, {-1.0, 0.0});
  CHECK(on.inside);
  CHECK(on.value == 0.25);
  const SampleResult half = sample_bilinear(f, {-0.5, 0.0});
  CHECK(half.inside);
  CHECK(half.value == doctest::Approx(0.375).epsilon(1e-15));
  CHECK_FALSE(sample_bilinear(f, {0.0, 0.5}).inside);
}

TEST_CASE("gradient recovers linear ramps exactly and flags the border") {
  const ScalarField fx = make_synthetic(11, 11, 0.25, [](double x, double) {
    return 0.5 + 0.1 * x;
  });
  const GradientSample gx = gradient(fx, {0.3, -0.2});
  CHECK(gx.gx == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(std::abs(gx.gy) < 1e-9);
  CHECK(gx.magnitude == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(circular_diff(gx.orientation, 0.0) < 1e-8);

  const ScalarField fy = make_synthetic(11, 11, 0.25, [](double, double y) {
    return 0.5 + 0.1 * y;
  });
  const GradientSample gy = gradient(fy, {0.1, 0.4});
  CHECK(circular_diff(gy.orientation, kPi / 2.0) < 1e-8);
  CHECK(gy.magnitude == doctest::Approx(0.1).epsilon(1e-9));

  const ScalarField flat(7, 7, std::vector<double>(49, 0.5));
  const GradientSample g0 = gradient(flat, {0.0, 0.0});
  CHECK(g0.magnitude == 0.0);

  // One-pixel border and points outside are rejected.
  CHECK_THROWS_AS(gradient(fx, {-1.25, 0.0}), std::domain_error);  // on the edge column
  CHECK_THROWS_AS(gradient(fx, {50.0, 0.0}), std::domain_error);
  // A field with no interior (fewer than 3 pixels across) always rejects.
  const ScalarField tiny(2, 2, std::vector<double>(4, 0.5));
  CHECK_THROWS_AS(gradient(tiny, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("gradient samples satisfy the magnitude and orientation invariants") {
  const ScalarField f = make_synthetic(41, 41, 0.2, [](double x, double y) {
    return 0.5 + 0.25 * std::sin(0.9 * x) * std::cos(0.7 * y);
  });
  std::mt19937_64 rng(0x5851f42d4c957f2dULL);
  std::uniform_real_distribution<double> coord(-3.5, 3.5);
  for (int k = 0; k < 200; ++k) {
    const Vec2 p = {coord(rng), coord(rng)};
    const GradientSample g = gradient(f, p);
    CHECK(std::abs(g.magnitude - std::sqrt(g.gx * g.gx + g.gy * g.gy)) <= 1e-12);
    CHECK(g.orientation >= 0.0);
    CHECK(g.orientation < kTwoPi);
    CHECK(circular_diff(g.orientation, std::atan2(g.gy, g.gx)) <= 1e-12);
  }
}

TEST_CASE("SimilarityTransform applies e^s R_alpha x + b and inverts exactly") {
  const SimilarityTransform t{kPi / 2.0, std::log(2.0), {1.0, 0.0}};
  const Vec2 y = t.apply({1.0, 0.0});
  // e^s = 2, R_{pi/2} (1,0) = (0,1): maps to (1, 2).
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y[1] == doctest::Approx(2.0).epsilon(1e-15));

  std::mt19937_64 rng(0x9b97f4a7c15f3d4eULL);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> logs(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-5.0, 5.0);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const SimilarityTransform tr{angle(rng), logs(rng), {shift(rng), shift(rng)}};
    const SimilarityTransform inv = tr.inverse();
    const Vec2 x = {coord(rng), coord(rng)};
    const Vec2 rt = inv.apply(tr.apply(x));
    CHECK(std::abs(rt[0] - x[0]) <= 1e-12);
    CHECK(std::abs(rt[1] - x[1]) <= 1e-12);
    const Vec2 rt2 = tr.apply(inv.apply(x));
    CHECK(std::abs(rt2[0] - x[0]) <= 1e-12);
    CHECK(std::abs(rt2[1] - x[1]) <= 1e-12);
  }
}

TEST_CASE("similarity action scales norms and shifts angles exactly") {
  // || e^s R x || = e^s ||x|| and angle(e^s R_alpha x) = alpha + angle(x):
  // the two identities every rotation-equivariance argument rests on.
  std::mt19937_64 rng(0x2d99787926d46932ULL);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> logs(-1.5, 1.5);
  std::uniform_real_distribution<double> coord(-10.0, 10.0);
  for (int k = 0; k < 200; ++k) {
    const SimilarityTransform tr{angle(rng), logs(rng), {0.0, 0.0}};
    const Vec2 x = {coord(rng), coord(rng)};
    if (std::hypot(x[0], x[1]) < 1e-3) continue;
    const Vec2 y = tr.apply(x);
    const double expected_norm = std::exp(tr.s) * std::hypot(x[0], x[1]);
    CHECK(std::abs(std::hypot(y[0], y[1]) - expected_norm) <=
          1e-12 * std::max(1.0, expected_norm));
    CHECK(circular_diff(std::atan2(y[1], y[0]), tr.alpha + std::atan2(x[1], x[0])) <= 1e-12);
  }
}

TEST_CASE("AffineTransform matches its similarity specialization") {
  std::mt19937_64 rng(0x7f4a7c159e3779b9ULL);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  std::uniform_real_distribution<double> logs(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-3.0, 3.0);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const SimilarityTransform tr{angle(rng), logs(rng), {shift(rng), shift(rng)}};
    const AffineTransform a = AffineTransform::from_similarity(tr);
    // det(e^s R) = e^{2s} — always nonsingular.
    CHECK(a.det() == doctest::Approx(std::exp(2.0 * tr.s)).epsilon(1e-12));
    const Vec2 x = {coord(rng), coord(rng)};
    const Vec2 ys = tr.apply(x);
    const Vec2 ya = a.apply(x);
    CHECK(std::abs(ys[0] - ya[0]) <= 1e-12);
    CHECK(std::abs(ys[1] - ya[1]) <= 1e-12);
  }
}

TEST_CASE("warp under the identity reproduces the field") {
  const ScalarField f = make_synthetic(17, 13, 0.5, [](double x, double y) {
    return 0.5 + 0.2 * std::sin(x) * std::cos(y);
  });
  const WarpResult w = warp(f, SimilarityTransform{}, f.grid());
  REQUIRE(w.field.width() == f.width());
  REQUIRE(w.field.height() == f.height());
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    CHECK(std::abs(w.field.values()[i] - f.values()[i]) <= 1e-12);
    CHECK(w.coverage[i] == 1);
  }
}

TEST_CASE("warp by one grid spacing shifts pixels exactly and masks the vacated edge") {
  const ScalarField f = make_synthetic(9, 7, 0.5, [](double x, double y) {
    return 0.5 + 0.11 * std::sin(1.3 * x + 0.4 * y);
  });
  SimilarityTransform t;
  t.b = {f.spacing(), 0.0};  // output(x) = f(x + spacing e1): content shifts left
  const WarpResult w = warp(f, t, f.grid());
  for (int j = 0; j < f.height(); ++j) {
    for (int i = 0; i < f.width(); ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * f.width() + i;
      if (i + 1 < f.width()) {
        CHECK(w.field.at(i, j) == f.at(i + 1, j));  // interior pixels exact
        CHECK(w.coverage[idx] == 1);
      } else {
        CHECK(w.field.at(i, j) == 0.0);
        CHECK(w.coverage[idx] == 0);
      }
    }
  }
}

TEST_CASE("warp round trip through a similarity recovers the interior") {
  const ScalarField f = make_synthetic(33, 33, 1.0, [](double x, double y) {
    return 0.5 + 0.3 * std::sin(0.35 * x) * std::sin(0.28 * y);
  });
  const SimilarityTransform t{0.3, 0.1, {0.6, -0.4}};
  // Large intermediate canvas so the inverse pass reads only covered pixels.
  const WarpResult fwd = warp(f, t, centered_grid(97, 97, 1.0));
  const WarpResult back = warp(fwd.field, t.inverse(), f.grid());
  for (int j = 9; j < 24; ++j) {
    for (int i = 9; i < 24; ++i) {
      CHECK(std::abs(back.field.at(i, j) - f.at(i, j)) <= 2e-2);
    }
  }
}

TEST_CASE("warped gradients obey the similarity chain rule") {
  // For g = f o tau with tau(x) = e^s R_alpha x + b:
  // grad g(x) = e^s R_alpha^T [grad f](tau(x)), checked at 5e-3 relative —
  // the tolerance is dominated by bilinear/central-difference truncation.
  const ScalarField f = make_synthetic(241, 241, 0.05, [](double x, double y) {
    return 0.5 + 0.25 * std::sin(0.5 * x) * std::cos(0.35 * y);
  });
  const SimilarityTransform t{0.4, 0.15, {0.3, 0.2}};
  const WarpResult g = warp(f, t, f.grid());
  const double c = std::cos(t.alpha);
  const double sn = std::sin(t.alpha);
  const double scale = std::exp(t.s);
  for (double px : {-1.5, -0.4, 0.7, 1.8}) {
    for (double py : {-1.7, 0.2, 1.3}) {
      const GradientSample gg = gradient(g.field, {px, py});
      const GradientSample gf = gradient(f, t.apply({px, py}));
      // e^s R^T grad f: R^T = [[c, sn], [-sn, c]].
      const double ex = scale * (c * gf.gx + sn * gf.gy);
      const double ey = scale * (-sn * gf.gx + c * gf.gy);
      const double err = std::hypot(gg.gx - ex, gg.gy - ey);
      const double ref = std::hypot(ex, ey);
      REQUIRE(ref > 1e-3);  // keep the relative comparison meaningful
      CHECK(err / ref <= 5e-3);
    }
  }
}

TEST_CASE("rotating a radial ramp shifts gradient orientations by the rotation angle") {
  const ScalarField f = make_synthetic(81, 81, 0.25, [](double x, double y) {
    return 0.2 + 0.03 * std::hypot(x, y);
  });
  const double alpha = 0.7;
  // Rotating the image content by alpha means sampling the source at
  // R_{-alpha} x.
  const SimilarityTransform t{-alpha, 0.0, {0.0, 0.0}};
  const WarpResult g = warp(f, t, f.grid());
  for (double r : {4.0, 5.0, 6.0}) {
    for (int k = 0; k < 16; ++k) {
      const double phi = kTwoPi * (k + 0.37) / 16.0;
      const Vec2 p = {r * std::cos(phi), r * std::sin(phi)};
      const GradientSample gw = gradient(g.field, p);
      const GradientSample gs = gradient(f, t.apply(p));
      CHECK(circular_diff(gw.orientation, gs.orientation + alpha) <= 1e-2);
      // For this radial image the warped orientation also equals the angle
      // of the query point itself.
      CHECK(circular_diff(gw.orientation, phi) <= 1e-2);
    }
  }
}

TEST_CASE("warp rejects singular affine transforms") {
  const ScalarField f(4, 4, std::vector<double>(16, 0.5));
  AffineTransform t;
  t.A = {1.0, 2.0, 2.0, 4.0};  // rank 1
  CHECK_THROWS_AS(warp(f, t, f.grid()), std::domain_error);
}

TEST_CASE("PGM export round-trips quantized values and wraps long lines") {
  std::vector<double> values(16 * 3);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<double>((7 * i + 3) % 256) / 255.0;
  }
  const ScalarField f(16, 3, values);
  const std::string text = to_pgm(f, 255);
  CHECK(text.rfind("P2\n16 3\n255\n", 0) == 0);
  for (std::size_t start = 0, end = 0; end != std::string::npos; start = end + 1) {
    end = text.find('\n', start);
    const std::size_t len = (end == std::string::npos ? text.size() : end) - start;
    CHECK(len <= 70);
    if (end == std::string::npos) break;
  }
  const ScalarField back = load_pgm(text);
  REQUIRE(back.width() == f.width());
  REQUIRE(back.height() == f.height());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(back.values()[i] == f.values()[i]);  // k/255 quantization is exact
  }
  CHECK_THROWS_AS(to_pgm(f, 0), std::domain_error);
  CHECK_THROWS_AS(to_pgm(f, 100000), std::domain_error);
}

TEST_CASE("CSV export emits one image row per line at full precision") {
  const ScalarField f(3, 2, std::vector<double>{0.0, 0.125, 1.0, 0.5, 0.2517293, 0.75});
  const std::string csv = to_csv(f);
  CHECK(csv == "0,0.125,1\n0.5,0.2517293,0.75\n");
}
