// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// descriptors: assembly of the descriptor variants from the kernel layer —
// angular/spatial/scale/intensity pooling of gradient and intensity data on
// a sample lattice — plus raw binned densities and (de)serialization.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/descriptors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "json.hpp"

#include "heatdesc/kernels.hpp"

namespace heatdesc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

using nlohmann::json;

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

double resolved_sigma_r(const DescriptorParams& p) {
  require(p.n_beta_bins >= 2, "n_beta_bins must be at least 2");
  const double sigma_r = p.sigma_r == 0.0 ? kTwoPi / p.n_beta_bins : p.sigma_r;
  require(sigma_r > 0.0, "sigma_r must be positive");
  return sigma_r;
}

FieldGrid resolved_grid(const DescriptorParams& p) {
  if (p.grid.width == 0 && p.grid.height == 0) {
    return default_descriptor_grid(p.sigma_d0);
  }
  require(p.grid.width > 0 && p.grid.height > 0,
          "descriptor grid dimensions must be positive");
  require(p.grid.spacing > 0.0, "descriptor grid spacing must be positive");
  require(std::isfinite(p.grid.origin[0]) && std::isfinite(p.grid.origin[1]),
          "descriptor grid origin must be finite");
  return p.grid;
}

Vec2 grid_world(const FieldGrid& g, int ix, int iy) {
  return {g.origin[0] + g.spacing * ix, g.origin[1] + g.spacing * iy};
}

Descriptor make_base(DescriptorKind kind, const DescriptorParams& params,
                     const FieldGrid& grid, std::vector<double> centers) {
  Descriptor d;
  d.kind = kind;
  d.params = params;
  d.grid = grid;
  d.beta_centers = std::move(centers);
  d.values.assign(d.beta_centers.size() * static_cast<std::size_t>(grid.width) *
                      static_cast<std::size_t>(grid.height),
                  0.0);
  return d;
}

/// Gradients at every pixel center of the one-pixel-eroded interior, the
/// largest set where the central-difference stencil is defined. Fields
/// narrower than 3 pixels on either axis yield an empty set (and hence
/// all-zero gradient-based descriptors).
struct GradientSamples {
  std::vector<Vec2> pos;
  std::vector<double> gx, gy, mag, theta;
};

GradientSamples interior_gradients(const ScalarField& f) {
  GradientSamples out;
  if (f.width() < 3 || f.height() < 3) return out;
  const std::size_t n = static_cast<std::size_t>(f.width() - 2) * (f.height() - 2);
  out.pos.reserve(n);
  out.gx.reserve(n);
  out.gy.reserve(n);
  out.mag.reserve(n);
  out.theta.reserve(n);
  for (int iy = 1; iy + 1 < f.height(); ++iy) {
    for (int ix = 1; ix + 1 < f.width(); ++ix) {
      const Vec2 p = f.world(ix, iy);
      const GradientSample g = gradient(f, p);
      out.pos.push_back(p);
      out.gx.push_back(g.gx);
      out.gy.push_back(g.gy);
      out.mag.push_back(g.magnitude);
      out.theta.push_back(g.orientation);
    }
  }
  return out;
}

/// prof[b * ny + k] = angular kernel at (center_b - theta_k) times magnitude
/// and cell area: everything in the pooled integrand that does not depend on
/// the descriptor sample point.
std::vector<double> angular_profiles(const std::vector<double>& centers,
                                     const GradientSamples& g, double sigma_r,
                                     double area) {
  const std::size_t ny = g.mag.size();
  std::vector<double> prof(centers.size() * ny);
  for (std::size_t b = 0; b < centers.size(); ++b) {
    for (std::size_t k = 0; k < ny; ++k) {
      prof[b * ny + k] =
          gauss_periodic(centers[b] - g.theta[k], sigma_r) * g.mag[k] * area;
    }
  }
  return prof;
}

/// d(b, x) += sum_k prof[b][k] * window(x, y_k) for every lattice point x.
template <typename WindowFn>
void add_windowed(Descriptor& d, const std::vector<Vec2>& ypos,
                  const std::vector<double>& prof, WindowFn window) {
  const std::size_t ny = ypos.size();
  const std::size_t nb = d.beta_centers.size();
  std::vector<double> wrow(ny);
  for (int iy = 0; iy < d.grid.height; ++iy) {
    for (int ix = 0; ix < d.grid.width; ++ix) {
      const Vec2 x = grid_world(d.grid, ix, iy);
      for (std::size_t k = 0; k < ny; ++k) wrow[k] = window(x, ypos[k]);
      for (std::size_t b = 0; b < nb; ++b) {
        const double* pb = prof.data() + b * ny;
        double sum = 0.0;
        for (std::size_t k = 0; k < ny; ++k) sum += pb[k] * wrow[k];
        d.at(static_cast<int>(b), iy, ix) += sum;
      }
    }
  }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence (nodes are symmetric; only half are solved for).
std::vector<std::pair<double, double>> gauss_legendre(int n) {
  std::vector<std::pair<double, double>> nw(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double p1 = 1.0;
    double pp = 1.0;
    for (int iter = 0; iter < 64; ++iter) {
      p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double step = p1 / pp;
      z -= step;
      if (std::abs(step) < 1e-15) break;
    }
    nw[i] = {-z, 2.0 / ((1.0 - z * z) * pp * pp)};
    nw[n - 1 - i] = {z, nw[i].second};
  }
  return nw;
}

int bin_index(double angle, double bin_width, int n_bins) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  const int i = static_cast<int>(std::floor(r / bin_width));
  return std::clamp(i, 0, n_bins - 1);
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  out.append(buf, ptr);
}

json grid_to_json(const FieldGrid& g) {
  return json{{"width", g.width},
              {"height", g.height},
              {"spacing", g.spacing},
              {"origin", {g.origin[0], g.origin[1]}}};
}

FieldGrid grid_from_json(const json& j) {
  FieldGrid g;
  g.width = j.at("width").get<int>();
  g.height = j.at("height").get<int>();
  g.spacing = j.at("spacing").get<double>();
  g.origin[0] = j.at("origin").at(0).get<double>();
  g.origin[1] = j.at("origin").at(1).get<double>();
  return g;
}

json params_to_json(const DescriptorParams& p) {
  return json{{"sigma_r", p.sigma_r},
              {"sigma_d", p.sigma_d},
              {"sigma_d0", p.sigma_d0},
              {"sigma_s", p.sigma_s},
              {"sigma_a", p.sigma_a},
              {"sigma_l", p.sigma_l},
              {"n_beta_bins", p.n_beta_bins},
              {"n_levels", p.n_levels},
              {"n_scale_samples", p.n_scale_samples},
              {"eps_grad", p.eps_grad},
              {"full_heat_constant", p.full_heat_constant},
              {"grid", grid_to_json(p.grid)}};
}

DescriptorParams params_from_json(const json& j) {
  DescriptorParams p;
  p.sigma_r = j.at("sigma_r").get<double>();
  p.sigma_d = j.at("sigma_d").get<double>();
  p.sigma_d0 = j.at("sigma_d0").get<double>();
  p.sigma_s = j.at("sigma_s").get<double>();
  p.sigma_a = j.at("sigma_a").get<double>();
  p.sigma_l = j.at("sigma_l").get<double>();
  p.n_beta_bins = j.at("n_beta_bins").get<int>();
  p.n_levels = j.at("n_levels").get<int>();
  p.n_scale_samples = j.at("n_scale_samples").get<int>();
  p.eps_grad = j.at("eps_grad").get<double>();
  p.full_heat_constant = j.at("full_heat_constant").get<bool>();
  p.grid = grid_from_json(j.at("grid"));
  return p;
}

}  // namespace

std::string to_string(DescriptorKind kind) {
  switch (kind) {
    case DescriptorKind::Sift: return "SIFT";
    case DescriptorKind::DspSampled: return "DSP_SAMPLED";
    case DescriptorKind::DspClosedInner: return "DSP_CLOSED_INNER";
    case DescriptorKind::DspClosedBoth: return "DSP_CLOSED_BOTH";
    case DescriptorKind::Heat: return "HEAT";
    case DescriptorKind::Df: return "DF";
    case DescriptorKind::RawDensity: return "RAW_DENSITY";
  }
  throw std::invalid_argument("unknown descriptor kind");
}

DescriptorKind descriptor_kind_from_string(std::string_view name) {
  std::string upper(name);
  for (char& c : upper) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (upper == "SIFT") return DescriptorKind::Sift;
  if (upper == "DSP_SAMPLED") return DescriptorKind::DspSampled;
  if (upper == "DSP_CLOSED_INNER") return DescriptorKind::DspClosedInner;
  if (upper == "DSP_CLOSED_BOTH") return DescriptorKind::DspClosedBoth;
  if (upper == "HEAT") return DescriptorKind::Heat;
  if (upper == "DF") return DescriptorKind::Df;
  if (upper == "RAW_DENSITY") return DescriptorKind::RawDensity;
  throw std::invalid_argument("unknown descriptor kind: " + std::string(name));
}

FieldGrid default_descriptor_grid(double sigma_d0) {
  if (!(sigma_d0 > 0.0)) throw std::invalid_argument("sigma_d0 must be positive");
  return centered_grid(16, 16, 6.0 * sigma_d0 / 15.0);
}

std::vector<double> beta_bin_centers(int n_beta_bins) {
  if (n_beta_bins < 2) throw std::invalid_argument("n_beta_bins must be at least 2");
  std::vector<double> centers(n_beta_bins);
  const double width = kTwoPi / n_beta_bins;
  for (int i = 0; i < n_beta_bins; ++i) centers[i] = (i + 0.5) * width;
  return centers;
}

double raw_density(const ScalarField& patch, double beta, const Vec2& x,
                   const DescriptorParams& params) {
  require(params.n_beta_bins >= 2, "n_beta_bins must be at least 2");
  require(params.eps_grad >= 0.0, "eps_grad must be nonnegative");
  require(std::isfinite(beta), "beta must be finite");
  const GradientSample g = gradient(patch, x);
  if (g.magnitude < params.eps_grad) return 0.0;
  const double width = kTwoPi / params.n_beta_bins;
  if (bin_index(beta, width, params.n_beta_bins) !=
      bin_index(g.orientation, width, params.n_beta_bins)) {
    return 0.0;
  }
  return g.magnitude / width;
}

Descriptor raw_density_descriptor(const ScalarField& patch,
                                  const DescriptorParams& params) {
  require(params.eps_grad >= 0.0, "eps_grad must be nonnegative");
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::RawDensity, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const double width = kTwoPi / params.n_beta_bins;
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      const GradientSample g = gradient(patch, grid_world(grid, ix, iy));
      if (g.magnitude < params.eps_grad) continue;
      const int bin = bin_index(g.orientation, width, params.n_beta_bins);
      d.at(bin, iy, ix) = g.magnitude / width;
    }
  }
  return d;
}

Descriptor sift(const ScalarField& field, const DescriptorParams& params) {
  const double sigma_r = resolved_sigma_r(params);
  require(params.sigma_d > 0.0, "sigma_d must be positive");
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::Sift, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const GradientSamples g = interior_gradients(field);
  const double area = field.spacing() * field.spacing();
  const std::vector<double> prof = angular_profiles(d.beta_centers, g, sigma_r, area);
  const double sigma_d = params.sigma_d;
  add_windowed(d, g.pos, prof, [sigma_d](const Vec2& x, const Vec2& y) {
    return gauss2(y[0] - x[0], y[1] - x[1], sigma_d);
  });
  return d;
}

Descriptor dsp_sampled(const ScalarField& field, const DescriptorParams& params) {
  const double sigma_r = resolved_sigma_r(params);
  require(params.sigma_s > 0.0, "sigma_s must be positive for sampled scale pooling");
  require(params.n_scale_samples >= 3, "n_scale_samples must be at least 3");
  const double lo = std::max(params.sigma_d0 - 3.0 * params.sigma_s, 0.0);
  const double hi = params.sigma_d0 + 3.0 * params.sigma_s;
  if (!(hi > 0.0)) {
    throw std::domain_error(
        "scale-pooling window does not intersect the positive scale axis");
  }
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::DspSampled, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const GradientSamples g = interior_gradients(field);
  const double area = field.spacing() * field.spacing();
  const std::vector<double> prof = angular_profiles(d.beta_centers, g, sigma_r, area);

  // Map the [-1, 1] quadrature nodes onto the clipped scale interval; weight
  // each scale by the pooling Gaussian and normalize the discrete weights to
  // unit mass so clipping (and the quadrature itself) never rescales the
  // descriptor — in particular sigma_s -> 0 reproduces sift at sigma_d0.
  const auto nodes = gauss_legendre(params.n_scale_samples);
  std::vector<double> scales(nodes.size()), weights(nodes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    scales[i] = lo + 0.5 * (nodes[i].first + 1.0) * (hi - lo);
    weights[i] = 0.5 * (hi - lo) * nodes[i].second *
                 gauss1(scales[i] - params.sigma_d0, params.sigma_s);
    total += weights[i];
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double sigma_i = scales[i];
    const double weight = weights[i] / total;
    add_windowed(d, g.pos, prof, [sigma_i, weight](const Vec2& x, const Vec2& y) {
      return weight * gauss2(y[0] - x[0], y[1] - x[1], sigma_i);
    });
  }
  return d;
}

Descriptor dsp_closed_inner(const ScalarField& field, const DescriptorParams& params) {
  const double sigma_r = resolved_sigma_r(params);
  require(params.sigma_d > 0.0, "sigma_d must be positive");
  require(params.sigma_s >= 0.0, "sigma_s must be nonnegative");
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::DspClosedInner, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const GradientSamples g = interior_gradients(field);
  const double area = field.spacing() * field.spacing();
  const std::vector<double> prof = angular_profiles(d.beta_centers, g, sigma_r, area);
  const double sigma_d = params.sigma_d;
  const double sigma_s = params.sigma_s;
  add_windowed(d, g.pos, prof, [sigma_d, sigma_s](const Vec2& x, const Vec2& y) {
    return pooled_window_inner(x, y, sigma_d, sigma_s);
  });
  return d;
}

Descriptor dsp_closed_both(const ScalarField& field, const DescriptorParams& params) {
  const double sigma_r = resolved_sigma_r(params);
  require(params.sigma_d > 0.0, "sigma_d must be positive");
  require(params.sigma_s >= 0.0, "sigma_s must be nonnegative");
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::DspClosedBoth, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const GradientSamples g = interior_gradients(field);
  const double area = field.spacing() * field.spacing();
  const std::vector<double> prof = angular_profiles(d.beta_centers, g, sigma_r, area);
  const double sigma_d = params.sigma_d;
  const double sigma_s = params.sigma_s;
  add_windowed(d, g.pos, prof, [sigma_d, sigma_s](const Vec2& x, const Vec2& y) {
    return pooled_window_both(x, y, sigma_d, sigma_s);
  });
  return d;
}

double heat_integrand_scalar(const Vec2& x, const Vec2& y, double beta, double gx,
                             double gy, double sigma_d, double sigma_a) {
  if (!(sigma_d > 0.0)) throw std::domain_error("sigma_d must be positive");
  if (!(sigma_a > 0.0)) throw std::domain_error("sigma_a must be positive");
  const double mag_sq = gx * gx + gy * gy;
  if (!(mag_sq > 0.0)) throw std::domain_error("gradient magnitude must be positive");
  const double mag = std::sqrt(mag_sq);
  const double nx = gx / mag;
  const double ny = gy / mag;
  const double vx = std::cos(beta);
  const double vy = std::sin(beta);
  const double yn = y[0] * nx + y[1] * ny;
  const double xv = x[0] * vx + x[1] * vy;
  const double nv = nx * vx + ny * vy;
  const double var_d = 2.0 * sigma_d * sigma_d;
  const double var_a = 2.0 * sigma_a * sigma_a;
  // t scales as 1/mag; pulling tau = t * mag out makes the magnitude
  // dependence explicit: 1/(mag^2 t^3) = mag/tau^3 and the w argument loses
  // its magnitude factor entirely.
  const double tau = std::sqrt(xv * xv / var_d + 1.0 / var_a);
  const double warg = -(yn * xv * 2.0 / var_d + nv * 2.0 / var_a) / (2.0 * tau);
  return std::exp(-yn * yn / var_d) * w_profile(warg) * mag / (tau * tau * tau);
}

Descriptor heat(const ScalarField& field, const DescriptorParams& params) {
  require(params.n_beta_bins >= 2, "n_beta_bins must be at least 2");
  require(params.sigma_d > 0.0, "sigma_d must be positive");
  require(params.sigma_a > 0.0, "sigma_a must be positive");
  require(params.eps_grad > 0.0,
          "eps_grad must be positive: the integrand divides by the magnitude");
  const FieldGrid grid = resolved_grid(params);
  Descriptor d = make_base(DescriptorKind::Heat, params, grid,
                           beta_bin_centers(params.n_beta_bins));
  const GradientSamples g = interior_gradients(field);
  const double area = field.spacing() * field.spacing();
  const double var_d = 2.0 * params.sigma_d * params.sigma_d;
  const double var_a = 2.0 * params.sigma_a * params.sigma_a;
  const double sigma_d_sq = params.sigma_d * params.sigma_d;
  const double sigma_a_sq = params.sigma_a * params.sigma_a;

  // Per-pixel precomputation, restricted to magnitudes above the floor:
  // the unit gradient n, the projection y.n, and exp(-(y.n)^2/(2 sd^2)) * mag
  // (the magnitude factor of 1/(mag^2 t^3) after tau = t * mag).
  std::vector<Vec2> pos;
  std::vector<double> nx, ny, ynd, emag;
  for (std::size_t k = 0; k < g.pos.size(); ++k) {
    if (g.mag[k] < params.eps_grad) continue;
    pos.push_back(g.pos[k]);
    const double inv_mag = 1.0 / g.mag[k];
    const double unit_x = g.gx[k] * inv_mag;
    const double unit_y = g.gy[k] * inv_mag;
    nx.push_back(unit_x);
    ny.push_back(unit_y);
    const double yn = g.pos[k][0] * unit_x + g.pos[k][1] * unit_y;
    ynd.push_back(yn * 2.0 / var_d);
    emag.push_back(std::exp(-yn * yn / var_d) * g.mag[k]);
  }
  const std::size_t ny_count = pos.size();
  const std::size_t nb = d.beta_centers.size();

  // n.v(beta) / sigma_a^2 for every (beta, pixel) pair.
  std::vector<double> cosb(nb), sinb(nb);
  std::vector<double> nv(nb * ny_count);
  for (std::size_t b = 0; b < nb; ++b) {
    cosb[b] = std::cos(d.beta_centers[b]);
    sinb[b] = std::sin(d.beta_centers[b]);
    for (std::size_t k = 0; k < ny_count; ++k) {
      nv[b * ny_count + k] = (nx[k] * cosb[b] + ny[k] * sinb[b]) / sigma_a_sq;
    }
  }

  std::vector<double> perp(ny_count);
  for (int iy = 0; iy < grid.height; ++iy) {
    for (int ix = 0; ix < grid.width; ++ix) {
      const Vec2 x = grid_world(grid, ix, iy);
      const double sigma_perp =
          std::sqrt(sigma_d_sq + sigma_a_sq * (x[0] * x[0] + x[1] * x[1]));
      for (std::size_t k = 0; k < ny_count; ++k) {
        // n^T (x - y)_perp with (a, b)_perp = (b, -a).
        const double arg =
            nx[k] * (x[1] - pos[k][1]) - ny[k] * (x[0] - pos[k][0]);
        perp[k] = gauss1(arg, sigma_perp);
      }
      for (std::size_t b = 0; b < nb; ++b) {
        const double xv = x[0] * cosb[b] + x[1] * sinb[b];
        const double tau = std::sqrt(xv * xv / var_d + 1.0 / var_a);
        const double half_inv_tau = 0.5 / tau;
        const double* nvb = nv.data() + b * ny_count;
        double sum = 0.0;
        for (std::size_t k = 0; k < ny_count; ++k) {
          const double warg = -(ynd[k] * xv + nvb[k]) * half_inv_tau;
          sum += emag[k] * w_profile(warg) * perp[k];
        }
        d.at(static_cast<int>(b), iy, ix) = sum * area / (tau * tau * tau);
      }
    }
  }

  if (params.full_heat_constant) {
    const double constant =
        std::exp(-1.0 / var_a) /
        (8.0 * std::sqrt(2.0) * std::pow(kPi, 1.5) * params.sigma_d * sigma_a_sq);
    for (double& v : d.values) v *= constant;
  }
  return d;
}

Descriptor df(const ScalarField& field, const DescriptorParams& params) {
  require(params.sigma_l > 0.0, "sigma_l must be positive");
  require(params.sigma_d > 0.0, "sigma_d must be positive");
  require(params.n_levels >= 2, "n_levels must be at least 2");
  const FieldGrid grid = resolved_grid(params);
  std::vector<double> levels(params.n_levels);
  for (int i = 0; i < params.n_levels; ++i) {
    levels[i] = static_cast<double>(i) / (params.n_levels - 1);
  }
  Descriptor d = make_base(DescriptorKind::Df, params, grid, std::move(levels));

  // Intensity pooling needs no gradients, so every pixel contributes.
  const std::size_t n = static_cast<std::size_t>(field.width()) * field.height();
  std::vector<Vec2> pos;
  pos.reserve(n);
  std::vector<double> value;
  value.reserve(n);
  for (int iy = 0; iy < field.height(); ++iy) {
    for (int ix = 0; ix < field.width(); ++ix) {
      pos.push_back(field.world(ix, iy));
      value.push_back(field.at(ix, iy));
    }
  }
  const double area = field.spacing() * field.spacing();
  const std::size_t nl = d.beta_centers.size();
  std::vector<double> prof(nl * n);
  for (std::size_t l = 0; l < nl; ++l) {
    for (std::size_t k = 0; k < n; ++k) {
      prof[l * n + k] = gauss1(d.beta_centers[l] - value[k], params.sigma_l) * area;
    }
  }
  const double sigma_d = params.sigma_d;
  add_windowed(d, pos, prof, [sigma_d](const Vec2& x, const Vec2& y) {
    return gauss2(y[0] - x[0], y[1] - x[1], sigma_d);
  });
  return d;
}

std::array<double, 16> alignment_rotation(const Vec2& g, const Vec2& x) {
  const double g1 = g[0], g2 = g[1];
  const double x1 = x[0], x2 = x[1];
  if (g1 == 0.0 || g2 == 0.0 || x1 == 0.0 || x2 == 0.0) {
    throw std::domain_error(
        "alignment_rotation: every component of g and x must be nonzero");
  }
  const auto sgn = [](double v) { return v > 0.0 ? 1.0 : -1.0; };
  const double inv = 1.0 / (std::hypot(g1, g2) * std::hypot(x1, x2));
  return {
      inv * g2 * x2 * sgn(g1 * x1), inv * -g2 * std::abs(x1) * sgn(g1),
      inv * -x2 * std::abs(g1) * sgn(x1), inv * std::abs(g1 * x1),
      inv * -g1 * x2 * sgn(g2 * x1), inv * g1 * std::abs(x1) * sgn(g2),
      inv * -x2 * std::abs(g2) * sgn(x1), inv * std::abs(g2 * x1),
      inv * -g2 * x1 * sgn(g1 * x2), inv * -g2 * std::abs(x2) * sgn(g1),
      inv * x1 * std::abs(g1) * sgn(x2), inv * std::abs(g1 * x2),
      inv * g1 * x1 * sgn(g2 * x2), inv * g1 * std::abs(x2) * sgn(g2),
      inv * x1 * std::abs(g2) * sgn(x2), inv * std::abs(g2 * x2),
  };
}

Descriptor compute_descriptor(DescriptorKind kind, const ScalarField& field,
                              const DescriptorParams& params) {
  switch (kind) {
    case DescriptorKind::Sift: return sift(field, params);
    case DescriptorKind::DspSampled: return dsp_sampled(field, params);
    case DescriptorKind::DspClosedInner: return dsp_closed_inner(field, params);
    case DescriptorKind::DspClosedBoth: return dsp_closed_both(field, params);
    case DescriptorKind::Heat: return heat(field, params);
    case DescriptorKind::Df: return df(field, params);
    case DescriptorKind::RawDensity: return raw_density_descriptor(field, params);
  }
  throw std::invalid_argument("unknown descriptor kind");
}

std::string descriptor_header_json(const Descriptor& d) {
  const json j{{"kind", to_string(d.kind)},
               {"params", params_to_json(d.params)},
               {"grid", grid_to_json(d.grid)},
               {"beta_centers", d.beta_centers},
               {"payload",
                {{"dtype", "float32"},
                 {"byte_order", "little"},
                 {"order", "[beta][y][x]"},
                 {"count", d.values.size()}}}};
  return j.dump(2) + "\n";
}

std::vector<unsigned char> descriptor_payload(const Descriptor& d) {
  std::vector<unsigned char> bytes;
  bytes.reserve(d.values.size() * 4);
  for (const double v : d.values) {
    const float f = static_cast<float>(v);
    std::uint32_t u = 0;
    std::memcpy(&u, &f, sizeof(u));
    bytes.push_back(static_cast<unsigned char>(u & 0xFF));
    bytes.push_back(static_cast<unsigned char>((u >> 8) & 0xFF));
    bytes.push_back(static_cast<unsigned char>((u >> 16) & 0xFF));
    bytes.push_back(static_cast<unsigned char>((u >> 24) & 0xFF));
  }
  return bytes;
}

Descriptor descriptor_from_parts(std::string_view header_json,
                                 const std::vector<unsigned char>& payload) {
  json j;
  try {
    j = json::parse(header_json);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("descriptor header is not valid JSON: ") +
                                e.what());
  }
  Descriptor d;
  std::size_t count = 0;
  try {
    d.kind = descriptor_kind_from_string(j.at("kind").get<std::string>());
    d.params = params_from_json(j.at("params"));
    d.grid = grid_from_json(j.at("grid"));
    d.beta_centers = j.at("beta_centers").get<std::vector<double>>();
    count = j.at("payload").at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("descriptor header is malformed: ") +
                                e.what());
  }
  if (d.grid.width <= 0 || d.grid.height <= 0 || d.beta_centers.empty()) {
    throw std::invalid_argument("descriptor header has empty dimensions");
  }
  const std::size_t expected = d.beta_centers.size() *
                               static_cast<std::size_t>(d.grid.width) *
                               static_cast<std::size_t>(d.grid.height);
  if (count != expected) {
    throw std::invalid_argument("descriptor header count does not match its shape");
  }
  if (payload.size() != 4 * count) {
    throw std::runtime_error("descriptor payload size does not match the header");
  }
  d.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t u = static_cast<std::uint32_t>(payload[4 * i]) |
                            (static_cast<std::uint32_t>(payload[4 * i + 1]) << 8) |
                            (static_cast<std::uint32_t>(payload[4 * i + 2]) << 16) |
                            (static_cast<std::uint32_t>(payload[4 * i + 3]) << 24);
    float f = 0.0f;
    std::memcpy(&f, &u, sizeof(f));
    d.values[i] = static_cast<double>(f);
  }
  return d;
}

void save_descriptor(const Descriptor& d, const std::string& header_path,
                     const std::string& payload_path) {
  {
    std::ofstream out(header_path, std::ios::binary);
    out << descriptor_header_json(d);
    if (!out) throw std::runtime_error("failed to write " + header_path);
  }
  const std::vector<unsigned char> bytes = descriptor_payload(d);
  std::ofstream out(payload_path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed to write " + payload_path);
}

Descriptor load_descriptor(const std::string& header_path,
                           const std::string& payload_path) {
  std::ifstream header(header_path, std::ios::binary);
  if (!header) throw std::runtime_error("failed to open " + header_path);
  std::string header_text((std::istreambuf_iterator<char>(header)),
                          std::istreambuf_iterator<char>());
  std::ifstream payload(payload_path, std::ios::binary);
  if (!payload) throw std::runtime_error("failed to open " + payload_path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(payload)),
                                   std::istreambuf_iterator<char>());
  return descriptor_from_parts(header_text, bytes);
}

std::string descriptor_csv(const Descriptor& d) {
  std::string out = "beta,y,x,value\n";
  const std::size_t nb = d.beta_centers.size();
  for (std::size_t b = 0; b < nb; ++b) {
    for (int iy = 0; iy < d.grid.height; ++iy) {
      for (int ix = 0; ix < d.grid.width; ++ix) {
        const Vec2 x = grid_world(d.grid, ix, iy);
        append_number(out, d.beta_centers[b]);
        out.push_back(',');
        append_number(out, x[1]);
        out.push_back(',');
        append_number(out, x[0]);
        out.push_back(',');
        append_number(out, d.at(static_cast<int>(b), iy, ix));
        out.push_back('\n');
      }
    }
  }
  return out;
}

}  // namespace heatdesc
