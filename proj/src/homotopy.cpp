// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// homotopy: cost-landscape diffusion, the continuation minimizer, and the
// 1D two-template toy matching problem.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/homotopy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "heatdesc/kernels.hpp"
#include "heatdesc/matching.hpp"

namespace heatdesc {

namespace {

void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void append_number(std::string& out, long v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
  return v;
}

void check_domain(const ScalarField& s, double lo, double hi,
                  const char* what) {
  if (s.height() != 1) {
    throw std::invalid_argument(std::string(what) +
                                " must be a height-1 signal");
  }
  const double x0 = s.origin()[0];
  const double x1 = x0 + (s.width() - 1) * s.spacing();
  if (std::abs(x0 - lo) > 1e-6 || std::abs(x1 - hi) > 1e-6) {
    throw std::invalid_argument(std::string(what) +
                                " is not sampled on the expected domain");
  }
}

/// E_k(theta): squared residual of the theta-shifted signal against the
/// template, as a length-weighted Riemann sum over the template's samples.
/// intensity_energy weights by the squared grid spacing (an area element);
/// one factor of the spacing converts that to the 1D line integral.
double template_energy(const ScalarField& f, const ScalarField& p,
                       double theta) {
  SimilarityTransform shift;
  shift.b = {-theta, 0.0};
  return intensity_energy(f, p, shift) / p.spacing();
}

double combine_cost(double c1, double e1, double e2, double lambda) {
  const double pen = c1 * (1.0 - c1);
  return c1 * c1 * e1 + (1.0 - c1) * (1.0 - c1) * e2 + lambda * pen * pen;
}

void require_cost_grid(const CostGrid& grid) {
  if (grid.c1_axis.size() < 2 || grid.theta_axis.size() < 2) {
    throw std::invalid_argument("cost grid needs at least 2 samples per axis");
  }
  if (grid.values.size() != grid.c1_axis.size() * grid.theta_axis.size()) {
    throw std::invalid_argument("cost grid value count does not match axes");
  }
}

std::vector<double> gaussian_taps(double step, double sigma) {
  const int radius =
      std::max(1, static_cast<int>(std::ceil(6.0 * sigma / step)));
  std::vector<double> taps(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = gauss1(k * step, sigma);
    total += taps[k + radius];
  }
  for (double& t : taps) t /= total;
  return taps;
}

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return p1 + 0.5 * t *
                  (p2 - p0 +
                   t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                        t * (3.0 * (p1 - p2) + p3 - p0)));
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

/// Expands a bracket outward from x0 in the descending direction (doubling
/// steps, clamped to [lo, hi]) and stops at the first rise, so the interval
/// handed to the golden-section search stays inside the basin the descent
/// started in.
template <typename F>
std::pair<double, double> bracket_from(F&& f, double x0, double step,
                                       double lo, double hi) {
  const double xl = std::max(lo, x0 - step);
  const double xr = std::min(hi, x0 + step);
  const double f0 = f(x0);
  const double fl = f(xl);
  const double fr = f(xr);
  if (f0 <= fl && f0 <= fr) return {xl, xr};
  const double dir = fr < fl ? 1.0 : -1.0;
  double prev = x0;
  double cur = dir > 0.0 ? xr : xl;
  double fcur = dir > 0.0 ? fr : fl;
  double h = step;
  while (true) {
    h *= 2.0;
    const double next = std::clamp(cur + dir * h, lo, hi);
    if (next == cur) break;  // boundary reached while still descending
    const double fnext = f(next);
    if (fnext >= fcur) {
      cur = next;  // rose again: the bracket [prev, next] surrounds a dip
      break;
    }
    prev = cur;
    cur = next;
    fcur = fnext;
  }
  return dir > 0.0 ? std::pair<double, double>{prev, cur}
                   : std::pair<double, double>{cur, prev};
}

template <typename F>
double golden_section(F&& f, double a, double b, double tol) {
  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = f(x1);
  double f2 = f(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

ToyProblem make_toy_problem(ScalarField f, ScalarField p1, ScalarField p2,
                            double lambda) {
  check_domain(f, -2.0, 2.0, "signal f");
  check_domain(p1, -1.2, 1.2, "template p1");
  check_domain(p2, -1.2, 1.2, "template p2");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("penalty weight lambda must be positive");
  }
  return ToyProblem{std::move(f), std::move(p1), std::move(p2), lambda};
}

std::string signal_csv(const ScalarField& signal) {
  if (signal.height() != 1) {
    throw std::invalid_argument("signal_csv expects a height-1 field");
  }
  std::string out = "x,value\n";
  for (int i = 0; i < signal.width(); ++i) {
    append_number(out, signal.origin()[0] + i * signal.spacing());
    out.push_back(',');
    append_number(out, signal.at(i, 0));
    out.push_back('\n');
  }
  return out;
}

ScalarField load_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open signal file: " + path);
  }
  std::string line;
  long line_no = 0;
  const auto fail = [&](const char* why) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " +
                             why);
  };
  if (!std::getline(in, line)) fail("empty file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x,value") fail("expected header 'x,value'");
  std::vector<double> xs;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string::npos) fail("expected 'x,value' row");
    const auto x = parse_number(std::string_view(line).substr(0, comma));
    const auto v = parse_number(std::string_view(line).substr(comma + 1));
    if (!x || !v) fail("malformed number");
    xs.push_back(*x);
    values.push_back(*v);
  }
  if (xs.size() < 2) fail("need at least two samples");
  const double x0 = xs.front();
  const double step =
      (xs.back() - x0) / static_cast<double>(xs.size() - 1);
  if (!(step > 0.0)) {
    throw std::invalid_argument(path + ": x column must be increasing");
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (std::abs(xs[i] - (x0 + static_cast<double>(i) * step)) > 1e-9) {
      throw std::invalid_argument(path + ": x column is not uniformly spaced");
    }
  }
  const FieldGrid grid{static_cast<int>(xs.size()), 1, step, {x0, 0.0}};
  return ScalarField(grid, std::move(values));
}

ToyProblem load_toy_problem(const std::string& f_path,
                            const std::string& p1_path,
                            const std::string& p2_path, double lambda) {
  return make_toy_problem(load_signal_csv(f_path), load_signal_csv(p1_path),
                          load_signal_csv(p2_path), lambda);
}

double toy_cost(const ToyProblem& problem, double c1, double theta) {
  const double e1 = template_energy(problem.f, problem.p1, theta);
  const double e2 = template_energy(problem.f, problem.p2, theta);
  return combine_cost(c1, e1, e2, problem.lambda);
}

CostGrid landscape(const ToyProblem& problem, const LandscapeSpec& spec,
                   double sigma) {
  if (spec.n_c1 < 2 || spec.n_theta < 2) {
    throw std::invalid_argument("landscape spec needs >= 2 samples per axis");
  }
  if (!(spec.c1_max > spec.c1_min) || !(spec.theta_max > spec.theta_min)) {
    throw std::invalid_argument("landscape spec axis range is empty");
  }
  if (sigma < 0.0 || !std::isfinite(sigma)) {
    throw std::domain_error("diffusion level must be non-negative");
  }
  CostGrid grid;
  grid.c1_axis.resize(spec.n_c1);
  grid.theta_axis.resize(spec.n_theta);
  for (int i = 0; i < spec.n_c1; ++i) {
    grid.c1_axis[i] =
        spec.c1_min + (spec.c1_max - spec.c1_min) * i / (spec.n_c1 - 1);
  }
  for (int j = 0; j < spec.n_theta; ++j) {
    grid.theta_axis[j] = spec.theta_min +
                         (spec.theta_max - spec.theta_min) * j /
                             (spec.n_theta - 1);
  }
  // The template energies depend on theta alone; evaluate one column of
  // each and combine per cell — identical arithmetic to toy_cost.
  std::vector<double> e1(spec.n_theta);
  std::vector<double> e2(spec.n_theta);
  for (int j = 0; j < spec.n_theta; ++j) {
    e1[j] = template_energy(problem.f, problem.p1, grid.theta_axis[j]);
    e2[j] = template_energy(problem.f, problem.p2, grid.theta_axis[j]);
  }
  grid.values.resize(static_cast<std::size_t>(spec.n_c1) * spec.n_theta);
  for (int i = 0; i < spec.n_c1; ++i) {
    for (int j = 0; j < spec.n_theta; ++j) {
      grid.values[static_cast<std::size_t>(i) * spec.n_theta + j] =
          combine_cost(grid.c1_axis[i], e1[j], e2[j], problem.lambda);
    }
  }
  grid.sigma = 0.0;
  if (sigma > 0.0) return smooth_cost(grid, sigma);
  return grid;
}

CostGrid smooth_cost(const CostGrid& grid, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::domain_error("diffusion level must be positive");
  }
  require_cost_grid(grid);
  const int nc = static_cast<int>(grid.c1_axis.size());
  const int nt = static_cast<int>(grid.theta_axis.size());
  const double step_c = grid.c1_axis[1] - grid.c1_axis[0];
  const double step_t = grid.theta_axis[1] - grid.theta_axis[0];

  // Separable convolution, replicate-extended at the edges.
  const std::vector<double> taps_c = gaussian_taps(step_c, sigma);
  const int rc = static_cast<int>(taps_c.size() / 2);
  std::vector<double> mid(grid.values.size());
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nt; ++j) {
      double acc = 0.0;
      for (int k = -rc; k <= rc; ++k) {
        acc += taps_c[k + rc] * grid.at(clamp_index(i + k, nc), j);
      }
      mid[static_cast<std::size_t>(i) * nt + j] = acc;
    }
  }
  const std::vector<double> taps_t = gaussian_taps(step_t, sigma);
  const int rt = static_cast<int>(taps_t.size() / 2);
  CostGrid out;
  out.c1_axis = grid.c1_axis;
  out.theta_axis = grid.theta_axis;
  out.values.resize(grid.values.size());
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nt; ++j) {
      double acc = 0.0;
      for (int k = -rt; k <= rt; ++k) {
        acc += taps_t[k + rt] *
               mid[static_cast<std::size_t>(i) * nt + clamp_index(j + k, nt)];
      }
      out.values[static_cast<std::size_t>(i) * nt + j] = acc;
    }
  }
  // Total diffusion level composes in quadrature, matching the semigroup of
  // the underlying continuous smoothing.
  out.sigma = std::hypot(grid.sigma, sigma);
  return out;
}

double sample_bicubic(const CostGrid& grid, double c1, double theta) {
  require_cost_grid(grid);
  const int nc = static_cast<int>(grid.c1_axis.size());
  const int nt = static_cast<int>(grid.theta_axis.size());
  const double step_c = grid.c1_axis[1] - grid.c1_axis[0];
  const double step_t = grid.theta_axis[1] - grid.theta_axis[0];
  const double cu = std::clamp(c1, grid.c1_axis.front(), grid.c1_axis.back());
  const double tu =
      std::clamp(theta, grid.theta_axis.front(), grid.theta_axis.back());
  const double u = (cu - grid.c1_axis.front()) / step_c;
  const double v = (tu - grid.theta_axis.front()) / step_t;
  const int i = std::clamp(static_cast<int>(std::floor(u)), 0, nc - 2);
  const int j = std::clamp(static_cast<int>(std::floor(v)), 0, nt - 2);
  const double fu = u - i;
  const double fv = v - j;
  double col[4];
  for (int di = -1; di <= 2; ++di) {
    const int row = clamp_index(i + di, nc);
    double p[4];
    for (int dj = -1; dj <= 2; ++dj) {
      p[dj + 1] = grid.at(row, clamp_index(j + dj, nt));
    }
    col[di + 1] = catmull_rom(p[0], p[1], p[2], p[3], fv);
  }
  return catmull_rom(col[0], col[1], col[2], col[3], fu);
}

int count_grid_local_minima(const CostGrid& grid) {
  require_cost_grid(grid);
  const int nc = static_cast<int>(grid.c1_axis.size());
  const int nt = static_cast<int>(grid.theta_axis.size());
  int count = 0;
  for (int i = 0; i < nc; ++i) {
    for (int j = 0; j < nt; ++j) {
      const double v = grid.at(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1 && is_min; ++dj) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di;
          const int jj = j + dj;
          if (ii < 0 || ii >= nc || jj < 0 || jj >= nt) continue;
          if (grid.at(ii, jj) <= v) is_min = false;
        }
      }
      if (is_min) ++count;
    }
  }
  return count;
}

GridMinimum grid_global_minimum(const CostGrid& grid) {
  require_cost_grid(grid);
  const int nt = static_cast<int>(grid.theta_axis.size());
  std::size_t best = 0;
  for (std::size_t idx = 1; idx < grid.values.size(); ++idx) {
    if (grid.values[idx] < grid.values[best]) best = idx;
  }
  const int i = static_cast<int>(best) / nt;
  const int j = static_cast<int>(best) % nt;
  return {grid.c1_axis[i], grid.theta_axis[j], grid.values[best]};
}

GridMinimum local_minimize(const CostGrid& grid, double c1_start,
                           double theta_start) {
  require_cost_grid(grid);
  const double lo_c = grid.c1_axis.front();
  const double hi_c = grid.c1_axis.back();
  const double lo_t = grid.theta_axis.front();
  const double hi_t = grid.theta_axis.back();
  const double step_c = grid.c1_axis[1] - grid.c1_axis[0];
  const double step_t = grid.theta_axis[1] - grid.theta_axis[0];
  constexpr double kMoveTol = 1e-4;  // convergence, in axis units
  constexpr double kLineTol = 1e-6;  // golden-section interval width
  double c1 = std::clamp(c1_start, lo_c, hi_c);
  double th = std::clamp(theta_start, lo_t, hi_t);
  for (int sweep = 0; sweep < 200; ++sweep) {
    const auto fc = [&](double c) { return sample_bicubic(grid, c, th); };
    const auto bc = bracket_from(fc, c1, step_c, lo_c, hi_c);
    double next_c1 = golden_section(fc, bc.first, bc.second, kLineTol);
    if (fc(next_c1) > fc(c1)) next_c1 = c1;  // never accept an uphill move
    const auto ft =
        [&](double t) { return sample_bicubic(grid, next_c1, t); };
    const auto bt = bracket_from(ft, th, step_t, lo_t, hi_t);
    double next_th = golden_section(ft, bt.first, bt.second, kLineTol);
    if (ft(next_th) > ft(th)) next_th = th;
    const double moved =
        std::max(std::abs(next_c1 - c1), std::abs(next_th - th));
    c1 = next_c1;
    th = next_th;
    if (moved < kMoveTol) break;
  }
  return {c1, th, sample_bicubic(grid, c1, th)};
}

DiffusionSchedule DiffusionSchedule::geometric(double sigma0, int stages,
                                               double ratio) {
  if (!(sigma0 > 0.0) || stages < 1 || !(ratio > 0.0) || !(ratio < 1.0)) {
    throw std::invalid_argument("geometric schedule needs sigma0 > 0, "
                                "stages >= 1, ratio in (0, 1)");
  }
  DiffusionSchedule schedule;
  double s = sigma0;
  for (int k = 0; k < stages; ++k) {
    schedule.sigmas.push_back(s);
    s *= ratio;
  }
  schedule.sigmas.push_back(0.0);
  return schedule;
}

std::vector<TrajectoryPoint> continuation_minimize(
    const ToyProblem& problem, const DiffusionSchedule& schedule,
    const LandscapeSpec& spec) {
  const std::vector<double>& sigmas = schedule.sigmas;
  if (sigmas.size() < 2 || sigmas.back() != 0.0) {
    throw std::invalid_argument(
        "schedule must list decreasing positive levels ending at 0");
  }
  for (std::size_t k = 0; k + 1 < sigmas.size(); ++k) {
    if (!(sigmas[k] > 0.0) || !(sigmas[k] > sigmas[k + 1])) {
      throw std::invalid_argument(
          "schedule must list decreasing positive levels ending at 0");
    }
  }

  const CostGrid raw = landscape(problem, spec, 0.0);
  std::vector<TrajectoryPoint> trajectory;
  trajectory.reserve(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const double sigma = sigmas[k];
    const CostGrid stage = sigma > 0.0 ? smooth_cost(raw, sigma) : raw;
    TrajectoryPoint point;
    point.stage = static_cast<int>(k);
    point.sigma = sigma;
    if (k == 0) {
      const int minima = count_grid_local_minima(stage);
      if (minima != 1) {
        throw std::domain_error(
            "initial diffusion level leaves " + std::to_string(minima) +
            " grid-local minima; continuation needs exactly 1");
      }
      const GridMinimum global = grid_global_minimum(stage);
      point.c1 = global.c1;
      point.theta = global.theta;
      point.cost = global.value;
    } else {
      const TrajectoryPoint& prev = trajectory.back();
      const GridMinimum local = local_minimize(stage, prev.c1, prev.theta);
      point.c1 = local.c1;
      point.theta = local.theta;
      point.cost = local.value;
    }
    trajectory.push_back(point);
  }
  return trajectory;
}

std::string cost_grid_csv(const CostGrid& grid) {
  require_cost_grid(grid);
  std::string out = "c1,theta,value\n";
  const int nt = static_cast<int>(grid.theta_axis.size());
  for (std::size_t i = 0; i < grid.c1_axis.size(); ++i) {
    for (int j = 0; j < nt; ++j) {
      append_number(out, grid.c1_axis[i]);
      out.push_back(',');
      append_number(out, grid.theta_axis[j]);
      out.push_back(',');
      append_number(out, grid.values[i * nt + j]);
      out.push_back('\n');
    }
  }
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory) {
  std::string out = "stage,sigma,c1,theta,cost\n";
  for (const TrajectoryPoint& p : trajectory) {
    append_number(out, static_cast<long>(p.stage));
    out.push_back(',');
    append_number(out, p.sigma);
    out.push_back(',');
    append_number(out, p.c1);
    out.push_back(',');
    append_number(out, p.theta);
    out.push_back(',');
    append_number(out, p.cost);
    out.push_back('\n');
  }
  return out;
}

}  // namespace heatdesc
