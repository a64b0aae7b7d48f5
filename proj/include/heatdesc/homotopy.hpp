// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// homotopy: Gaussian diffusion of sampled cost landscapes and the
// coarse-to-fine continuation minimizer, exercised on a 1D two-template
// signal-matching toy problem whose landscape has the classic structure —
// a shallow local basin that traps plain descent and a global basin only
// the diffused problem exposes.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <string>
#include <vector>

#include "heatdesc/field.hpp"

namespace heatdesc {

/// The 1D signal-matching toy problem. f lives on [-2, 2]; both templates
/// live on [-1.2, 1.2]; all three are height-1 ScalarFields sampled
/// uniformly. lambda weights the quadratic penalty that replaces the
/// convex-combination equality constraint. Build through make_toy_problem
/// or load_toy_problem, which validate the domains.
struct ToyProblem {
  ScalarField f;
  ScalarField p1;
  ScalarField p2;
  double lambda = 1.0;
};

/// Validates domains (f on [-2, 2], templates on [-1.2, 1.2], within 1e-6;
/// height 1; lambda > 0) and assembles the problem. Throws
/// std::invalid_argument on violation.
ToyProblem make_toy_problem(ScalarField f, ScalarField p1, ScalarField p2,
                            double lambda = 1.0);

/// Serializes a height-1 field as "x,value" CSV rows (header included,
/// shortest round-trip formatting). Throws std::invalid_argument if the
/// field's height is not 1.
std::string signal_csv(const ScalarField& signal);

/// Parses the signal_csv format into a height-1 ScalarField; the x column
/// must be uniformly spaced. Throws std::runtime_error on I/O or parse
/// failure (with the offending line number) and std::invalid_argument on
/// non-uniform spacing or out-of-range values.
ScalarField load_signal_csv(const std::string& path);

/// Loads the three signal CSVs and assembles a validated ToyProblem.
ToyProblem load_toy_problem(const std::string& f_path,
                            const std::string& p1_path,
                            const std::string& p2_path, double lambda = 1.0);

/// The toy objective
///
///   J(c1, theta) = c1^2 E1(theta) + (1 - c1)^2 E2(theta)
///                + lambda (c1 (1 - c1))^2,
///
/// where E_k(theta) = integral over the template domain of
/// (f(x - theta) - p_k(x))^2 dx, evaluated as the direct intensity residual
/// of f under the 1D translation x -> x - theta against template p_k
/// (converted to a length-weighted Riemann sum). Template pixels whose
/// shifted sample leaves f's domain are skipped, so |theta| beyond the
/// domain slack only shrinks the integration window.
double toy_cost(const ToyProblem& problem, double c1, double theta);

/// Rectangle of (c1, theta) space to sample, with per-axis sample counts.
/// Defaults cover the basin structure of the shipped instance.
struct LandscapeSpec {
  double c1_min = -0.5;
  double c1_max = 1.5;
  double theta_min = -1.0;
  double theta_max = 1.0;
  int n_c1 = 101;
  int n_theta = 101;
};

/// A sampled cost landscape: strictly increasing uniform axes, a c1-major
/// value matrix, and the diffusion level applied to it (0 = raw samples).
struct CostGrid {
  std::vector<double> c1_axis;
  std::vector<double> theta_axis;
  std::vector<double> values;  ///< values[i_c1 * theta_axis.size() + i_theta]
  double sigma = 0.0;

  double at(int i_c1, int i_theta) const noexcept {
    return values[static_cast<std::size_t>(i_c1) * theta_axis.size() +
                  i_theta];
  }
};

/// Samples toy_cost over the spec's grid, then applies smooth_cost when
/// sigma > 0. Throws std::invalid_argument for a malformed spec and
/// std::domain_error for sigma < 0.
CostGrid landscape(const ToyProblem& problem, const LandscapeSpec& spec = {},
                   double sigma = 0.0);

/// Discrete isotropic Gaussian smoothing of a landscape: separable
/// convolution along both axes with unit-normalized Gaussian taps truncated
/// at 6 sigma and replicate-extended at the edges. sigma is measured in
/// axis units. The output records the total diffusion level
/// sqrt(grid.sigma^2 + sigma^2), so repeated smoothing composes like the
/// continuous semigroup. Throws std::domain_error if sigma <= 0.
CostGrid smooth_cost(const CostGrid& grid, double sigma);

/// Catmull-Rom bicubic interpolation of the landscape at (c1, theta),
/// replicate-extended at the edges; queries are clamped into the axis
/// ranges. Reproduces grid values at the nodes and linear landscapes
/// exactly. Throws std::invalid_argument if either axis has fewer than two
/// samples.
double sample_bicubic(const CostGrid& grid, double c1, double theta);

/// Number of cells whose value is strictly below all existing neighbors in
/// the 8-neighborhood (edge cells compare against their in-grid neighbors
/// only).
int count_grid_local_minima(const CostGrid& grid);

/// A located landscape point with its (interpolated or sampled) value.
struct GridMinimum {
  double c1 = 0.0;
  double theta = 0.0;
  double value = 0.0;
};

/// The cell with the smallest sampled value; the first in row-major order
/// on exact ties.
GridMinimum grid_global_minimum(const CostGrid& grid);

/// Local descent on the interpolated landscape: coordinate-wise
/// golden-section line searches (each bracketed outward from the current
/// point so descent stays within the starting basin), iterated until both
/// coordinates move less than 1e-4 axis units. The search never leaves the
/// grid rectangle.
GridMinimum local_minimize(const CostGrid& grid, double c1_start,
                           double theta_start);

/// Diffusion levels for continuation: sigma_0 > sigma_1 > ... > 0, with the
/// final entry exactly 0 (the raw landscape).
struct DiffusionSchedule {
  std::vector<double> sigmas;

  /// Geometric schedule sigma_0 * ratio^k for `stages` entries, then the
  /// final 0. Defaults give {1.0, 0.5, ..., 0.0078125, 0}.
  static DiffusionSchedule geometric(double sigma0 = 1.0, int stages = 8,
                                     double ratio = 0.5);
};

/// One continuation stage: the minimizer found on the sigma-smoothed
/// landscape and its interpolated cost there.
struct TrajectoryPoint {
  int stage = 0;
  double sigma = 0.0;
  double c1 = 0.0;
  double theta = 0.0;
  double cost = 0.0;
};

/// Coarse-to-fine continuation. Stage 0 smooths the raw landscape with
/// sigma_0 and takes its grid-global minimizer — after checking that this
/// smoothed landscape has exactly one grid-local minimum (throws
/// std::domain_error reporting the count otherwise, since a multi-basin
/// start defeats the point of starting global). Every later stage smooths
/// the raw landscape with its own sigma (the final stage, sigma = 0, uses
/// the raw samples) and runs local_minimize from the previous stage's
/// point. Returns one TrajectoryPoint per schedule entry. Throws
/// std::invalid_argument for an invalid schedule or spec.
std::vector<TrajectoryPoint> continuation_minimize(
    const ToyProblem& problem, const DiffusionSchedule& schedule,
    const LandscapeSpec& spec = {});

/// CSV rendering "c1,theta,value" with one row per cell, c1-major.
std::string cost_grid_csv(const CostGrid& grid);

/// CSV rendering "stage,sigma,c1,theta,cost" with one row per stage.
std::string trajectory_csv(const std::vector<TrajectoryPoint>& trajectory);

}  // namespace heatdesc
