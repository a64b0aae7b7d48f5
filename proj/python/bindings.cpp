// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// bindings: the Python extension module. Exposes the scalar-field layer,
// the closed-form kernels, descriptor computation, descriptor matching, and
// the diffusion/continuation optimizer. Values cross the boundary as numpy
// arrays; enums and modes cross as strings using the same spellings as the
// command-line tool.
//
// SPDX-License-Identifier: MIT

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include "heatdesc/descriptors.hpp"
#include "heatdesc/field.hpp"
#include "heatdesc/homotopy.hpp"
#include "heatdesc/kernels.hpp"
#include "heatdesc/matching.hpp"

namespace py = pybind11;
using namespace heatdesc;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> as_vector(const DoubleArray& a) {
  return {a.data(), a.data() + a.size()};
}

/// Copy out as a numpy array of the given shape.
py::array_t<double> as_numpy(const std::vector<double>& v,
                             const std::vector<py::ssize_t>& shape) {
  py::array_t<double> out(shape);
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

ScalarField field_from_numpy(const DoubleArray& values, const FieldGrid& grid) {
  if (values.ndim() != 2) {
    throw std::invalid_argument("field values must be a 2D array (height, width)");
  }
  if (grid.height != values.shape(0) || grid.width != values.shape(1)) {
    throw std::invalid_argument("value array shape does not match the grid");
  }
  return ScalarField(grid, as_vector(values));
}

py::array_t<double> field_to_numpy(const ScalarField& f) {
  return as_numpy(f.values(), {f.height(), f.width()});
}

py::array_t<double> descriptor_to_numpy(const Descriptor& d) {
  return as_numpy(d.values, {static_cast<py::ssize_t>(d.beta_centers.size()),
                             d.grid.height, d.grid.width});
}

py::array_t<double> cost_grid_to_numpy(const CostGrid& g) {
  return as_numpy(g.values, {static_cast<py::ssize_t>(g.c1_axis.size()),
                             static_cast<py::ssize_t>(g.theta_axis.size())});
}

CandidateSet candidate_set(const std::vector<Candidate>& entries) {
  CandidateSet set;
  set.entries = entries;
  return set;
}

}  // namespace

PYBIND11_MODULE(_heatdesc, m) {
  m.doc() = "Diffusion-based local image descriptors and continuation optimization";

  // --- fields and transforms -----------------------------------------------

  py::class_<FieldGrid>(m, "FieldGrid",
                        "Pixel-grid placement in world coordinates.")
      .def(py::init([](int width, int height, double spacing, const Vec2& origin) {
             return FieldGrid{width, height, spacing, origin};
           }),
           py::arg("width"), py::arg("height"), py::arg("spacing") = 1.0,
           py::arg("origin") = Vec2{0.0, 0.0})
      .def_readwrite("width", &FieldGrid::width)
      .def_readwrite("height", &FieldGrid::height)
      .def_readwrite("spacing", &FieldGrid::spacing)
      .def_readwrite("origin", &FieldGrid::origin)
      .def("__repr__", [](const FieldGrid& g) {
        return "FieldGrid(width=" + std::to_string(g.width) +
               ", height=" + std::to_string(g.height) +
               ", spacing=" + std::to_string(g.spacing) + ")";
      });

  m.def("centered_grid", &centered_grid, py::arg("width"), py::arg("height"),
        py::arg("spacing") = 1.0,
        "Grid placement whose pixel lattice is centered on the world origin.");

  py::class_<ScalarField>(m, "ScalarField",
                          "Scalar image f: X -> [0, 1] on a regular grid.")
      .def(py::init(&field_from_numpy), py::arg("values"), py::arg("grid"),
           "Build from a (height, width) array of values in [0, 1].")
      .def(py::init([](const DoubleArray& values, double spacing) {
             if (values.ndim() != 2) {
               throw std::invalid_argument(
                   "field values must be a 2D array (height, width)");
             }
             return ScalarField(static_cast<int>(values.shape(1)),
                                static_cast<int>(values.shape(0)),
                                as_vector(values), spacing);
           }),
           py::arg("values"), py::arg("spacing") = 1.0,
           "Build on a centered grid from a (height, width) array.")
      .def_property_readonly("width", &ScalarField::width)
      .def_property_readonly("height", &ScalarField::height)
      .def_property_readonly("spacing", &ScalarField::spacing)
      .def_property_readonly("grid", &ScalarField::grid)
      .def("to_numpy", &field_to_numpy, "Values as a (height, width) array.")
      .def("at", &ScalarField::at, py::arg("ix"), py::arg("iy"))
      .def("world", &ScalarField::world, py::arg("ix"), py::arg("iy"))
      .def("__repr__", [](const ScalarField& f) {
        return "ScalarField(" + std::to_string(f.width()) + "x" +
               std::to_string(f.height()) + ", spacing=" +
               std::to_string(f.spacing()) + ")";
      });

  m.def(
      "sample_bilinear",
      [](const ScalarField& f, const Vec2& p) {
        const SampleResult r = sample_bilinear(f, p);
        return py::make_tuple(r.value, r.inside);
      },
      py::arg("field"), py::arg("p"),
      "Bilinear sample at a world point; returns (value, inside).");

  py::class_<GradientSample>(m, "GradientSample")
      .def_readonly("gx", &GradientSample::gx)
      .def_readonly("gy", &GradientSample::gy)
      .def_readonly("magnitude", &GradientSample::magnitude)
      .def_readonly("orientation", &GradientSample::orientation);

  m.def("gradient", &gradient, py::arg("field"), py::arg("p"),
        "Central-difference gradient at a world point (interior only).");

  py::class_<SimilarityTransform>(m, "SimilarityTransform",
                                  "tau(x) = e^s * R_alpha * x + b")
      .def(py::init([](double alpha, double s, const Vec2& b) {
             return SimilarityTransform{alpha, s, b};
           }),
           py::arg("alpha") = 0.0, py::arg("s") = 0.0,
           py::arg("b") = Vec2{0.0, 0.0})
      .def_readwrite("alpha", &SimilarityTransform::alpha)
      .def_readwrite("s", &SimilarityTransform::s)
      .def_readwrite("b", &SimilarityTransform::b)
      .def("apply", &SimilarityTransform::apply, py::arg("x"))
      .def("inverse", &SimilarityTransform::inverse);

  py::class_<AffineTransform>(m, "AffineTransform",
                              "tau(x) = A x + b, A row-major [a00, a01, a10, a11]")
      .def(py::init([](const std::array<double, 4>& A, const Vec2& b) {
             return AffineTransform{A, b};
           }),
           py::arg("A") = std::array<double, 4>{1.0, 0.0, 0.0, 1.0},
           py::arg("b") = Vec2{0.0, 0.0})
      .def_readwrite("A", &AffineTransform::A)
      .def_readwrite("b", &AffineTransform::b)
      .def("apply", &AffineTransform::apply, py::arg("x"))
      .def("det", &AffineTransform::det)
      .def_static("from_similarity", &AffineTransform::from_similarity,
                  py::arg("t"));

  m.def(
      "warp",
      [](const ScalarField& f, const py::object& t, const FieldGrid& out) {
        WarpResult r = py::isinstance<SimilarityTransform>(t)
                           ? warp(f, t.cast<SimilarityTransform>(), out)
                           : warp(f, t.cast<AffineTransform>(), out);
        return py::make_tuple(
            r.field, as_numpy(std::vector<double>(r.coverage.begin(),
                                                  r.coverage.end()),
                              {out.height, out.width}));
      },
      py::arg("field"), py::arg("transform"), py::arg("out_spec"),
      "Resample field as f o tau on out_spec; returns (field, coverage).");

  m.def(
      "load_pgm",
      [](const py::bytes& data) { return load_pgm(std::string_view(data)); },
      py::arg("data"), "Parse a P2/P5 PGM image into a ScalarField.");
  m.def("to_pgm", &to_pgm, py::arg("field"), py::arg("maxval") = 255,
        "Serialize as plain-text PGM (P2).");
  m.def("field_csv", &to_csv, py::arg("field"),
        "Serialize values as CSV, one image row per line.");

  // --- kernels --------------------------------------------------------------

  m.def("gauss1", &gauss1, py::arg("x"), py::arg("sigma"),
        "1D unit-mass Gaussian density.");
  m.def("gauss2", &gauss2, py::arg("x"), py::arg("y"), py::arg("sigma"),
        "2D isotropic unit-mass Gaussian density.");
  m.def("gauss_periodic", &gauss_periodic, py::arg("phi"), py::arg("sigma"),
        py::arg("wraps") = 4, "Wrapped Gaussian density on the circle.");
  m.def("erfcx", &erfcx, py::arg("x"),
        "Scaled complementary error function exp(x^2) erfc(x).");
  m.def("w_profile", &w_profile, py::arg("x"),
        "Half-line second-moment profile w(x).");
  m.def("gauss_halfline_moment2", &gauss_halfline_moment2, py::arg("a1"),
        py::arg("a2"),
        "Second moment of a non-normalized Gaussian over r >= 0.");
  m.def("radial_profile_integral", &radial_profile_integral, py::arg("c1"),
        py::arg("c2"), py::arg("sigma1"), py::arg("c3"), py::arg("c4"),
        py::arg("sigma2"),
        "Closed form of integral_0^inf r^2 gauss1(r c1 + c2) gauss2(r c3 + c4) dr.");
  m.def("pooled_window_inner", &pooled_window_inner, py::arg("x"), py::arg("y"),
        py::arg("sigma_d"), py::arg("sigma_s"), py::arg("eps_x") = 1e-6,
        "Scale-pooled spatial weight, inner linearization.");
  m.def("pooled_window_both", &pooled_window_both, py::arg("x"), py::arg("y"),
        py::arg("sigma_d"), py::arg("sigma_s"),
        "Scale-pooled spatial weight, both factors linearized.");

  // --- descriptors -----------------------------------------------------------

  py::class_<DescriptorParams>(m, "DescriptorParams",
                               "Parameters shared by all descriptor variants.")
      .def(py::init<>())
      .def_readwrite("sigma_r", &DescriptorParams::sigma_r)
      .def_readwrite("sigma_d", &DescriptorParams::sigma_d)
      .def_readwrite("sigma_d0", &DescriptorParams::sigma_d0)
      .def_readwrite("sigma_s", &DescriptorParams::sigma_s)
      .def_readwrite("sigma_a", &DescriptorParams::sigma_a)
      .def_readwrite("sigma_l", &DescriptorParams::sigma_l)
      .def_readwrite("n_beta_bins", &DescriptorParams::n_beta_bins)
      .def_readwrite("n_levels", &DescriptorParams::n_levels)
      .def_readwrite("n_scale_samples", &DescriptorParams::n_scale_samples)
      .def_readwrite("eps_grad", &DescriptorParams::eps_grad)
      .def_readwrite("full_heat_constant", &DescriptorParams::full_heat_constant)
      .def_readwrite("grid", &DescriptorParams::grid);

  m.def("default_descriptor_grid", &default_descriptor_grid, py::arg("sigma_d0"),
        "The standard 16x16 lattice spanning [-3 sigma_d0, 3 sigma_d0]^2.");
  m.def("beta_bin_centers", &beta_bin_centers, py::arg("n_beta_bins"),
        "Orientation bin centers (i + 0.5) * 2 pi / n.");

  py::class_<Descriptor>(m, "Descriptor",
                         "Sampled descriptor h indexed [beta][y][x].")
      .def_property_readonly(
          "kind", [](const Descriptor& d) { return to_string(d.kind); })
      .def_readonly("grid", &Descriptor::grid)
      .def_readonly("beta_centers", &Descriptor::beta_centers)
      .def_readonly("params", &Descriptor::params)
      .def("to_numpy", &descriptor_to_numpy,
           "Values as a (n_beta, height, width) array.")
      .def("at", &Descriptor::at, py::arg("beta"), py::arg("iy"), py::arg("ix"))
      .def("__repr__", [](const Descriptor& d) {
        return "Descriptor(" + to_string(d.kind) + ", " +
               std::to_string(d.beta_centers.size()) + "x" +
               std::to_string(d.grid.height) + "x" +
               std::to_string(d.grid.width) + ")";
      });

  m.def(
      "compute_descriptor",
      [](const std::string& kind, const ScalarField& field,
         const DescriptorParams& params) {
        return compute_descriptor(descriptor_kind_from_string(kind), field,
                                  params);
      },
      py::arg("kind"), py::arg("field"),
      py::arg("params") = DescriptorParams{},
      "Compute a descriptor; kind is one of sift, dsp_sampled, "
      "dsp_closed_inner, dsp_closed_both, heat, df, raw_density "
      "(case-insensitive).");

  m.def("save_descriptor", &save_descriptor, py::arg("descriptor"),
        py::arg("header_path"), py::arg("payload_path"),
        "Write the JSON header + float32 payload file pair.");
  m.def("load_descriptor", &load_descriptor, py::arg("header_path"),
        py::arg("payload_path"), "Read back a save_descriptor file pair.");
  m.def("descriptor_csv", &descriptor_csv, py::arg("descriptor"),
        "CSV export: beta,y,x,value rows in [beta][y][x] order.");

  m.def("heat_integrand_scalar", &heat_integrand_scalar, py::arg("x"),
        py::arg("y"), py::arg("beta"), py::arg("gx"), py::arg("gy"),
        py::arg("sigma_d"), py::arg("sigma_a"),
        "Scalar factor of the affine-diffusion integrand.");
  m.def(
      "alignment_rotation",
      [](const Vec2& g, const Vec2& x) {
        return as_numpy(
            std::vector<double>(alignment_rotation(g, x).begin(),
                                alignment_rotation(g, x).end()),
            {4, 4});
      },
      py::arg("g"), py::arg("x"),
      "Orthogonal change of basis on vectorized 2x2 maps, as a 4x4 array.");

  // --- matching ---------------------------------------------------------------

  py::class_<Candidate>(m, "Candidate",
                        "A hypothesized transform with an identifying label.")
      .def(py::init([](const py::object& transform, const std::string& label) {
             Candidate c;
             if (py::isinstance<SimilarityTransform>(transform)) {
               c.transform = transform.cast<SimilarityTransform>();
             } else {
               c.transform = transform.cast<AffineTransform>();
             }
             c.label = label;
             return c;
           }),
           py::arg("transform"), py::arg("label"))
      .def_readwrite("label", &Candidate::label);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("j_star", &MatchResult::j_star)
      .def_readonly("k_star", &MatchResult::k_star)
      .def_readonly("labels", &MatchResult::labels)
      .def_readonly("scores", &MatchResult::scores)
      .def_readonly("distances", &MatchResult::distances);

  m.def("descriptor_distance", &descriptor_distance, py::arg("h1"),
        py::arg("h2"),
        "Normalized L2 distance ||h1/||h1|| - h2/||h2|| ||, in [0, 2].");
  m.def("correlation", &correlation, py::arg("h1"), py::arg("h2"),
        "Riemann inner product over the common (beta, x) domain.");

  m.def(
      "match_templates",
      [](const ScalarField& field, const std::vector<Candidate>& candidates,
         const std::vector<ScalarField>& templates, const std::string& kind,
         const DescriptorParams& params, const std::string& mode) {
        return match_templates(field, candidate_set(candidates), templates,
                               descriptor_kind_from_string(kind), params,
                               score_mode_from_string(mode));
      },
      py::arg("field"), py::arg("candidates"), py::arg("templates"),
      py::arg("kind"), py::arg("params") = DescriptorParams{},
      py::arg("mode") = "correlation",
      "Score every candidate transform against every template.");
  m.def("match_result_json", &match_result_json, py::arg("result"),
        "Pretty-printed JSON rendering of a MatchResult.");

  m.def(
      "intensity_energy",
      [](const ScalarField& field, const ScalarField& tmpl,
         const py::object& t) {
        return py::isinstance<SimilarityTransform>(t)
                   ? intensity_energy(field, tmpl, t.cast<SimilarityTransform>())
                   : intensity_energy(field, tmpl, t.cast<AffineTransform>());
      },
      py::arg("field"), py::arg("template"), py::arg("transform"),
      "Intensity residual of field o tau against the template.");

  // --- homotopy / continuation -------------------------------------------------

  py::class_<ToyProblem>(m, "ToyProblem",
                         "1D two-template matching problem on a signal.")
      .def_readonly("f", &ToyProblem::f)
      .def_readonly("p1", &ToyProblem::p1)
      .def_readonly("p2", &ToyProblem::p2)
      .def_readonly("lam", &ToyProblem::lambda);

  m.def("make_toy_problem", &make_toy_problem, py::arg("f"), py::arg("p1"),
        py::arg("p2"), py::arg("lam") = 1.0,
        "Validate and assemble a toy problem from 1D signals.");
  m.def("load_toy_problem", &load_toy_problem, py::arg("f_path"),
        py::arg("p1_path"), py::arg("p2_path"), py::arg("lam") = 1.0,
        "Load the signal CSVs and assemble a validated toy problem.");
  m.def("toy_cost", &toy_cost, py::arg("problem"), py::arg("c1"),
        py::arg("theta"), "The matching cost at (c1, theta).");

  py::class_<LandscapeSpec>(m, "LandscapeSpec",
                            "Rectangle of (c1, theta) space to sample.")
      .def(py::init<>())
      .def_readwrite("c1_min", &LandscapeSpec::c1_min)
      .def_readwrite("c1_max", &LandscapeSpec::c1_max)
      .def_readwrite("theta_min", &LandscapeSpec::theta_min)
      .def_readwrite("theta_max", &LandscapeSpec::theta_max)
      .def_readwrite("n_c1", &LandscapeSpec::n_c1)
      .def_readwrite("n_theta", &LandscapeSpec::n_theta);

  py::class_<CostGrid>(m, "CostGrid", "Sampled cost landscape.")
      .def_readonly("c1_axis", &CostGrid::c1_axis)
      .def_readonly("theta_axis", &CostGrid::theta_axis)
      .def_readonly("sigma", &CostGrid::sigma)
      .def("to_numpy", &cost_grid_to_numpy,
           "Values as an (n_c1, n_theta) array.")
      .def("at", &CostGrid::at, py::arg("i_c1"), py::arg("i_theta"));

  m.def("landscape", &landscape, py::arg("problem"),
        py::arg("spec") = LandscapeSpec{}, py::arg("sigma") = 0.0,
        "Sample toy_cost over the grid, smoothing when sigma > 0.");
  m.def("smooth_cost", &smooth_cost, py::arg("grid"), py::arg("sigma"),
        "Discrete Gaussian smoothing of a landscape (composes like the "
        "continuous semigroup).");
  m.def("sample_bicubic", &sample_bicubic, py::arg("grid"), py::arg("c1"),
        py::arg("theta"), "Catmull-Rom interpolation of the landscape.");
  m.def("count_grid_local_minima", &count_grid_local_minima, py::arg("grid"),
        "Cells strictly below all 8-neighbors.");

  py::class_<GridMinimum>(m, "GridMinimum")
      .def_readonly("c1", &GridMinimum::c1)
      .def_readonly("theta", &GridMinimum::theta)
      .def_readonly("value", &GridMinimum::value);

  m.def("grid_global_minimum", &grid_global_minimum, py::arg("grid"),
        "The cell with the smallest sampled value.");
  m.def("local_minimize", &local_minimize, py::arg("grid"),
        py::arg("c1_start"), py::arg("theta_start"),
        "Coordinate descent on the interpolated landscape.");

  py::class_<DiffusionSchedule>(m, "DiffusionSchedule",
                                "Decreasing diffusion levels ending at 0.")
      .def(py::init([](std::vector<double> sigmas) {
             DiffusionSchedule s;
             s.sigmas = std::move(sigmas);
             return s;
           }),
           py::arg("sigmas"))
      .def_readwrite("sigmas", &DiffusionSchedule::sigmas)
      .def_static("geometric", &DiffusionSchedule::geometric,
                  py::arg("sigma0") = 1.0, py::arg("stages") = 8,
                  py::arg("ratio") = 0.5);

  py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
      .def_readonly("stage", &TrajectoryPoint::stage)
      .def_readonly("sigma", &TrajectoryPoint::sigma)
      .def_readonly("c1", &TrajectoryPoint::c1)
      .def_readonly("theta", &TrajectoryPoint::theta)
      .def_readonly("cost", &TrajectoryPoint::cost);

  m.def("continuation_minimize", &continuation_minimize, py::arg("problem"),
        py::arg("schedule"), py::arg("spec") = LandscapeSpec{},
        "Coarse-to-fine continuation; one TrajectoryPoint per stage.");

  m.def("cost_grid_csv", &cost_grid_csv, py::arg("grid"),
        "CSV rendering of a landscape.");
  m.def("trajectory_csv", &trajectory_csv, py::arg("trajectory"),
        "CSV rendering of a continuation trajectory.");
}
