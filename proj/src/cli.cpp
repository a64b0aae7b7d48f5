// heatdesc — diffusion-based local image descriptors and continuation
// optimization.
//
// cli: command-line front end wiring configuration, file I/O, and the
// verification/report workflows around the library modules.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/cli.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "heatdesc/kernels.hpp"

namespace heatdesc {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// ---------------------------------------------------------------------------
// Small formatting / file helpers
// ---------------------------------------------------------------------------

void append_number(std::string& out, double value) {
  std::array<char, 64> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  out.append(buf.data(), res.ptr);
}

std::string format_number(double value) {
  std::string s;
  append_number(s, value);
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot read file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) {
    throw std::invalid_argument("cannot read file: " + path);
  }
  return std::move(buf).str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.good()) {
    throw std::runtime_error("cannot write file: " + path);
  }
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

[[noreturn]] void bad_key(const std::string& key, const char* reason) {
  throw std::invalid_argument("config: " + key + " " + reason);
}

void expect_keys(const json& node, const std::string& prefix,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        });
    if (!known) {
      const std::string qualified =
          prefix.empty() ? item.key() : prefix + "." + item.key();
      throw std::invalid_argument("config: unknown key \"" + qualified +
                                  "\"");
    }
  }
}

template <typename T>
void assign(const json& node, const std::string& prefix, const char* key,
            T& out) {
  if (!node.contains(key)) return;
  try {
    out = node.at(key).get<T>();
  } catch (const json::exception&) {
    bad_key(prefix + "." + key, "has the wrong type");
  }
}

void require_positive(double value, const std::string& key) {
  if (!(value > 0.0)) bad_key(key, "must be positive");
}

void parse_descriptor_section(const json& node, DescriptorParams& p) {
  expect_keys(node, "descriptor",
              {"sigma_r", "sigma_d", "sigma_d0", "sigma_s", "sigma_a",
               "sigma_l", "n_beta_bins", "n_levels", "n_scale_samples",
               "eps_grad", "full_heat_constant", "grid"});
  assign(node, "descriptor", "sigma_r", p.sigma_r);
  if (node.contains("sigma_r")) {
    require_positive(p.sigma_r, "descriptor.sigma_r");
  }
  assign(node, "descriptor", "sigma_d", p.sigma_d);
  assign(node, "descriptor", "sigma_d0", p.sigma_d0);
  assign(node, "descriptor", "sigma_s", p.sigma_s);
  assign(node, "descriptor", "sigma_a", p.sigma_a);
  assign(node, "descriptor", "sigma_l", p.sigma_l);
  require_positive(p.sigma_d, "descriptor.sigma_d");
  require_positive(p.sigma_d0, "descriptor.sigma_d0");
  require_positive(p.sigma_s, "descriptor.sigma_s");
  require_positive(p.sigma_a, "descriptor.sigma_a");
  require_positive(p.sigma_l, "descriptor.sigma_l");
  assign(node, "descriptor", "n_beta_bins", p.n_beta_bins);
  assign(node, "descriptor", "n_levels", p.n_levels);
  assign(node, "descriptor", "n_scale_samples", p.n_scale_samples);
  if (p.n_beta_bins < 2) bad_key("descriptor.n_beta_bins", "must be >= 2");
  if (p.n_levels < 2) bad_key("descriptor.n_levels", "must be >= 2");
  if (p.n_scale_samples < 1) {
    bad_key("descriptor.n_scale_samples", "must be >= 1");
  }
  assign(node, "descriptor", "eps_grad", p.eps_grad);
  require_positive(p.eps_grad, "descriptor.eps_grad");
  assign(node, "descriptor", "full_heat_constant", p.full_heat_constant);
  if (node.contains("grid")) {
    const json& g = node.at("grid");
    expect_keys(g, "descriptor.grid", {"width", "height", "spacing",
                                       "origin"});
    assign(g, "descriptor.grid", "width", p.grid.width);
    assign(g, "descriptor.grid", "height", p.grid.height);
    assign(g, "descriptor.grid", "spacing", p.grid.spacing);
    assign(g, "descriptor.grid", "origin", p.grid.origin);
    if (p.grid.width < 1) bad_key("descriptor.grid.width", "must be >= 1");
    if (p.grid.height < 1) bad_key("descriptor.grid.height", "must be >= 1");
    require_positive(p.grid.spacing, "descriptor.grid.spacing");
  }
}

void parse_homotopy_section(const json& node, CliConfig& cfg) {
  expect_keys(node, "homotopy", {"lambda", "schedule", "grid"});
  assign(node, "homotopy", "lambda", cfg.lambda);
  require_positive(cfg.lambda, "homotopy.lambda");
  assign(node, "homotopy", "schedule", cfg.schedule);
  for (const double s : cfg.schedule) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      bad_key("homotopy.schedule", "entries must be finite and >= 0");
    }
  }
  if (node.contains("grid")) {
    const json& g = node.at("grid");
    expect_keys(g, "homotopy.grid", {"c1_min", "c1_max", "theta_min",
                                     "theta_max", "n_c1", "n_theta"});
    assign(g, "homotopy.grid", "c1_min", cfg.grid.c1_min);
    assign(g, "homotopy.grid", "c1_max", cfg.grid.c1_max);
    assign(g, "homotopy.grid", "theta_min", cfg.grid.theta_min);
    assign(g, "homotopy.grid", "theta_max", cfg.grid.theta_max);
    assign(g, "homotopy.grid", "n_c1", cfg.grid.n_c1);
    assign(g, "homotopy.grid", "n_theta", cfg.grid.n_theta);
    if (!(cfg.grid.c1_max > cfg.grid.c1_min)) {
      bad_key("homotopy.grid.c1_max", "must exceed c1_min");
    }
    if (!(cfg.grid.theta_max > cfg.grid.theta_min)) {
      bad_key("homotopy.grid.theta_max", "must exceed theta_min");
    }
    if (cfg.grid.n_c1 < 2) bad_key("homotopy.grid.n_c1", "must be >= 2");
    if (cfg.grid.n_theta < 2) bad_key("homotopy.grid.n_theta", "must be >= 2");
  }
}

// ---------------------------------------------------------------------------
// Independent quadrature for the verification report. The library's closed
// forms never integrate numerically; this adaptive Simpson lives only behind
// the verify-identities command and is the report's second opinion.
// ---------------------------------------------------------------------------

template <typename F>
double adapt_simpson(const F& f, double a, double fa, double m, double fm,
                     double b, double fb, double whole, double tol,
                     int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  const double floor = 1e-16 * (std::abs(left) + std::abs(right));
  if (depth <= 0 || std::abs(delta) <= 15.0 * std::max(tol, floor)) {
    return left + right + delta / 15.0;
  }
  return adapt_simpson(f, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1) +
         adapt_simpson(f, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate(const F& f, double a, double b) {
  if (!(b > a)) return 0.0;
  constexpr int kPieces = 16;
  constexpr int kDepth = 24;
  const double h = (b - a) / kPieces;
  double coarse = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double x0 = a + i * h;
    coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
  }
  const double tol = std::max(1e-300, 1e-12 * std::abs(coarse)) / kPieces;
  double sum = 0.0;
  for (int i = 0; i < kPieces; ++i) {
    const double x0 = a + i * h;
    const double x1 = x0 + h;
    const double m = 0.5 * (x0 + x1);
    const double fa = f(x0);
    const double fm = f(m);
    const double fb = f(x1);
    const double whole = h / 6.0 * (fa + 4.0 * fm + fb);
    sum += adapt_simpson(f, x0, fa, m, fm, x1, fb, whole, tol, kDepth);
  }
  return sum;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  if (scale == 0.0) return 0.0;
  return std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Verification report rows
// ---------------------------------------------------------------------------

struct ReportRow {
  std::string identity;
  std::string params;
  double closed_form = 0.0;
  double oracle = 0.0;
  double rel_err = 0.0;
  double tolerance = 0.0;
};

std::string kv(const char* key, double value) {
  std::string s(key);
  s += '=';
  append_number(s, value);
  return s;
}

void verify_halfline_moment(std::mt19937_64& rng, int count,
                            std::vector<ReportRow>& rows) {
  std::uniform_real_distribution<double> da1(-2.0, 3.0), da2(0.2, 2.0);
  int accepted = 0;
  while (accepted < count) {
    const double a2 = da2(rng);
    const double a1 = da1(rng);
    if (a1 < -4.0 * a2) continue;  // both closed-form terms underflow there
    ++accepted;
    const double closed = gauss_halfline_moment2(a1, a2);
    const double quad = integrate(
        [&](double r) {
          const double d = (r - a1) / a2;
          return r * r * std::exp(-0.5 * d * d);
        },
        0.0, std::max(0.0, a1) + 14.0 * a2);
    rows.push_back({"gauss_halfline_moment2", kv("a1", a1) + ";" + kv("a2", a2),
                    closed, quad, rel_diff(closed, quad), 1e-8});
  }
}

void verify_radial_profile(std::mt19937_64& rng, int count,
                           std::vector<ReportRow>& rows) {
  std::uniform_real_distribution<double> dc(-2.0, 2.0), ds(0.2, 3.0);
  int accepted = 0;
  while (accepted < count) {
    const double c1 = dc(rng), c2 = dc(rng);
    const double s1 = ds(rng), s2 = ds(rng);
    const std::array<double, 2> c3{dc(rng), dc(rng)};
    const std::array<double, 2> c4{dc(rng), dc(rng)};
    const double t1_sq = c1 * c1 / (2 * s1 * s1) +
                         (c3[0] * c3[0] + c3[1] * c3[1]) / (2 * s2 * s2);
    if (t1_sq <= 1e-12) continue;  // degenerate direction
    const double t1 = std::sqrt(t1_sq);
    const double t2 =
        (c1 * c2 / (s1 * s1) + (c3[0] * c4[0] + c3[1] * c4[1]) / (s2 * s2)) /
        (2 * t1);
    if (std::abs(t2) > 10.0) continue;  // relative comparison degenerates
    const double closed = radial_profile_integral(c1, c2, s1, c3, c4, s2);
    if (std::abs(closed) < 1e-30) continue;
    ++accepted;
    const double r_hi = std::max(0.0, -t2 / t1) + 14.0 / t1;
    const double quad = integrate(
        [&](double r) {
          return r * r * gauss1(r * c1 + c2, s1) *
                 gauss2(r * c3[0] + c4[0], r * c3[1] + c4[1], s2);
        },
        0.0, r_hi);
    rows.push_back({"radial_profile_integral",
                    kv("c1", c1) + ";" + kv("c2", c2) + ";" + kv("s1", s1) +
                        ";" + kv("c3x", c3[0]) + ";" + kv("c3y", c3[1]) + ";" +
                        kv("c4x", c4[0]) + ";" + kv("c4y", c4[1]) + ";" +
                        kv("s2", s2),
                    closed, quad, rel_diff(closed, quad), 1e-5});
  }
}

// Support of the scale-pooling integrands in u: the Gaussian factors bound
// where the product can be nonzero, so the quadrature window is finite.
std::array<double, 2> pool_support(const std::array<double, 2>& x,
                                   const std::array<double, 2>& y,
                                   double sigma_d, double sigma_s,
                                   bool tilted) {
  const double x_sq = x[0] * x[0] + x[1] * x[1];
  const double m_sq = sigma_d * sigma_d / x_sq;
  const double c_u = (x[0] * (y[0] - x[0]) + x[1] * (y[1] - x[1])) / x_sq;
  const double v = m_sq * sigma_s * sigma_s / (m_sq + sigma_s * sigma_s);
  const double mu = v * (c_u / m_sq + (tilted ? 1.0 : 0.0));
  const double half = 14.0 * std::sqrt(v);
  return {mu - half, mu + half};
}

void verify_pooled_window(std::mt19937_64& rng, int count, bool inner,
                          std::vector<ReportRow>& rows) {
  std::uniform_real_distribution<double> dxy(-2.0, 2.0), dsd(0.5, 2.0);
  std::uniform_real_distribution<double> dss(0.05, inner ? 0.6 : 0.8);
  int accepted = 0;
  while (accepted < count) {
    const std::array<double, 2> x{dxy(rng), dxy(rng)};
    const std::array<double, 2> y{dxy(rng), dxy(rng)};
    if (x[0] * x[0] + x[1] * x[1] < 0.09) continue;  // keep q/m moderate
    const double sd = dsd(rng), ss = dss(rng);
    const double closed = inner ? pooled_window_inner(x, y, sd, ss)
                                : pooled_window_both(x, y, sd, ss);
    // Skip magnitudes where a relative comparison is meaningless (and, for
    // the signed variant, the neighborhood of its zero crossing).
    if (std::abs(closed) < (inner ? 1e-30 : 1e-10)) continue;
    ++accepted;
    const std::array<double, 2> sup = pool_support(x, y, sd, ss, inner);
    const double quad = integrate(
        [&](double u) {
          const double tilt = inner ? std::exp(u) : (1.0 + u);
          return tilt *
                 gauss2(y[0] - (1.0 + u) * x[0], y[1] - (1.0 + u) * x[1],
                        sd) *
                 gauss1(u, ss);
        },
        sup[0], sup[1]);
    rows.push_back(
        {inner ? "pooled_window_inner" : "pooled_window_both",
         kv("x1", x[0]) + ";" + kv("x2", x[1]) + ";" + kv("y1", y[0]) + ";" +
             kv("y2", y[1]) + ";" + kv("sigma_d", sd) + ";" + kv("sigma_s", ss),
         closed, quad, rel_diff(closed, quad), 1e-5});
  }
}

void verify_heat_assembly(std::mt19937_64& rng, int count,
                          std::vector<ReportRow>& rows) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  int accepted = 0;
  while (accepted < count) {
    const Vec2 x{2.0 * unit(rng), 2.0 * unit(rng)};
    const Vec2 y{3.0 * unit(rng), 3.0 * unit(rng)};
    const double beta = angle(rng);
    double gx = 0.0, gy = 0.0, mag = 0.0;
    do {
      gx = unit(rng);
      gy = unit(rng);
      mag = std::hypot(gx, gy);
    } while (mag < 0.05);
    const double sigma_d = 0.4 + 1.6 * (0.5 * (unit(rng) + 1.0));
    const double sigma_a = 0.2 + 1.3 * (0.5 * (unit(rng) + 1.0));
    const Vec2 v{std::cos(beta), std::sin(beta)};
    const double c1 = (x[0] * v[0] + x[1] * v[1]) / mag;
    const double c2 = -(y[0] * gx + y[1] * gy) / mag;
    const double reference = radial_profile_integral(
        c1, c2, sigma_d, v, Vec2{-gx, -gy}, sigma_a * mag);
    if (std::abs(reference) < 1e-30) continue;
    ++accepted;
    const double constant =
        std::exp(-1.0 / (2.0 * sigma_a * sigma_a)) /
        (8.0 * std::sqrt(2.0) * std::pow(kPi, 1.5) * sigma_d * sigma_a *
         sigma_a);
    const double assembled =
        heat_integrand_scalar(x, y, beta, gx, gy, sigma_d, sigma_a) * constant;
    rows.push_back({"heat_integrand_assembly",
                    kv("x1", x[0]) + ";" + kv("x2", x[1]) + ";" +
                        kv("y1", y[0]) + ";" + kv("y2", y[1]) + ";" +
                        kv("beta", beta) + ";" + kv("g1", gx) + ";" +
                        kv("g2", gy) + ";" + kv("sigma_d", sigma_d) + ";" +
                        kv("sigma_a", sigma_a),
                    assembled, reference, rel_diff(assembled, reference),
                    1e-6});
  }
}

void verify_rotation(std::mt19937_64& rng, int count,
                     std::vector<ReportRow>& rows) {
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  const auto draw_nonzero = [&]() {
    double v = 0.0;
    while (std::abs(v) < 1e-3) v = unit(rng);
    return v;
  };
  for (int i = 0; i < count; ++i) {
    const Vec2 g{draw_nonzero(), draw_nonzero()};
    const Vec2 x{draw_nonzero(), draw_nonzero()};
    const std::array<double, 16> r = alignment_rotation(g, x);
    double dev = 0.0;
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        double gram = 0.0;
        for (int k = 0; k < 4; ++k) gram += r[4 * k + a] * r[4 * k + b];
        dev = std::max(dev, std::abs(gram - (a == b ? 1.0 : 0.0)));
      }
    }
    rows.push_back({"alignment_rotation_orthogonality",
                    kv("g1", g[0]) + ";" + kv("g2", g[1]) + ";" +
                        kv("x1", x[0]) + ";" + kv("x2", x[1]),
                    dev, 0.0, dev, 1e-12});
  }
}

// ---------------------------------------------------------------------------
// Subcommand bodies (shared plumbing already validated their inputs)
// ---------------------------------------------------------------------------

void echo_config(const CliConfig& cfg, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(join_path(out_dir, "resolved_config.json"),
             cli_config_json(cfg));
}

int cmd_descriptor(const CliConfig& cfg, const std::string& input_path,
                   const std::string& output_path, DescriptorKind kind,
                   bool with_csv, const std::string& out_dir) {
  echo_config(cfg, out_dir);
  const ScalarField field = load_pgm(read_file(input_path));
  const Descriptor d = compute_descriptor(kind, field, cfg.descriptor);
  const std::string payload_path = output_path + ".bin";
  save_descriptor(d, output_path, payload_path);
  if (with_csv) {
    write_file(output_path + ".csv", descriptor_csv(d));
  }
  std::string kind_lower = to_string(kind);
  for (char& c : kind_lower) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  std::cout << "descriptor " << kind_lower << " " << d.grid.width << "x"
            << d.grid.height << "x" << d.beta_centers.size() << " -> "
            << output_path << "\n";
  return 0;
}

CandidateSet parse_candidates(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("candidates: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("candidates")) {
    throw std::invalid_argument(
        "candidates: expected an object with a \"candidates\" array");
  }
  for (const auto& item : doc.items()) {
    if (item.key() != "candidates") {
      throw std::invalid_argument("candidates: unknown key \"" + item.key() +
                                  "\"");
    }
  }
  CandidateSet set;
  try {
    for (const json& entry : doc.at("candidates")) {
      Candidate c;
      c.label = entry.at("label").get<std::string>();
      const bool has_similarity = entry.contains("similarity");
      const bool has_affine = entry.contains("affine");
      if (has_similarity == has_affine) {
        throw std::invalid_argument(
            "candidates: each entry needs exactly one of \"similarity\" or "
            "\"affine\"");
      }
      if (has_similarity) {
        const json& t = entry.at("similarity");
        SimilarityTransform s;
        s.alpha = t.at("alpha").get<double>();
        s.s = t.at("s").get<double>();
        s.b = t.at("b").get<std::array<double, 2>>();
        c.transform = s;
      } else {
        const json& t = entry.at("affine");
        AffineTransform a;
        a.A = t.at("A").get<std::array<double, 4>>();
        a.b = t.at("b").get<std::array<double, 2>>();
        c.transform = a;
      }
      set.entries.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("candidates: ") + e.what());
  }
  return set;
}

int cmd_match(const CliConfig& cfg, const std::string& image_path,
              const std::string& templates_dir,
              const std::string& candidates_path, DescriptorKind kind,
              ScoreMode mode, const std::string& out_dir) {
  echo_config(cfg, out_dir);
  const ScalarField field = load_pgm(read_file(image_path));
  const CandidateSet candidates = parse_candidates(candidates_path);

  std::vector<std::string> template_paths;
  {
    std::error_code ec;
    std::filesystem::directory_iterator it(templates_dir, ec);
    if (ec) {
      throw std::invalid_argument("cannot read template directory: " +
                                  templates_dir);
    }
    for (const auto& entry : it) {
      if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
        template_paths.push_back(entry.path().string());
      }
    }
  }
  std::sort(template_paths.begin(), template_paths.end());
  if (template_paths.empty()) {
    throw std::invalid_argument("no .pgm templates in: " + templates_dir);
  }
  std::vector<ScalarField> templates;
  templates.reserve(template_paths.size());
  for (const std::string& p : template_paths) {
    templates.push_back(load_pgm(read_file(p)));
  }

  const MatchResult result =
      match_templates(field, candidates, templates, kind, cfg.descriptor,
                      mode);
  std::cout << match_result_json(result);
  return 0;
}

int cmd_landscape(const CliConfig& cfg, double sigma,
                  const std::string& out_dir) {
  echo_config(cfg, out_dir);
  const ToyProblem problem = load_toy_problem(
      cfg.signal_path, cfg.template1_path, cfg.template2_path, cfg.lambda);
  const CostGrid grid = landscape(problem, cfg.grid, sigma);
  write_file(join_path(out_dir, "landscape.csv"), cost_grid_csv(grid));
  std::cout << "landscape sigma=" << format_number(sigma)
            << " cells=" << grid.values.size()
            << " minima=" << count_grid_local_minima(grid) << "\n";
  return 0;
}

int cmd_toy_diffuse(const CliConfig& cfg,
                    const std::vector<double>& schedule_flag,
                    bool landscape_only, double sigma,
                    const std::string& out_dir) {
  if (landscape_only) {
    return cmd_landscape(cfg, sigma, out_dir);
  }
  echo_config(cfg, out_dir);
  const ToyProblem problem = load_toy_problem(
      cfg.signal_path, cfg.template1_path, cfg.template2_path, cfg.lambda);

  std::vector<double> sigmas = !schedule_flag.empty() ? schedule_flag
                               : !cfg.schedule.empty()
                                   ? cfg.schedule
                                   : DiffusionSchedule::geometric().sigmas;

  std::vector<TrajectoryPoint> trajectory;
  if (sigmas.size() == 1 && sigmas[0] == 0.0) {
    // Degenerate request: plain local descent on the raw landscape from its
    // grid-global cell, reported as a single-stage trajectory.
    const CostGrid raw = landscape(problem, cfg.grid, 0.0);
    write_file(join_path(out_dir, "landscape_stage_0.csv"),
               cost_grid_csv(raw));
    const GridMinimum start = grid_global_minimum(raw);
    const GridMinimum end = local_minimize(raw, start.c1, start.theta);
    trajectory.push_back({0, 0.0, end.c1, end.theta, end.value});
  } else {
    trajectory =
        continuation_minimize(problem, DiffusionSchedule{sigmas}, cfg.grid);
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
      const CostGrid stage = landscape(problem, cfg.grid, sigmas[k]);
      write_file(join_path(out_dir,
                           "landscape_stage_" + std::to_string(k) + ".csv"),
                 cost_grid_csv(stage));
    }
  }
  write_file(join_path(out_dir, "trajectory.csv"),
             trajectory_csv(trajectory));
  const TrajectoryPoint& last = trajectory.back();
  std::cout << "final c1=" << format_number(last.c1)
            << " theta=" << format_number(last.theta)
            << " cost=" << format_number(last.cost) << "\n";
  return 0;
}

int cmd_verify_identities(const CliConfig& cfg, std::uint64_t seed, int count,
                          const std::string& out_dir) {
  echo_config(cfg, out_dir);
  std::mt19937_64 rng(seed);
  std::vector<ReportRow> rows;
  rows.reserve(static_cast<std::size_t>(count) * 6);
  verify_halfline_moment(rng, count, rows);
  verify_radial_profile(rng, count, rows);
  verify_pooled_window(rng, count, /*inner=*/true, rows);
  verify_pooled_window(rng, count, /*inner=*/false, rows);
  verify_heat_assembly(rng, count, rows);
  verify_rotation(rng, count, rows);

  std::string csv = "identity,params,closed_form,oracle,rel_err\n";
  const ReportRow* worst = nullptr;
  double worst_ratio = 0.0;
  bool all_pass = true;
  for (const ReportRow& row : rows) {
    csv += row.identity;
    csv += ',';
    csv += row.params;
    csv += ',';
    append_number(csv, row.closed_form);
    csv += ',';
    append_number(csv, row.oracle);
    csv += ',';
    append_number(csv, row.rel_err);
    csv += '\n';
    const double ratio = row.rel_err / row.tolerance;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      worst = &row;
    }
    if (row.rel_err > row.tolerance) all_pass = false;
  }
  write_file(join_path(out_dir, "identities.csv"), csv);
  std::cout << csv;
  if (!all_pass) {
    std::cerr << "verification failure: " << worst->identity << " (" +
                     worst->params + ") rel_err="
              << format_number(worst->rel_err)
              << " exceeds tolerance=" << format_number(worst->tolerance)
              << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

CliConfig parse_cli_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw std::invalid_argument("config: top level must be a JSON object");
  }
  expect_keys(doc, "", {"descriptor", "matching", "homotopy", "io"});

  CliConfig cfg;
  if (doc.contains("descriptor")) {
    parse_descriptor_section(doc.at("descriptor"), cfg.descriptor);
  }
  if (doc.contains("matching")) {
    const json& node = doc.at("matching");
    expect_keys(node, "matching", {"score"});
    if (node.contains("score")) {
      std::string name;
      assign(node, "matching", "score", name);
      try {
        cfg.score = score_mode_from_string(name);
      } catch (const std::invalid_argument&) {
        bad_key("matching.score",
                "must be \"correlation\" or \"distance\"");
      }
    }
  }
  if (doc.contains("homotopy")) {
    parse_homotopy_section(doc.at("homotopy"), cfg);
  }
  if (doc.contains("io")) {
    const json& node = doc.at("io");
    expect_keys(node, "io", {"signal", "template1", "template2"});
    assign(node, "io", "signal", cfg.signal_path);
    assign(node, "io", "template1", cfg.template1_path);
    assign(node, "io", "template2", cfg.template2_path);
  }
  if (cfg.descriptor.grid.width == 0) {
    cfg.descriptor.grid = default_descriptor_grid(cfg.descriptor.sigma_d0);
  }
  return cfg;
}

std::string cli_config_json(const CliConfig& cfg) {
  const json doc{
      {"descriptor",
       {{"sigma_r", cfg.descriptor.sigma_r},
        {"sigma_d", cfg.descriptor.sigma_d},
        {"sigma_d0", cfg.descriptor.sigma_d0},
        {"sigma_s", cfg.descriptor.sigma_s},
        {"sigma_a", cfg.descriptor.sigma_a},
        {"sigma_l", cfg.descriptor.sigma_l},
        {"n_beta_bins", cfg.descriptor.n_beta_bins},
        {"n_levels", cfg.descriptor.n_levels},
        {"n_scale_samples", cfg.descriptor.n_scale_samples},
        {"eps_grad", cfg.descriptor.eps_grad},
        {"full_heat_constant", cfg.descriptor.full_heat_constant},
        {"grid",
         {{"width", cfg.descriptor.grid.width},
          {"height", cfg.descriptor.grid.height},
          {"spacing", cfg.descriptor.grid.spacing},
          {"origin",
           {cfg.descriptor.grid.origin[0], cfg.descriptor.grid.origin[1]}}}}}},
      {"matching", {{"score", to_string(cfg.score)}}},
      {"homotopy",
       {{"lambda", cfg.lambda},
        {"schedule", cfg.schedule},
        {"grid",
         {{"c1_min", cfg.grid.c1_min},
          {"c1_max", cfg.grid.c1_max},
          {"theta_min", cfg.grid.theta_min},
          {"theta_max", cfg.grid.theta_max},
          {"n_c1", cfg.grid.n_c1},
          {"n_theta", cfg.grid.n_theta}}}}},
      {"io",
       {{"signal", cfg.signal_path},
        {"template1", cfg.template1_path},
        {"template2", cfg.template2_path}}}};
  return doc.dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "diffusion-based local image descriptors, template matching, and "
      "continuation optimization"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string kind_name = "sift";
  std::string score_name;
  std::vector<double> schedule_flag;
  double sigma = 0.0;
  bool landscape_only = false;
  bool with_csv = false;
  std::uint64_t seed = 42;
  int count = 100;
  std::string input_path, output_path, templates_dir, candidates_path;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file");
    sub->add_option("--out", out_dir,
                    "output directory (resolved config is echoed here)");
  };

  CLI::App* sub_descriptor = app.add_subcommand(
      "descriptor", "compute a descriptor of a PGM image and write the "
                    "JSON header + float32 payload pair");
  add_common(sub_descriptor);
  sub_descriptor->add_option("input", input_path, "input PGM image")
      ->required();
  sub_descriptor
      ->add_option("output", output_path,
                   "output header path (payload gets \".bin\" appended)")
      ->required();
  sub_descriptor->add_option(
      "--kind", kind_name,
      "descriptor kind: sift, dsp_sampled, dsp_closed_inner, "
      "dsp_closed_both, heat, df, raw_density");
  sub_descriptor->add_flag("--csv", with_csv,
                           "also write a CSV rendering of the descriptor");

  CLI::App* sub_match = app.add_subcommand(
      "match", "score candidate transforms against template images and "
               "print the match result JSON");
  add_common(sub_match);
  sub_match->add_option("image", input_path, "input PGM image")->required();
  sub_match
      ->add_option("templates", templates_dir,
                   "directory holding template .pgm files")
      ->required();
  sub_match
      ->add_option("candidates", candidates_path,
                   "JSON file listing candidate transforms")
      ->required();
  sub_match->add_option("--kind", kind_name, "descriptor kind");
  sub_match->add_option("--score", score_name,
                        "winner selection: correlation or distance");

  CLI::App* sub_toy = app.add_subcommand(
      "toy-diffuse", "run coarse-to-fine continuation on the toy matching "
                     "problem and write per-stage landscapes");
  add_common(sub_toy);
  sub_toy->add_option("--schedule", schedule_flag,
                      "comma-separated diffusion levels (overrides config)")
      ->delimiter(',');
  sub_toy->add_flag("--landscape-only", landscape_only,
                    "only write the landscape at --sigma, no continuation");
  sub_toy->add_option("--sigma", sigma,
                      "diffusion level for --landscape-only");

  CLI::App* sub_landscape = app.add_subcommand(
      "landscape", "write the toy cost landscape at one diffusion level");
  add_common(sub_landscape);
  sub_landscape->add_option("--sigma", sigma, "diffusion level (default 0)");

  CLI::App* sub_verify = app.add_subcommand(
      "verify-identities", "check every closed-form identity against "
                           "independent quadrature and report a CSV");
  add_common(sub_verify);
  sub_verify->add_option("--seed", seed, "random seed for parameter draws");
  sub_verify->add_option("--count", count, "draws per identity")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    CliConfig cfg = config_path.empty()
                        ? parse_cli_config("{}")
                        : parse_cli_config(read_file(config_path));
    if (sub_match->count("--score") > 0) {
      try {
        cfg.score = score_mode_from_string(score_name);
      } catch (const std::invalid_argument&) {
        std::cerr << "error: --score must be correlation or distance\n";
        return 2;
      }
    }
    if (!schedule_flag.empty()) cfg.schedule = schedule_flag;

    if (app.got_subcommand(sub_descriptor) || app.got_subcommand(sub_match)) {
      DescriptorKind kind;
      try {
        kind = descriptor_kind_from_string(kind_name);
      } catch (const std::invalid_argument&) {
        std::cerr << "error: unknown descriptor kind \"" << kind_name
                  << "\"; expected one of sift, dsp_sampled, "
                     "dsp_closed_inner, dsp_closed_both, heat, df, "
                     "raw_density\n";
        return 2;
      }
      if (app.got_subcommand(sub_descriptor)) {
        return cmd_descriptor(cfg, input_path, output_path, kind, with_csv,
                              out_dir);
      }
      return cmd_match(cfg, input_path, templates_dir, candidates_path, kind,
                       cfg.score, out_dir);
    }
    if (app.got_subcommand(sub_toy)) {
      return cmd_toy_diffuse(cfg, schedule_flag, landscape_only, sigma,
                             out_dir);
    }
    if (app.got_subcommand(sub_landscape)) {
      return cmd_landscape(cfg, sigma, out_dir);
    }
    return cmd_verify_identities(cfg, seed, count, out_dir);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace heatdesc
