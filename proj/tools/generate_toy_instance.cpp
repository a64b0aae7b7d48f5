// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// generate_toy_instance: writes the shipped 1D toy-matching instance
// (signal + two templates) as CSV files. The committed files under data/
// are this program's output; regenerate them after changing the formulas
// below.
//
// SPDX-License-Identifier: MIT

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "heatdesc/field.hpp"
#include "heatdesc/homotopy.hpp"

namespace {

double bump(double x, double center, double width) {
  const double d = x - center;
  return std::exp(-d * d / (2.0 * width * width));
}

// Single narrow bump at the origin. The bump is narrow enough (3 widths =
// 0.18) that over the whole shift range [-1, 1] it stays inside the
// template window [-1.2, 1.2], and the signal is flat at its base wherever
// a shifted template pixel can leave the signal's domain — so the matching
// energies E_k(theta) are exactly flat away from their single alignment
// dip (E1 at theta = 0.25, E2 at theta = 0). Flat plateaus produce no
// strict grid-local minima, leaving the landscape with exactly the two
// intended basins. The distractor bump carries more integrated squared
// mass than the signal bump, which keeps the c1 = 1 valley lower than the
// c1 = 0 valley *on average* — that is what lets heavy smoothing funnel
// the continuation toward the true basin.
// The distractor width is capped so its tail falls below one ulp of the
// base level beyond |x| = 1: the stored samples there are exactly the base
// value, so the shift-range truncation of the energy integrals removes
// only exactly-zero residuals and the energy plateaus stay bitwise flat
// all the way to the boundary of the shift range.
double signal(double x) { return 0.12 + 0.62 * bump(x, 0.0, 0.06); }

double distractor(double x) { return 0.12 + 0.62 * bump(x, 0.0, 0.11); }

template <typename Fn>
heatdesc::ScalarField sample_1d(double lo, double hi, double step, Fn&& fn) {
  const int n = static_cast<int>(std::lround((hi - lo) / step)) + 1;
  std::vector<double> values(n);
  for (int i = 0; i < n; ++i) {
    values[i] = fn(lo + i * step);
  }
  return heatdesc::ScalarField(heatdesc::FieldGrid{n, 1, step, {lo, 0.0}},
                               std::move(values));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::fprintf(stderr, "failed to write %s\n", path.c_str());
    std::exit(1);
  }
  std::printf("wrote %s\n", path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "data";
  const double step = 0.01;
  const auto f = sample_1d(-2.0, 2.0, step, signal);
  const auto p1 = sample_1d(-1.2, 1.2, step,
                            [](double x) { return signal(x - 0.25); });
  const auto p2 = sample_1d(-1.2, 1.2, step, distractor);
  write_file(dir + "/toy_signal.csv", heatdesc::signal_csv(f));
  write_file(dir + "/toy_template1.csv", heatdesc::signal_csv(p1));
  write_file(dir + "/toy_template2.csv", heatdesc::signal_csv(p2));
  return 0;
}
