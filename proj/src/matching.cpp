// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// matching: descriptor comparison, candidate-transform selection, and the
// direct intensity residual.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_set>

#include "json.hpp"

namespace heatdesc {

namespace {

// Descriptors are comparable only on identical domains. Both sides of every
// comparison here are built through the same constructors, so the check is
// exact equality of the grid fields and the orientation-axis samples.
void require_same_domain(const Descriptor& h1, const Descriptor& h2) {
  const bool same_grid = h1.grid.width == h2.grid.width &&
                         h1.grid.height == h2.grid.height &&
                         h1.grid.spacing == h2.grid.spacing &&
                         h1.grid.origin == h2.grid.origin;
  if (!same_grid || h1.beta_centers != h2.beta_centers) {
    throw std::invalid_argument(
        "descriptors are defined on different (beta, x) domains");
  }
}

// Riemann cell weight: the beta axis is uniformly spaced by construction
// (bin centers of [0, 2pi) or evenly spread intensity levels), so the step
// is the gap between the first two samples.
double cell_weight(const Descriptor& h) {
  if (h.beta_centers.size() < 2) {
    throw std::invalid_argument(
        "descriptor needs at least two beta samples for a Riemann sum");
  }
  const double step = h.beta_centers[1] - h.beta_centers[0];
  return step * h.grid.spacing * h.grid.spacing;
}

double weighted_dot(const Descriptor& h1, const Descriptor& h2) {
  double acc = 0.0;
  for (std::size_t i = 0; i < h1.values.size(); ++i) {
    acc += h1.values[i] * h2.values[i];
  }
  return acc * cell_weight(h1);
}

template <typename Transform>
IntensityEnergy intensity_energy_impl(const ScalarField& field,
                                      const ScalarField& tmpl,
                                      const Transform& t) {
  if constexpr (std::is_same_v<Transform, AffineTransform>) {
    if (t.det() == 0.0) {
      throw std::domain_error("affine transform is singular");
    }
  }
  const FieldGrid& g = tmpl.grid();
  double acc = 0.0;
  long covered = 0;
  for (int iy = 0; iy < g.height; ++iy) {
    for (int ix = 0; ix < g.width; ++ix) {
      const Vec2 x{g.origin[0] + ix * g.spacing, g.origin[1] + iy * g.spacing};
      const auto s = sample_bilinear(field, t.apply(x));
      if (!s.inside) continue;
      const double r = s.value - tmpl.at(ix, iy);
      acc += r * r;
      ++covered;
    }
  }
  if (covered == 0) {
    throw std::domain_error(
        "no template pixel maps into the field's domain");
  }
  const long total = static_cast<long>(g.width) * g.height;
  IntensityEnergy e;
  e.value = acc * g.spacing * g.spacing;
  e.coverage = static_cast<double>(covered) / static_cast<double>(total);
  e.low_coverage = e.coverage < 0.5;
  return e;
}

}  // namespace

ScoreMode score_mode_from_string(std::string_view name) {
  if (name == "correlation") return ScoreMode::Correlation;
  if (name == "distance") return ScoreMode::Distance;
  throw std::invalid_argument("unknown score mode: " + std::string(name));
}

std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::Correlation:
      return "correlation";
    case ScoreMode::Distance:
      return "distance";
  }
  throw std::invalid_argument("unknown score mode");
}

double descriptor_distance(const Descriptor& h1, const Descriptor& h2) {
  require_same_domain(h1, h2);
  const double w = cell_weight(h1);
  double q1 = 0.0;
  double q2 = 0.0;
  for (std::size_t i = 0; i < h1.values.size(); ++i) {
    q1 += h1.values[i] * h1.values[i];
    q2 += h2.values[i] * h2.values[i];
  }
  const double n1 = std::sqrt(w * q1);
  const double n2 = std::sqrt(w * q2);
  if (n1 == 0.0 || n2 == 0.0) {
    throw std::domain_error("zero-norm descriptor has no defined distance");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < h1.values.size(); ++i) {
    const double d = h1.values[i] / n1 - h2.values[i] / n2;
    acc += d * d;
  }
  return std::sqrt(std::max(0.0, w * acc));
}

double correlation(const Descriptor& h1, const Descriptor& h2) {
  require_same_domain(h1, h2);
  return weighted_dot(h1, h2);
}

MatchResult match_templates(const ScalarField& field,
                            const CandidateSet& candidates,
                            const std::vector<ScalarField>& templates,
                            DescriptorKind kind, const DescriptorParams& params,
                            ScoreMode mode) {
  if (candidates.entries.empty()) {
    throw std::invalid_argument("candidate set is empty");
  }
  if (templates.empty()) {
    throw std::invalid_argument("template list is empty");
  }
  std::unordered_set<std::string> seen;
  for (const Candidate& c : candidates.entries) {
    if (!seen.insert(c.label).second) {
      throw std::invalid_argument("duplicate candidate label: " + c.label);
    }
  }

  std::vector<Descriptor> template_descriptors;
  template_descriptors.reserve(templates.size());
  for (const ScalarField& tmpl : templates) {
    template_descriptors.push_back(raw_density_descriptor(tmpl, params));
  }

  const std::size_t nj = candidates.entries.size();
  const std::size_t nk = templates.size();
  MatchResult result;
  result.labels.reserve(nj);
  result.scores.assign(nj, std::vector<double>(nk, 0.0));
  if (mode == ScoreMode::Distance) {
    result.distances.emplace(
        nj, std::vector<double>(nk, std::numeric_limits<double>::quiet_NaN()));
  }

  for (std::size_t j = 0; j < nj; ++j) {
    const Candidate& c = candidates.entries[j];
    result.labels.push_back(c.label);
    const WarpResult warped = std::visit(
        [&](const auto& t) { return warp(field, t, field.grid()); },
        c.transform);
    const Descriptor hj = compute_descriptor(kind, warped.field, params);
    for (std::size_t k = 0; k < nk; ++k) {
      result.scores[j][k] = correlation(hj, template_descriptors[k]);
      if (mode == ScoreMode::Distance) {
        try {
          (*result.distances)[j][k] =
              descriptor_distance(hj, template_descriptors[k]);
        } catch (const std::domain_error&) {
          // Zero-norm descriptor: the pair stays NaN and cannot win.
        }
      }
    }
  }

  // Select the winner: maximal correlation, or in Distance mode minimal
  // distance. First strictly better pair wins, so ties resolve toward the
  // smallest (j, k) in lexicographic order; NaN never compares better.
  bool found = false;
  double best = 0.0;
  for (std::size_t j = 0; j < nj; ++j) {
    for (std::size_t k = 0; k < nk; ++k) {
      const double v = mode == ScoreMode::Distance ? (*result.distances)[j][k]
                                                   : result.scores[j][k];
      if (!std::isfinite(v)) continue;
      const bool better =
          !found || (mode == ScoreMode::Distance ? v < best : v > best);
      if (better) {
        found = true;
        best = v;
        result.j_star = static_cast<int>(j);
        result.k_star = static_cast<int>(k);
      }
    }
  }
  if (!found) {
    throw std::runtime_error(
        "no candidate/template pair produced a finite selection value");
  }
  return result;
}

IntensityEnergy intensity_energy_detail(const ScalarField& field,
                                        const ScalarField& tmpl,
                                        const AffineTransform& t) {
  return intensity_energy_impl(field, tmpl, t);
}

IntensityEnergy intensity_energy_detail(const ScalarField& field,
                                        const ScalarField& tmpl,
                                        const SimilarityTransform& t) {
  return intensity_energy_impl(field, tmpl, t);
}

double intensity_energy(const ScalarField& field, const ScalarField& tmpl,
                        const AffineTransform& t) {
  return intensity_energy_impl(field, tmpl, t).value;
}

double intensity_energy(const ScalarField& field, const ScalarField& tmpl,
                        const SimilarityTransform& t) {
  return intensity_energy_impl(field, tmpl, t).value;
}

std::string match_result_json(const MatchResult& result) {
  nlohmann::json j;
  j["j_star"] = result.j_star;
  j["k_star"] = result.k_star;
  j["labels"] = result.labels;
  j["scores"] = result.scores;
  if (result.distances.has_value()) {
    j["distances"] = *result.distances;
  } else {
    j["distances"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace heatdesc
