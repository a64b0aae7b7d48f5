// heatdesc — diffusion-based local image descriptors and continuation optimization.
//
// matching: comparing descriptors and selecting, from a finite candidate set
// of transforms, the one whose warped-field descriptor best matches a raw
// template descriptor — plus the direct intensity residual used by the
// continuation optimizer's toy problem.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "heatdesc/descriptors.hpp"
#include "heatdesc/field.hpp"

namespace heatdesc {

/// One hypothesized transform, either a similarity or a general affine,
/// together with a human-readable label that identifies it in results.
using CandidateTransform = std::variant<SimilarityTransform, AffineTransform>;

struct Candidate {
  CandidateTransform transform;
  std::string label;
};

/// A finite set of transform hypotheses to score. Must be non-empty and
/// carry pairwise distinct labels; match_templates validates both.
struct CandidateSet {
  std::vector<Candidate> entries;
};

/// How match_templates picks the winner: by maximal correlation score or by
/// minimal normalized descriptor distance. The full correlation matrix is
/// reported either way; Distance additionally fills MatchResult::distances.
enum class ScoreMode {
  Correlation,
  Distance,
};

/// Parses "correlation" or "distance"; throws std::invalid_argument on
/// anything else.
ScoreMode score_mode_from_string(std::string_view name);

/// Canonical spelling, e.g. "correlation".
std::string to_string(ScoreMode mode);

/// Result of scoring every (candidate, template) pair.
///
/// scores[j][k] is the correlation of the descriptor of the field warped by
/// candidate j against the raw density of template k; j_star / k_star index
/// the selected pair. distances is present only in Distance mode and holds
/// the normalized descriptor distances (NaN where a descriptor had zero
/// norm and the distance is undefined).
struct MatchResult {
  int j_star = 0;
  int k_star = 0;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> scores;
  std::optional<std::vector<std::vector<double>>> distances;
};

/// Normalized L2 distance between two descriptors on identical domains:
///
///   d(h1, h2) = || h1/||h1|| - h2/||h2|| ||
///
/// with norms and the distance taken in the Riemann sense over the
/// (beta, x) domain (cell weight = beta step x spacing^2). The value lies
/// in [0, 2]: 0 for positively proportional descriptors, 2 for
/// antiproportional ones. Throws std::invalid_argument if the descriptors'
/// grids or orientation axes differ, and std::domain_error if either
/// descriptor has zero norm.
double descriptor_distance(const Descriptor& h1, const Descriptor& h2);

/// Riemann inner product of two descriptors over their common domain:
///
///   <h1, h2> = sum_{b,i,j} h1 h2 * dbeta * dx^2.
///
/// Throws std::invalid_argument if the domains differ.
double correlation(const Descriptor& h1, const Descriptor& h2);

/// Score every candidate transform against every template.
///
/// For each candidate tau_j the field is resampled as f o tau_j on the
/// field's own grid, its descriptor of the requested kind is computed with
/// `params`, and scores[j][k] records the correlation against the raw
/// density of templates[k] computed with the same `params`. Template
/// descriptors stay unsmoothed: the comparison pits a pooled / diffused
/// field descriptor against a sharp template, which is what makes the
/// pooled variants forgiving of transform error.
///
/// The winner (j_star, k_star) maximizes the correlation score, or in
/// Distance mode minimizes the normalized descriptor distance; ties break
/// toward the smallest (j, k) lexicographically. Pairs whose distance is
/// undefined (zero-norm descriptor) hold NaN and never win. Throws
/// std::invalid_argument for an empty candidate set or duplicate labels,
/// and std::runtime_error if no (candidate, template) pair produced a
/// finite selection value.
MatchResult match_templates(const ScalarField& field,
                            const CandidateSet& candidates,
                            const std::vector<ScalarField>& templates,
                            DescriptorKind kind, const DescriptorParams& params,
                            ScoreMode mode = ScoreMode::Correlation);

/// Direct intensity residual with its coverage diagnostics.
///
///   value    = sum_{covered x} (f(tau(x)) - p(x))^2 * dx^2
///   coverage = covered pixels / template pixels
///
/// summed over the template's grid, counting only pixels whose warped
/// sample landed inside the field's domain. low_coverage flags
/// coverage < 0.5, below which the residual compares too little of the
/// template to mean much.
struct IntensityEnergy {
  double value = 0.0;
  double coverage = 0.0;
  bool low_coverage = false;
};

/// Intensity residual of `field` warped by `t` against `tmpl` on the
/// template's grid. Throws std::domain_error if no template pixel maps
/// into the field's domain (and, for the affine overload, if t is
/// singular).
IntensityEnergy intensity_energy_detail(const ScalarField& field,
                                        const ScalarField& tmpl,
                                        const AffineTransform& t);
IntensityEnergy intensity_energy_detail(const ScalarField& field,
                                        const ScalarField& tmpl,
                                        const SimilarityTransform& t);

/// The residual value alone; same contract as intensity_energy_detail.
double intensity_energy(const ScalarField& field, const ScalarField& tmpl,
                        const AffineTransform& t);
double intensity_energy(const ScalarField& field, const ScalarField& tmpl,
                        const SimilarityTransform& t);

/// JSON rendering of a MatchResult:
///
///   {"j_star": .., "k_star": .., "labels": [..],
///    "scores": [[..]], "distances": [[..]] | null}
///
/// Pretty-printed with two-space indent and a trailing newline.
std::string match_result_json(const MatchResult& result);

}  // namespace heatdesc
