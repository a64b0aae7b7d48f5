// heatdesc — diffusion-based local image descriptors and continuation
// optimization.
//
// cli: command-line front end wiring configuration, file I/O, and the
// verification/report workflows around the library modules.
//
// SPDX-License-Identifier: MIT

#pragma once

#include <string>
#include <vector>

#include "heatdesc/descriptors.hpp"
#include "heatdesc/homotopy.hpp"
#include "heatdesc/matching.hpp"

namespace heatdesc {

/// Resolved tool configuration: descriptor parameters, the match score mode,
/// and the toy-continuation setup (penalty weight, schedule, landscape grid,
/// input paths). Defaults reproduce the library defaults; a JSON config file
/// overrides fields section by section.
struct CliConfig {
  DescriptorParams descriptor;
  ScoreMode score = ScoreMode::Correlation;
  double lambda = 1.0;
  std::vector<double> schedule;  ///< empty means DiffusionSchedule::geometric()
  LandscapeSpec grid;
  std::string signal_path = "data/toy_signal.csv";
  std::string template1_path = "data/toy_template1.csv";
  std::string template2_path = "data/toy_template2.csv";
};

/// Parse a JSON config document. Sections: "descriptor", "matching",
/// "homotopy", "io"; every key is optional and unmentioned fields keep their
/// defaults. Unknown sections or keys are rejected, every explicitly given
/// width parameter must be positive, and counts must be in range — all
/// violations throw std::invalid_argument naming the offending key. The
/// descriptor grid resolves to default_descriptor_grid(sigma_d0) when the
/// config does not pin one.
CliConfig parse_cli_config(const std::string& json_text);

/// Canonical JSON rendering of a resolved config. Deterministic (sorted
/// keys, two-space indent, trailing newline) and accepted back by
/// parse_cli_config unchanged.
std::string cli_config_json(const CliConfig& config);

/// Entry point of the command-line tool: subcommands descriptor, match,
/// toy-diffuse, landscape, verify-identities. Returns the process exit
/// code: 0 success, 1 verification failure, 2 usage or validation error.
/// Diagnostics go to stderr; results go to stdout and to files under --out.
int run_cli(int argc, const char* const* argv);

}  // namespace heatdesc
