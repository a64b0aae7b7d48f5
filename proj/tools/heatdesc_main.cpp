// heatdesc — diffusion-based local image descriptors and continuation
// optimization.
//
// Thin executable wrapper around the library's command-line entry point.
//
// SPDX-License-Identifier: MIT

#include "heatdesc/cli.hpp"

int main(int argc, char** argv) { return heatdesc::run_cli(argc, argv); }
