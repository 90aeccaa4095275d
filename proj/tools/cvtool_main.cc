// Copyright 2026 The cvtool Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cvtool/commands.h"
#include "cvtool/config.h"

namespace {

using namespace cvtool::cli;

struct RawGlobals {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> svd_tol;
  std::string grid;
  bool strict = false;
};

GlobalOptions resolve(const RawGlobals& raw) {
  GlobalOptions out;
  if (!raw.format.empty()) out.format = parse_format(raw.format);
  out.trials = raw.trials;
  out.seed = raw.seed;
  out.threads = raw.threads;
  out.svd_tol = raw.svd_tol;
  if (!raw.grid.empty()) out.grid = parse_grid_spec(raw.grid);
  out.strict = raw.strict;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contextual values of quantum observables", "cvtool"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string("cvtool ") + CVTOOL_VERSION);

  RawGlobals raw;
  app.add_option("--config", raw.config_path, "Scenario config (JSON)");
  app.add_option("--out", raw.out_path, "Write the report to this file");
  app.add_option("--format", raw.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--trials", raw.trials, "Monte Carlo trials")->check(CLI::PositiveNumber);
  app.add_option("--seed", raw.seed, "Monte Carlo seed");
  app.add_option("--threads", raw.threads, "Monte Carlo worker threads")
      ->check(CLI::Range(1u, 1024u));
  app.add_option("--svd-tol", raw.svd_tol, "Relative singular value cutoff")
      ->check(CLI::PositiveNumber);
  app.add_option("--grid", raw.grid, "Sample grid MIN:MAX:POINTS");
  app.add_flag("--strict", raw.strict, "Treat inexact contextual values as errors");

  auto* solve = app.add_subcommand("solve", "Solve for minimum-norm contextual values");
  auto* conditioned = app.add_subcommand("conditioned", "Conditioned average");
  std::optional<std::uint64_t> cond_mc;
  conditioned->add_option("--mc", cond_mc, "Add a Monte Carlo estimate with N trials")
      ->check(CLI::PositiveNumber);
  auto* moment = app.add_subcommand("moment", "Reconstructed moment of the observable");
  int order = 1;
  std::optional<std::uint64_t> moment_mc;
  moment->add_option("--order", order, "Moment order")->required()->check(CLI::Range(0, 8));
  moment->add_option("--mc", moment_mc, "Add a Monte Carlo estimate with N trials")
      ->check(CLI::PositiveNumber);
  auto* sweep = app.add_subcommand("sweep", "Vary one parameter over a range");
  SweepSpec sweep_spec;
  sweep->add_option("--param", sweep_spec.parameter, "Parameter name")
      ->required()
      ->check(CLI::IsMember(parameter_names()));
  sweep->add_option("--from", sweep_spec.from, "First value")->required();
  sweep->add_option("--to", sweep_spec.to, "Last value")->required();
  sweep->add_option("--steps", sweep_spec.steps, "Number of values")->check(CLI::PositiveNumber);
  auto* mc = app.add_subcommand("mc", "Monte Carlo estimates next to exact values");
  auto* fig1 = app.add_subcommand("fig1", "Pointer-detector contextual value profiles");
  Fig1Options fig1_opts;
  std::optional<double> box_width;
  fig1->add_option("--coupling", fig1_opts.coupling, "Coupling g");
  fig1->add_option("--sigma", fig1_opts.sigma, "Gaussian width")->check(CLI::PositiveNumber);
  fig1->add_option("--box-width", box_width, "Box width (defaults to sigma)")
      ->check(CLI::PositiveNumber);
  fig1->add_option("--alpha", fig1_opts.alpha, "Preparation angle");
  fig1->add_option("--postselection-angle", fig1_opts.postselection_angle,
                   "Postselection angle");
  fig1->add_option("--strong-coupling", fig1_opts.strong_coupling, "Coupling for strong columns");
  auto* fig2 = app.add_subcommand("fig2", "QPC contextual values versus u");
  Fig2Options fig2_opts;
  fig2->add_option("--tau", fig2_opts.taus, "Measurement times")->delimiter(',');
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  verify->add_option("suite", suite, "Suite name or all")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  GlobalOptions options;
  std::optional<ScenarioConfig> config;
  try {
    options = resolve(raw);
    if (!raw.config_path.empty()) config = load_config(raw.config_path);
  } catch (const cvtool::CvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }

  std::ofstream file;
  if (!raw.out_path.empty()) {
    file.open(raw.out_path);
    if (!file) {
      std::cerr << "error: cannot open " << raw.out_path << " for writing\n";
      return kExitError;
    }
  }
  std::ostream& out = raw.out_path.empty() ? std::cout : file;

  const bool needs_config = solve->parsed() || conditioned->parsed() || moment->parsed() ||
                            sweep->parsed() || mc->parsed();
  if (needs_config && !config) {
    std::cerr << "error: this command requires --config\n";
    return kExitError;
  }

  int code = kExitOk;
  if (solve->parsed()) {
    code = cmd_solve(*config, options, out, std::cerr);
  } else if (conditioned->parsed()) {
    code = cmd_conditioned(*config, options, cond_mc, out, std::cerr);
  } else if (moment->parsed()) {
    code = cmd_moment(*config, options, order, moment_mc, out, std::cerr);
  } else if (sweep->parsed()) {
    code = cmd_sweep(*config, options, sweep_spec, out, std::cerr);
  } else if (mc->parsed()) {
    code = cmd_mc(*config, options, out, std::cerr);
  } else if (fig1->parsed()) {
    fig1_opts.box_width = box_width;
    code = cmd_fig1(fig1_opts, options, out, std::cerr);
  } else if (fig2->parsed()) {
    code = cmd_fig2(fig2_opts, options, out, std::cerr);
  } else if (verify->parsed()) {
    code = cmd_verify(suite, out, std::cerr);
  }
  out.flush();
  return code;
}
