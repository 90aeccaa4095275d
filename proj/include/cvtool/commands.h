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

#ifndef CVTOOL_COMMANDS_H
#define CVTOOL_COMMANDS_H

#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cvtool/config.h"

namespace cvtool::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotReconstructable = 2;
inline constexpr int kExitZeroPostselection = 3;
inline constexpr int kExitCheckFailed = 4;

enum class OutputFormat { kJson, kCsv };

OutputFormat parse_format(std::string_view text);

/// Command-line overrides shared by every command. Unset fields fall back to
/// the config's options, then to the built-in defaults.
struct GlobalOptions {
  std::optional<OutputFormat> format;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<double> svd_tol;
  std::optional<Grid> grid;
  bool strict = false;
};

/// Every command writes its report to `out` and diagnostics to `err`, and
/// returns the process exit code.

int cmd_solve(const ScenarioConfig& config, const GlobalOptions& options,
              std::ostream& out, std::ostream& err);

/// With `mc_trials`, adds a Monte Carlo estimate next to the exact value.
int cmd_conditioned(const ScenarioConfig& config, const GlobalOptions& options,
                    std::optional<std::uint64_t> mc_trials, std::ostream& out,
                    std::ostream& err);

int cmd_moment(const ScenarioConfig& config, const GlobalOptions& options,
               int order, std::optional<std::uint64_t> mc_trials,
               std::ostream& out, std::ostream& err);

struct SweepSpec {
  std::string parameter;
  double from = 0.0;
  double to = 1.0;
  std::size_t steps = 11;
};

int cmd_sweep(const ScenarioConfig& config, const GlobalOptions& options,
              const SweepSpec& sweep, std::ostream& out, std::ostream& err);

int cmd_mc(const ScenarioConfig& config, const GlobalOptions& options,
           std::ostream& out, std::ostream& err);

struct Fig1Options {
  double coupling = 0.1;
  double sigma = 0.3;
  /// Box width; defaults to sigma.
  std::optional<double> box_width;
  double alpha = 47.0 * std::numbers::pi / 32.0;
  double postselection_angle = std::numbers::pi / 2.0;
  double strong_coupling = 1.0;
};

/// Pointer-detector profiles for a Gaussian and a box distribution. The
/// optional grid sets the sample points, MIN to MAX inclusive.
int cmd_fig1(const Fig1Options& fig, const GlobalOptions& options,
             std::ostream& out, std::ostream& err);

struct Fig2Options {
  std::vector<double> taus = {0.01, 0.5, 2.0, 10.0};
};

/// QPC contextual values versus u for several measurement times. The
/// optional grid sets the u samples, MIN to MAX inclusive (default -2:2:401).
int cmd_fig2(const Fig2Options& fig, const GlobalOptions& options,
             std::ostream& out, std::ostream& err);

/// Runs a verification suite by name ("all" runs every suite).
int cmd_verify(std::string_view suite, std::ostream& out, std::ostream& err);

}  // namespace cvtool::cli

#endif  // CVTOOL_COMMANDS_H
