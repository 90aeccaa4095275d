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

#ifndef CVTOOL_CONFIG_H
#define CVTOOL_CONFIG_H

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cvtool/errors.h"
#include "cvtool/operator_core.h"
#include "cvtool/scenarios.h"
#include "json.hpp"

namespace cvtool::cli {

/// A malformed scenario document. what() starts with the offending field
/// path, e.g. "context.kraus[1][0][1]: expected [re, im]".
class ConfigError : public CvError {
 public:
  ConfigError(const std::string& path, const std::string& message)
      : CvError(path.empty() ? message : path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

enum class ContextKind {
  kKraus,
  kPovm,
  kPolarization,
  kGaussianDetector,
  kBoxDetector,
  kQpc,
};

struct ContextSpec {
  ContextKind kind = ContextKind::kPolarization;
  /// Kraus operators or POVM elements for the explicit kinds.
  std::vector<ComplexMatrix> operators;
  double gamma = 0.0;
  /// sigma for the Gaussian detector, w for the box.
  double width = 0.0;
  double coupling = 0.0;
  /// Raw QPC parameters I1, I2, S_I, t.
  double current1 = 1.0;
  double current2 = -1.0;
  double noise_power = 2.0;
  double averaging_time = 1.0;

  bool is_detector() const {
    return kind == ContextKind::kGaussianDetector ||
           kind == ContextKind::kBoxDetector || kind == ContextKind::kQpc;
  }
};

enum class StateKind { kMatrix, kVector, kPsi };

struct StateSpec {
  StateKind kind = StateKind::kPsi;
  ComplexMatrix matrix;
  ComplexVector vector;
  double angle = 0.0;
};

enum class PostselectionKind { kContext, kF, kXRotation };

struct PostselectionSpec {
  PostselectionKind kind = PostselectionKind::kF;
  ContextSpec context;
  std::size_t index = 0;
  double angle = 0.0;
};

struct OptionsSpec {
  /// Detector discretization grid (midpoint rule).
  std::optional<Grid> grid;
  std::optional<double> svd_tol;
  std::optional<std::uint64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
};

struct ScenarioConfig {
  /// Defaults to sigma_z.
  std::optional<ComplexMatrix> observable;
  ContextSpec context;
  StateSpec state;
  std::optional<PostselectionSpec> postselection;
  OptionsSpec options;
};

ScenarioConfig parse_config(const nlohmann::json& doc);
/// Parses JSON text; syntax errors report line and column.
ScenarioConfig parse_config_text(std::string_view text);
ScenarioConfig load_config(const std::string& path);

nlohmann::json to_json(const ScenarioConfig& config);

/// Sets a named scalar parameter (gamma, strength, coupling, sigma, width,
/// tau, alpha, theta). Throws ConfigError when the config has no such
/// parameter.
void set_parameter(ScenarioConfig& config, std::string_view name, double value);
std::vector<std::string> parameter_names();

/// Domain objects built from a config.
struct Scenario {
  Observable observable;
  MeasurementContext context;
  /// Pointer positions of the outcomes for detector contexts; empty otherwise.
  std::vector<double> positions;
  DensityOperator state;
  std::optional<MeasurementContext> postselection;
  std::size_t postselect_index = 0;
};

/// Builds the domain objects. `svd_tol` is not used here; detector grids use
/// config.options.grid or the default grid of the distribution.
Scenario build_scenario(const ScenarioConfig& config);

/// MIN:MAX:POINTS.
Grid parse_grid_spec(std::string_view text);

/// Tolerance from CVTOOL_DEFAULT_TOL, or kDefaultSvdTolerance when unset.
double default_tolerance_from_env();

}  // namespace cvtool::cli

#endif  // CVTOOL_CONFIG_H
