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

#include "cvtool/config.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cvtool/cv_solver.h"

namespace cvtool::cli {
namespace {

using nlohmann::json;

// A JSON value together with its path in the document, for diagnostics.
class Node {
 public:
  Node(const json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const json& value() const { return value_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(path_, message);
  }

  bool has(const char* key) const { return value_.contains(key); }

  Node at(const char* key) const {
    if (!value_.contains(key)) fail(std::string("missing field \"") + key + "\"");
    return child(key);
  }

  Node child(const char* key) const {
    return Node(value_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  Node element(std::size_t i) const {
    return Node(value_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  void expect_object(std::initializer_list<const char*> allowed) const {
    if (!value_.is_object()) fail("expected an object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : value_.items()) {
      if (!keys.count(item.key())) fail("unknown field \"" + item.key() + "\"");
    }
  }

  std::size_t array_size() const {
    if (!value_.is_array()) fail("expected an array");
    return value_.size();
  }

  double number() const {
    if (!value_.is_number()) fail("expected a number");
    const double x = value_.get<double>();
    if (!std::isfinite(x)) fail("number is not finite");
    return x;
  }

  double positive() const {
    const double x = number();
    if (!(x > 0.0)) fail("must be positive");
    return x;
  }

  std::uint64_t unsigned_integer() const {
    if (!value_.is_number_unsigned() &&
        !(value_.is_number_integer() && value_.get<std::int64_t>() >= 0)) {
      fail("expected a non-negative integer");
    }
    return value_.get<std::uint64_t>();
  }

  std::string string() const {
    if (!value_.is_string()) fail("expected a string");
    return value_.get<std::string>();
  }

  Complex complex() const {
    if (value_.is_number()) return Complex(number(), 0.0);
    if (!value_.is_array() || value_.size() != 2) fail("expected [re, im]");
    return Complex(element(0).number(), element(1).number());
  }

  ComplexVector vector() const {
    const std::size_t n = array_size();
    if (n == 0) fail("vector is empty");
    ComplexVector v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = element(i).complex();
    return v;
  }

  ComplexMatrix matrix() const {
    const std::size_t rows = array_size();
    if (rows == 0) fail("matrix is empty");
    ComplexMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      const Node row = element(r);
      if (row.array_size() != rows) row.fail("matrix must be square");
      for (std::size_t c = 0; c < rows; ++c) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row.element(c).complex();
      }
    }
    return m;
  }

  std::vector<ComplexMatrix> matrix_list() const {
    const std::size_t n = array_size();
    if (n == 0) fail("operator list is empty");
    std::vector<ComplexMatrix> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(element(i).matrix());
    const Eigen::Index d = out.front().rows();
    for (std::size_t i = 1; i < n; ++i) {
      if (out[i].rows() != d) element(i).fail("operator dimensions differ");
    }
    return out;
  }

 private:
  const json& value_;
  std::string path_;
};

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const ComplexVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

ComplexMatrix named_observable(const Node& node) {
  const std::string name = node.string();
  if (name == "sigma_x") return pauli::x();
  if (name == "sigma_y") return pauli::y();
  if (name == "sigma_z") return pauli::z();
  node.fail("unknown named observable \"" + name + "\" (sigma_x, sigma_y, sigma_z)");
}

double gamma_field(const Node& node) {
  const double gamma = node.number();
  if (!(gamma > 0.0 && gamma <= 1.0)) node.fail("gamma must lie in (0, 1]");
  return gamma;
}

ContextSpec parse_context(const Node& node) {
  if (!node.value().is_object()) node.fail("expected an object");
  ContextSpec spec;
  if (node.has("kraus")) {
    node.expect_object({"kraus"});
    spec.kind = ContextKind::kKraus;
    spec.operators = node.child("kraus").matrix_list();
    return spec;
  }
  if (node.has("povm")) {
    node.expect_object({"povm", "kraus_convention"});
    if (node.has("kraus_convention") &&
        node.child("kraus_convention").string() != "sqrt") {
      node.child("kraus_convention").fail("only the \"sqrt\" convention is supported");
    }
    spec.kind = ContextKind::kPovm;
    spec.operators = node.child("povm").matrix_list();
    return spec;
  }
  if (!node.has("builder")) node.fail("expected one of \"kraus\", \"povm\", \"builder\"");
  const Node builder = node.child("builder");
  const std::string name = builder.string();
  if (name == "polarization") {
    node.expect_object({"builder", "gamma", "strength"});
    spec.kind = ContextKind::kPolarization;
    if (node.has("gamma") == node.has("strength")) {
      node.fail("polarization needs exactly one of \"gamma\", \"strength\"");
    }
    if (node.has("gamma")) {
      spec.gamma = gamma_field(node.child("gamma"));
    } else {
      const Node strength = node.child("strength");
      const double g = strength.number();
      if (!(g > -1.0 && g <= 1.0)) strength.fail("strength must lie in (-1, 1]");
      spec.gamma = polarization_gamma(g);
    }
  } else if (name == "gaussian-detector") {
    node.expect_object({"builder", "sigma", "coupling"});
    spec.kind = ContextKind::kGaussianDetector;
    spec.width = node.at("sigma").positive();
    spec.coupling = node.at("coupling").number();
  } else if (name == "box-detector") {
    node.expect_object({"builder", "width", "coupling"});
    spec.kind = ContextKind::kBoxDetector;
    spec.width = node.at("width").positive();
    spec.coupling = node.at("coupling").number();
  } else if (name == "qpc") {
    node.expect_object({"builder", "tau", "I1", "I2", "S_I", "t"});
    spec.kind = ContextKind::kQpc;
    if (node.has("tau")) {
      for (const char* raw : {"I1", "I2", "S_I", "t"}) {
        if (node.has(raw)) node.fail("give either \"tau\" or the raw currents, not both");
      }
      const QpcParams p = QpcParams::from_tau(node.child("tau").positive());
      spec.current1 = p.current1();
      spec.current2 = p.current2();
      spec.noise_power = p.noise_power();
      spec.averaging_time = p.averaging_time();
    } else {
      spec.current1 = node.at("I1").number();
      spec.current2 = node.at("I2").number();
      if (spec.current1 == spec.current2) node.child("I2").fail("I1 and I2 must differ");
      spec.noise_power = node.at("S_I").positive();
      spec.averaging_time = node.at("t").positive();
    }
  } else {
    builder.fail("unknown builder \"" + name +
                 "\" (polarization, gaussian-detector, box-detector, qpc)");
  }
  return spec;
}

json context_json(const ContextSpec& spec) {
  switch (spec.kind) {
    case ContextKind::kKraus:
    case ContextKind::kPovm: {
      json list = json::array();
      for (const auto& m : spec.operators) list.push_back(matrix_json(m));
      if (spec.kind == ContextKind::kKraus) return {{"kraus", list}};
      return {{"povm", list}, {"kraus_convention", "sqrt"}};
    }
    case ContextKind::kPolarization:
      return {{"builder", "polarization"}, {"gamma", spec.gamma}};
    case ContextKind::kGaussianDetector:
      return {{"builder", "gaussian-detector"}, {"sigma", spec.width},
              {"coupling", spec.coupling}};
    case ContextKind::kBoxDetector:
      return {{"builder", "box-detector"}, {"width", spec.width},
              {"coupling", spec.coupling}};
    case ContextKind::kQpc:
      return {{"builder", "qpc"},        {"I1", spec.current1},
              {"I2", spec.current2},     {"S_I", spec.noise_power},
              {"t", spec.averaging_time}};
  }
  return {};
}

StateSpec parse_state(const Node& node) {
  node.expect_object({"psi", "vector", "matrix"});
  if (node.value().size() != 1) node.fail("expected exactly one of \"psi\", \"vector\", \"matrix\"");
  StateSpec spec;
  if (node.has("psi")) {
    spec.kind = StateKind::kPsi;
    spec.angle = node.child("psi").number();
  } else if (node.has("vector")) {
    spec.kind = StateKind::kVector;
    spec.vector = node.child("vector").vector();
    if (spec.vector.norm() == 0.0) node.child("vector").fail("state vector is zero");
  } else {
    spec.kind = StateKind::kMatrix;
    spec.matrix = node.child("matrix").matrix();
  }
  return spec;
}

json state_json(const StateSpec& spec) {
  switch (spec.kind) {
    case StateKind::kPsi:
      return {{"psi", spec.angle}};
    case StateKind::kVector:
      return {{"vector", vector_json(spec.vector)}};
    case StateKind::kMatrix:
      return {{"matrix", matrix_json(spec.matrix)}};
  }
  return {};
}

PostselectionSpec parse_postselection(const Node& node) {
  node.expect_object({"f", "x_rotation", "context", "index"});
  const int forms = node.has("f") + node.has("x_rotation") + node.has("context");
  if (forms != 1) node.fail("expected exactly one of \"f\", \"x_rotation\", \"context\"");
  PostselectionSpec spec;
  if (node.has("f")) {
    if (node.has("index")) node.child("index").fail("f(theta) postselection has no index");
    spec.kind = PostselectionKind::kF;
    spec.angle = node.child("f").number();
  } else if (node.has("x_rotation")) {
    spec.kind = PostselectionKind::kXRotation;
    spec.angle = node.child("x_rotation").number();
    if (node.has("index")) {
      spec.index = static_cast<std::size_t>(node.child("index").unsigned_integer());
    }
  } else {
    spec.kind = PostselectionKind::kContext;
    spec.context = parse_context(node.child("context"));
    if (spec.context.is_detector()) {
      node.child("context").fail("detector contexts cannot be used for postselection");
    }
    spec.index = static_cast<std::size_t>(node.at("index").unsigned_integer());
  }
  return spec;
}

json postselection_json(const PostselectionSpec& spec) {
  switch (spec.kind) {
    case PostselectionKind::kF:
      return {{"f", spec.angle}};
    case PostselectionKind::kXRotation:
      return {{"x_rotation", spec.angle}, {"index", spec.index}};
    case PostselectionKind::kContext:
      return {{"context", context_json(spec.context)}, {"index", spec.index}};
  }
  return {};
}

Grid grid_from(const Node& node) {
  if (node.value().is_string()) {
    try {
      return parse_grid_spec(node.string());
    } catch (const ConfigError& e) {
      node.fail(e.what());
    }
  }
  node.expect_object({"min", "max", "points"});
  Grid grid{node.at("min").number(), node.at("max").number(),
            static_cast<std::size_t>(node.at("points").unsigned_integer())};
  if (grid.n_points < 2) node.child("points").fail("need at least two points");
  if (!(grid.q_max > grid.q_min)) node.child("max").fail("max must exceed min");
  return grid;
}

OptionsSpec parse_options(const Node& node) {
  node.expect_object({"grid", "svd_tol", "trials", "seed", "threads"});
  OptionsSpec spec;
  if (node.has("grid")) spec.grid = grid_from(node.child("grid"));
  if (node.has("svd_tol")) spec.svd_tol = node.child("svd_tol").positive();
  if (node.has("trials")) {
    const Node trials = node.child("trials");
    spec.trials = trials.unsigned_integer();
    if (*spec.trials == 0) trials.fail("must be at least 1");
  }
  if (node.has("seed")) spec.seed = node.child("seed").unsigned_integer();
  if (node.has("threads")) {
    const Node threads = node.child("threads");
    const std::uint64_t n = threads.unsigned_integer();
    if (n == 0 || n > 1024) threads.fail("must lie in [1, 1024]");
    spec.threads = static_cast<unsigned>(n);
  }
  return spec;
}

json options_json(const OptionsSpec& spec) {
  json out = json::object();
  if (spec.grid) {
    out["grid"] = {{"min", spec.grid->q_min},
                   {"max", spec.grid->q_max},
                   {"points", spec.grid->n_points}};
  }
  if (spec.svd_tol) out["svd_tol"] = *spec.svd_tol;
  if (spec.trials) out["trials"] = *spec.trials;
  if (spec.seed) out["seed"] = *spec.seed;
  if (spec.threads) out["threads"] = *spec.threads;
  return out;
}

bool parse_double(std::string_view text, double& out) {
  const char* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, out);
  return result.ec == std::errc() && result.ptr == end && std::isfinite(out);
}

struct BuiltContext {
  MeasurementContext context;
  std::vector<double> positions;
};

BuiltContext build_context(const ContextSpec& spec, const OptionsSpec& options) {
  switch (spec.kind) {
    case ContextKind::kKraus:
      return {context_from_kraus(spec.operators), {}};
    case ContextKind::kPovm:
      return {context_from_povm(spec.operators), {}};
    case ContextKind::kPolarization:
      return {polarization_context(spec.gamma), {}};
    case ContextKind::kGaussianDetector:
    case ContextKind::kBoxDetector:
    case ContextKind::kQpc:
      break;
  }
  PointerDistribution dist = PointerDistribution::gaussian(1.0);
  double coupling = spec.coupling;
  if (spec.kind == ContextKind::kBoxDetector) {
    dist = PointerDistribution::box(spec.width);
  } else if (spec.kind == ContextKind::kGaussianDetector) {
    dist = PointerDistribution::gaussian(spec.width);
  } else {
    // Reduced variable u = (I - I0) / g: unit coupling, width 1/sqrt(tau).
    const QpcParams params(spec.current1, spec.current2, spec.noise_power,
                           spec.averaging_time);
    dist = PointerDistribution::gaussian(1.0 / std::sqrt(params.tau()));
    coupling = 1.0;
  }
  const DetectorModel model{dist, coupling,
                            options.grid ? *options.grid : default_grid(dist, coupling)};
  DiscretizedDetector detector = detector_context(model);
  return {std::move(detector.context), std::move(detector.positions)};
}

template <typename F>
auto at_path(const char* path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const CvError& e) {
    throw ConfigError(path, e.what());
  }
}

}  // namespace

ScenarioConfig parse_config(const nlohmann::json& doc) {
  const Node root(doc, "");
  root.expect_object({"observable", "context", "state", "postselection", "options"});
  ScenarioConfig config;
  if (root.has("observable")) {
    const Node obs = root.child("observable");
    config.observable = obs.value().is_string() ? named_observable(obs) : obs.matrix();
  }
  config.context = parse_context(root.at("context"));
  config.state = parse_state(root.at("state"));
  if (root.has("postselection")) {
    config.postselection = parse_postselection(root.child("postselection"));
  }
  if (root.has("options")) config.options = parse_options(root.child("options"));
  return config;
}

ScenarioConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // Recover line and column from the byte offset.
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column),
                      "JSON syntax error");
  }
  return parse_config(doc);
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path, "cannot open config file");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

nlohmann::json to_json(const ScenarioConfig& config) {
  json out = json::object();
  if (config.observable) out["observable"] = matrix_json(*config.observable);
  out["context"] = context_json(config.context);
  out["state"] = state_json(config.state);
  if (config.postselection) out["postselection"] = postselection_json(*config.postselection);
  const json options = options_json(config.options);
  if (!options.empty()) out["options"] = options;
  return out;
}

std::vector<std::string> parameter_names() {
  return {"gamma", "strength", "coupling", "sigma", "width", "tau", "alpha", "theta"};
}

void set_parameter(ScenarioConfig& config, std::string_view name, double value) {
  if (!std::isfinite(value)) throw ConfigError(std::string(name), "value is not finite");
  ContextSpec& ctx = config.context;
  const auto inapplicable = [&]() -> void {
    throw ConfigError(std::string(name), "parameter does not apply to this scenario");
  };
  if (name == "gamma" || name == "strength") {
    if (ctx.kind != ContextKind::kPolarization) inapplicable();
    if (name == "gamma") {
      if (!(value > 0.0 && value <= 1.0)) {
        throw ConfigError("gamma", "must lie in (0, 1]");
      }
      ctx.gamma = value;
    } else {
      if (!(value > -1.0 && value <= 1.0)) {
        throw ConfigError("strength", "must lie in (-1, 1]");
      }
      ctx.gamma = polarization_gamma(value);
    }
  } else if (name == "coupling") {
    if (ctx.kind != ContextKind::kGaussianDetector && ctx.kind != ContextKind::kBoxDetector) {
      inapplicable();
    }
    ctx.coupling = value;
  } else if (name == "sigma" || name == "width") {
    const ContextKind want =
        name == "sigma" ? ContextKind::kGaussianDetector : ContextKind::kBoxDetector;
    if (ctx.kind != want) inapplicable();
    if (!(value > 0.0)) throw ConfigError(std::string(name), "must be positive");
    ctx.width = value;
  } else if (name == "tau") {
    if (ctx.kind != ContextKind::kQpc) inapplicable();
    const QpcParams p = QpcParams::from_tau(value);
    ctx.current1 = p.current1();
    ctx.current2 = p.current2();
    ctx.noise_power = p.noise_power();
    ctx.averaging_time = p.averaging_time();
  } else if (name == "alpha") {
    if (config.state.kind != StateKind::kPsi) inapplicable();
    config.state.angle = value;
  } else if (name == "theta") {
    if (!config.postselection || config.postselection->kind == PostselectionKind::kContext) {
      inapplicable();
    }
    config.postselection->angle = value;
  } else {
    throw ConfigError(std::string(name), "unknown parameter");
  }
}

Scenario build_scenario(const ScenarioConfig& config) {
  const ComplexMatrix observable = config.observable ? *config.observable : pauli::z();
  Observable obs = at_path("observable", [&] { return spectral_decompose(observable); });
  BuiltContext ctx = at_path("context", [&] { return build_context(config.context, config.options); });
  if (ctx.context.dim() != obs.dim()) {
    throw ConfigError("context", "dimension " + std::to_string(ctx.context.dim()) +
                                     " differs from the observable's " +
                                     std::to_string(obs.dim()));
  }
  DensityOperator state = at_path("state", [&] {
    switch (config.state.kind) {
      case StateKind::kPsi:
        return DensityOperator::pure(bloch_state(config.state.angle));
      case StateKind::kVector:
        return DensityOperator::pure(config.state.vector);
      case StateKind::kMatrix:
        break;
    }
    return DensityOperator::from_matrix(config.state.matrix);
  });
  if (state.dim() != obs.dim()) {
    throw ConfigError("state", "dimension differs from the observable's");
  }

  std::optional<MeasurementContext> post;
  std::size_t index = 0;
  if (config.postselection) {
    const PostselectionSpec& spec = *config.postselection;
    index = spec.index;
    post = at_path("postselection", [&] {
      switch (spec.kind) {
        case PostselectionKind::kF:
          return projective_context(bloch_state(spec.angle));
        case PostselectionKind::kXRotation:
          return rotated_basis_context(x_rotation(spec.angle));
        case PostselectionKind::kContext:
          break;
      }
      return build_context(spec.context, config.options).context;
    });
    if (post->dim() != obs.dim()) {
      throw ConfigError("postselection", "dimension differs from the observable's");
    }
    if (index >= post->size()) {
      throw ConfigError("postselection.index", "index " + std::to_string(index) +
                                                   " out of range for " +
                                                   std::to_string(post->size()) +
                                                   " outcomes");
    }
  }
  return Scenario{std::move(obs), std::move(ctx.context), std::move(ctx.positions),
                  std::move(state), std::move(post), index};
}

Grid parse_grid_spec(std::string_view text) {
  const auto first = text.find(':');
  const auto second = first == std::string_view::npos ? first : text.find(':', first + 1);
  if (second == std::string_view::npos || text.find(':', second + 1) != std::string_view::npos) {
    throw ConfigError("grid", "expected MIN:MAX:POINTS, got \"" + std::string(text) + "\"");
  }
  Grid grid;
  const std::string_view points = text.substr(second + 1);
  std::uint64_t n = 0;
  const auto parsed = std::from_chars(points.data(), points.data() + points.size(), n);
  if (!parse_double(text.substr(0, first), grid.q_min) ||
      !parse_double(text.substr(first + 1, second - first - 1), grid.q_max) ||
      parsed.ec != std::errc() || parsed.ptr != points.data() + points.size()) {
    throw ConfigError("grid", "expected MIN:MAX:POINTS, got \"" + std::string(text) + "\"");
  }
  if (n < 2) throw ConfigError("grid", "need at least two points");
  if (!(grid.q_max > grid.q_min)) throw ConfigError("grid", "MAX must exceed MIN");
  grid.n_points = static_cast<std::size_t>(n);
  return grid;
}

double default_tolerance_from_env() {
  const char* raw = std::getenv("CVTOOL_DEFAULT_TOL");
  if (raw == nullptr || *raw == '\0') return kDefaultSvdTolerance;
  double tol = 0.0;
  if (!parse_double(raw, tol) || !(tol > 0.0)) {
    throw ConfigError("CVTOOL_DEFAULT_TOL", "expected a positive number, got \"" +
                                                std::string(raw) + "\"");
  }
  return tol;
}

}  // namespace cvtool::cli
