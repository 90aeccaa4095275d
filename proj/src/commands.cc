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

#include "cvtool/commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <concepts>
#include <utility>

#include "cvtool/averaging.h"
#include "cvtool/cv_solver.h"
#include "cvtool/montecarlo.h"
#include "cvtool/scenarios.h"
#include "cvtool/verify.h"
#include "fmt/format.h"
#include "json.hpp"

namespace cvtool::cli {
namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultTrials = 100000;
constexpr std::size_t kMaxNullBasisOutcomes = 256;

std::string format_number(double x) { return fmt::format("{:.12g}", x); }

// Rounds to the 12 significant digits used for all output, so JSON and CSV
// carry the same values.
double round12(double x) {
  if (!std::isfinite(x)) return x;
  const std::string text = format_number(x);
  double out = x;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

json number_json(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

json numbers_json(const std::vector<double>& xs) {
  json out = json::array();
  for (const double x : xs) out.push_back(number_json(x));
  return out;
}

json numbers_json(const RealVector& xs) {
  return numbers_json(std::vector<double>(xs.data(), xs.data() + xs.size()));
}

// A command's output: ordered scalar fields and an optional table.
struct Report {
  std::string command;
  json parameters;
  std::vector<std::pair<std::string, json>> fields;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::string key, json value) { fields.emplace_back(std::move(key), std::move(value)); }
  void add(std::string key, double value) { add(std::move(key), number_json(value)); }
  void add(std::string key, bool value) { add(std::move(key), json(value)); }
  void add(std::string key, const char* value) { add(std::move(key), json(value)); }
  template <std::integral T>
  void add(std::string key, T value) {
    add(std::move(key), json(value));
  }
};

std::string render_field(const json& value) {
  if (value.is_string()) return value.get<std::string>();
  return value.dump();
}

void write_report(const Report& report, OutputFormat format, std::ostream& out) {
  if (format == OutputFormat::kJson) {
    json doc = json::object();
    doc["tool"] = "cvtool";
    doc["version"] = CVTOOL_VERSION;
    doc["command"] = report.command;
    doc["config"] = report.parameters;
    for (const auto& [key, value] : report.fields) doc[key] = value;
    if (!report.columns.empty()) {
      json rows = json::array();
      for (const auto& row : report.rows) rows.push_back(numbers_json(row));
      doc["table"] = {{"columns", report.columns}, {"rows", rows}};
    }
    out << doc.dump(2) << '\n';
    return;
  }
  out << "# cvtool " << CVTOOL_VERSION << '\n';
  out << "# command: " << report.command << '\n';
  out << "# config: " << report.parameters.dump() << '\n';
  if (report.columns.empty()) {
    out << "field,value\n";
    for (const auto& [key, value] : report.fields) {
      std::string text = render_field(value);
      if (text.find_first_of(",\"") != std::string::npos) {
        std::string quoted = "\"";
        for (const char c : text) {
          if (c == '"') quoted += '"';
          quoted += c;
        }
        text = quoted + "\"";
      }
      out << key << ',' << text << '\n';
    }
    return;
  }
  for (const auto& [key, value] : report.fields) {
    out << "# " << key << " = " << render_field(value) << '\n';
  }
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    out << (c ? "," : "") << report.columns[c];
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_number(row[c]);
    }
    out << '\n';
  }
}

// Maps library errors to exit codes and prints the message.
int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NotReconstructable& e) {
    err << "error: not reconstructable: " << e.what() << '\n';
    return kExitNotReconstructable;
  } catch (const ZeroPostselectionProbability& e) {
    err << "error: zero postselection probability: " << e.what() << '\n';
    return kExitZeroPostselection;
  } catch (const NoPostselectedTrials& e) {
    err << "error: " << e.what() << '\n';
    return kExitZeroPostselection;
  } catch (const ConfigError& e) {
    err << "error: config: " << e.what() << '\n';
    return kExitError;
  } catch (const CvError& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

ScenarioConfig apply_overrides(ScenarioConfig config, const GlobalOptions& options) {
  if (options.grid) config.options.grid = options.grid;
  if (options.svd_tol) config.options.svd_tol = options.svd_tol;
  if (options.trials) config.options.trials = options.trials;
  if (options.seed) config.options.seed = options.seed;
  if (options.threads) config.options.threads = options.threads;
  return config;
}

double effective_svd_tol(const ScenarioConfig& config) {
  return config.options.svd_tol ? *config.options.svd_tol : default_tolerance_from_env();
}

RunConfig run_config(const ScenarioConfig& config, std::optional<std::uint64_t> trials) {
  RunConfig run;
  run.trials = trials ? *trials : config.options.trials.value_or(kDefaultTrials);
  run.seed = config.options.seed.value_or(0);
  run.threads = config.options.threads.value_or(1);
  if (run.trials == 0) throw ConfigError("trials", "must be at least 1");
  return run;
}

ContextualValueSolution solve(const Scenario& scenario, double svd_tol) {
  SolverOptions opts;
  opts.svd_tol = svd_tol;
  opts.compute_null_basis = scenario.context.size() <= kMaxNullBasisOutcomes;
  return solve_contextual_values(scenario.observable, scenario.context, opts);
}

// Contextual values for commands that go on to use them. An inexact solution
// is an error under --strict and a warning otherwise.
std::vector<double> usable_cv(const ContextualValueSolution& solution, bool strict,
                              std::ostream& err) {
  if (!solution.exact) {
    if (strict) require_exact(solution);
    err << "warning: contextual values are inexact (residual "
        << format_number(solution.residual) << "); results are not reconstructions\n";
  }
  return to_std_vector(solution.alpha0);
}

OutputFormat format_or(const GlobalOptions& options, OutputFormat fallback) {
  return options.format.value_or(fallback);
}

std::vector<double> linspace(const Grid& grid) {
  std::vector<double> out(grid.n_points);
  const double step = (grid.q_max - grid.q_min) / static_cast<double>(grid.n_points - 1);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    out[i] = i + 1 == grid.n_points ? grid.q_max : grid.q_min + step * static_cast<double>(i);
  }
  return out;
}

void add_eigen_range(Report& report, const Observable& obs) {
  const auto [lo, hi] = std::minmax_element(obs.eigenvalues().begin(), obs.eigenvalues().end());
  report.add("eigenvalue_min", *lo);
  report.add("eigenvalue_max", *hi);
}

bool outside_range(double value, const Observable& obs) {
  const auto [lo, hi] = std::minmax_element(obs.eigenvalues().begin(), obs.eigenvalues().end());
  const double slack = 1e-9 * std::max(1.0, std::max(std::abs(*lo), std::abs(*hi)));
  return value < *lo - slack || value > *hi + slack;
}

}  // namespace

OutputFormat parse_format(std::string_view text) {
  if (text == "json") return OutputFormat::kJson;
  if (text == "csv") return OutputFormat::kCsv;
  throw ConfigError("format", "expected csv or json, got \"" + std::string(text) + "\"");
}

int cmd_solve(const ScenarioConfig& base, const GlobalOptions& options, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig config = apply_overrides(base, options);
    const Scenario scenario = build_scenario(config);
    const ContextualValueSolution s = solve(scenario, effective_svd_tol(config));
    if (options.strict) require_exact(s);

    Report report{"solve", to_json(config), {}, {}, {}};
    report.add("mode", to_string(s.mode));
    report.add("exact", s.exact);
    report.add("residual", s.residual);
    report.add("truncation_tol", s.truncation_tol);
    report.add("null_dimension", s.null_dimension);
    report.add("singular_values", numbers_json(s.singular_values));
    report.add("alpha0", numbers_json(s.alpha0));
    if (!s.null_basis.empty()) {
      json basis = json::array();
      for (const auto& v : s.null_basis) basis.push_back(numbers_json(v));
      report.add("null_basis", basis);
    }
    const bool positions = !scenario.positions.empty();
    report.columns = positions ? std::vector<std::string>{"outcome", "position", "alpha0"}
                               : std::vector<std::string>{"outcome", "alpha0"};
    for (Eigen::Index j = 0; j < s.alpha0.size(); ++j) {
      std::vector<double> row = {static_cast<double>(j)};
      if (positions) row.push_back(scenario.positions[static_cast<std::size_t>(j)]);
      row.push_back(s.alpha0(j));
      report.rows.push_back(std::move(row));
    }
    write_report(report, format_or(options, OutputFormat::kJson), out);
    if (!s.exact) {
      err << "error: not reconstructable: residual " << format_number(s.residual) << '\n';
      return kExitNotReconstructable;
    }
    return kExitOk;
  });
}

int cmd_conditioned(const ScenarioConfig& base, const GlobalOptions& options,
                    std::optional<std::uint64_t> mc_trials, std::ostream& out,
                    std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig config = apply_overrides(base, options);
    const Scenario scenario = build_scenario(config);
    if (!scenario.postselection) throw ConfigError("postselection", "required by this command");
    const ContextualValueSolution s = solve(scenario, effective_svd_tol(config));
    const std::vector<double> cv = usable_cv(s, options.strict, err);
    const ConditionedSetup setup(scenario.context, cv, *scenario.postselection,
                                 scenario.postselect_index);
    const ConditionedResult r = conditioned_average_detail(setup, scenario.state);

    Report report{"conditioned", to_json(config), {}, {}, {}};
    report.add("conditioned_average", r.value);
    report.add("postselection_probability", r.postselection_probability);
    add_eigen_range(report, scenario.observable);
    report.add("cv_min", *std::min_element(cv.begin(), cv.end()));
    report.add("cv_max", *std::max_element(cv.begin(), cv.end()));
    const bool outside = outside_range(r.value, scenario.observable);
    report.add("outside_eigenvalue_range", outside);
    if (outside) report.add("flag", "outside eigenvalue range");
    report.add("weak_value",
               weak_value(scenario.observable,
                          scenario.postselection->povm()[scenario.postselect_index],
                          scenario.state));
    report.add("cv_mode", to_string(s.mode));
    report.add("cv_exact", s.exact);
    if (mc_trials) {
      const RunConfig run = run_config(config, mc_trials);
      const EmpiricalResult e = empirical_conditioned_average(setup, scenario.state, run);
      report.add("mc_estimate", e.estimate);
      report.add("mc_standard_error", e.standard_error);
      report.add("mc_postselection_rate", e.postselection_rate);
      report.add("mc_trials", run.trials);
      report.add("mc_accepted", e.accepted);
      report.add("mc_seed", run.seed);
    }
    write_report(report, format_or(options, OutputFormat::kJson), out);
    return kExitOk;
  });
}

int cmd_moment(const ScenarioConfig& base, const GlobalOptions& options, int order,
               std::optional<std::uint64_t> mc_trials, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig config = apply_overrides(base, options);
    const Scenario scenario = build_scenario(config);
    const ContextualValueSolution s = solve(scenario, effective_svd_tol(config));
    const std::vector<double> cv = usable_cv(s, options.strict, err);
    ComplexMatrix power = ComplexMatrix::Identity(scenario.observable.matrix().rows(),
                                                  scenario.observable.matrix().cols());
    for (int k = 0; k < order; ++k) power = power * scenario.observable.matrix();

    Report report{"moment", to_json(config), {}, {}, {}};
    report.add("order", order);
    report.add("moment", moment(cv, scenario.context, scenario.state, order));
    report.add("trace_moment", (power * scenario.state.matrix()).trace().real());
    report.add("cv_self_moment", cv_moment(cv, scenario.context, scenario.state, order));
    if (mc_trials) {
      const RunConfig run = run_config(config, mc_trials);
      const EmpiricalResult e = empirical_moment(cv, scenario.context, scenario.state, order, run);
      report.add("mc_estimate", e.estimate);
      report.add("mc_standard_error", e.standard_error);
      report.add("mc_trials", run.trials);
      report.add("mc_seed", run.seed);
    }
    write_report(report, format_or(options, OutputFormat::kJson), out);
    return kExitOk;
  });
}

int cmd_sweep(const ScenarioConfig& base, const GlobalOptions& options, const SweepSpec& sweep,
              std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (sweep.steps < 1) throw ConfigError("steps", "must be at least 1");
    const ScenarioConfig config = apply_overrides(base, options);
    const double tol = effective_svd_tol(config);
    Report report{"sweep", to_json(config), {}, {}, {}};
    report.add("parameter", sweep.parameter);
    report.columns = {sweep.parameter, "average", "exact", "residual"};
    if (config.postselection) {
      for (const char* c : {"conditioned_average", "postselection_probability", "weak_value"}) {
        report.columns.push_back(c);
      }
    }
    for (std::size_t i = 0; i < sweep.steps; ++i) {
      const double t = sweep.steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(sweep.steps - 1);
      const double value = sweep.from + (sweep.to - sweep.from) * t;
      ScenarioConfig point = config;
      set_parameter(point, sweep.parameter, value);
      const Scenario scenario = build_scenario(point);
      const ContextualValueSolution s = solve(scenario, tol);
      if (options.strict) require_exact(s);
      const std::vector<double> cv = to_std_vector(s.alpha0);
      std::vector<double> row = {value, reconstructed_average(cv, scenario.context, scenario.state),
                                 s.exact ? 1.0 : 0.0, s.residual};
      if (scenario.postselection) {
        const ConditionedSetup setup(scenario.context, cv, *scenario.postselection,
                                     scenario.postselect_index);
        try {
          const ConditionedResult r = conditioned_average_detail(setup, scenario.state);
          row.push_back(r.value);
          row.push_back(r.postselection_probability);
          row.push_back(weak_value(scenario.observable,
                                   scenario.postselection->povm()[scenario.postselect_index],
                                   scenario.state));
        } catch (const ZeroPostselectionProbability&) {
          row.insert(row.end(), {NAN, 0.0, NAN});
        }
      }
      report.rows.push_back(std::move(row));
    }
    write_report(report, format_or(options, OutputFormat::kCsv), out);
    return kExitOk;
  });
}

int cmd_mc(const ScenarioConfig& base, const GlobalOptions& options, std::ostream& out,
           std::ostream& err) {
  return guarded(err, [&] {
    const ScenarioConfig config = apply_overrides(base, options);
    const Scenario scenario = build_scenario(config);
    const ContextualValueSolution s = solve(scenario, effective_svd_tol(config));
    const std::vector<double> cv = usable_cv(s, options.strict, err);
    const RunConfig run = run_config(config, std::nullopt);

    Report report{"mc", to_json(config), {}, {}, {}};
    report.add("trials", run.trials);
    report.add("seed", run.seed);
    const double exact_avg = reconstructed_average(cv, scenario.context, scenario.state);
    const EmpiricalResult avg = empirical_average(cv, scenario.context, scenario.state, run);
    report.add("average_exact", exact_avg);
    report.add("average_estimate", avg.estimate);
    report.add("average_standard_error", avg.standard_error);
    if (scenario.postselection) {
      const ConditionedSetup setup(scenario.context, cv, *scenario.postselection,
                                   scenario.postselect_index);
      const ConditionedResult exact = conditioned_average_detail(setup, scenario.state);
      const EmpiricalResult cond = empirical_conditioned_average(setup, scenario.state, run);
      report.add("conditioned_exact", exact.value);
      report.add("conditioned_estimate", cond.estimate);
      report.add("conditioned_standard_error", cond.standard_error);
      report.add("postselection_probability", exact.postselection_probability);
      report.add("postselection_rate", cond.postselection_rate);
      report.add("accepted", cond.accepted);
    }
    write_report(report, format_or(options, OutputFormat::kJson), out);
    return kExitOk;
  });
}

int cmd_fig1(const Fig1Options& fig, const GlobalOptions& options, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    if (!(fig.sigma > 0.0)) throw ConfigError("sigma", "must be positive");
    const double width = fig.box_width.value_or(fig.sigma);
    if (!(width > 0.0)) throw ConfigError("box-width", "must be positive");
    const double tol = options.svd_tol ? *options.svd_tol : default_tolerance_from_env();
    const PointerDistribution gauss = PointerDistribution::gaussian(fig.sigma);
    const PointerDistribution box = PointerDistribution::box(width);
    const ComplexVector f = bloch_state(fig.postselection_angle);
    const DensityOperator rho = DensityOperator::pure(bloch_state(fig.alpha));
    const Observable z = spectral_decompose(pauli::z());

    Report report{"fig1", json::object(), {}, {}, {}};
    report.parameters = {{"coupling", fig.coupling},         {"sigma", fig.sigma},
                         {"box_width", width},               {"alpha", fig.alpha},
                         {"postselection_angle", fig.postselection_angle},
                         {"strong_coupling", fig.strong_coupling}};

    // Scalar conditioned averages from the discretized detectors.
    double post_prob[2];
    int k = 0;
    for (const PointerDistribution& dist : {gauss, box}) {
      const DiscretizedDetector det = detector_context(make_detector(dist, fig.coupling));
      const ConditionedResult r =
          detector_conditioned_average(det, detector_cv_discrete(det, tol), rho, f);
      post_prob[k++] = r.postselection_probability;
      report.add(std::string("conditioned_average_") + dist.name(), r.value);
      report.add(std::string("postselection_probability_") + dist.name(),
                 r.postselection_probability);
      report.add(std::string("outside_eigenvalue_range_") + dist.name(),
                 outside_range(r.value, z));
    }
    const bool standard_post = std::abs(fig.postselection_angle - std::numbers::pi / 2) < 1e-15;
    if (standard_post) {
      report.add("closed_form_gaussian", aav_conditioned_oracle(fig.alpha, fig.coupling, fig.sigma));
      report.add("closed_form_box", aav_conditioned_oracle(box, fig.alpha, fig.coupling));
    }
    report.add("weak_value", weak_value(z, f * f.adjoint(), rho));
    const Complex aav = aav_weak_value(z, bloch_state(fig.alpha), f);
    report.add("aav_weak_value_re", aav.real());
    report.add("aav_weak_value_im", aav.imag());
    add_eigen_range(report, z);

    const double reach = std::max(std::abs(fig.coupling), std::abs(fig.strong_coupling)) +
                         6.0 * std::max(fig.sigma, width);
    const Grid grid = options.grid ? *options.grid : Grid{-reach, reach, 1201};
    report.columns = {"q",
                      "cv_gaussian",
                      "cv_box",
                      "conditioned_weight_gaussian",
                      "conditioned_weight_box",
                      "cv_gaussian_strong",
                      "cv_box_strong"};
    for (const double q : linspace(grid)) {
      std::vector<double> row = {q};
      row.push_back(detector_cv_analytic(gauss, fig.coupling, q));
      row.push_back(detector_cv_analytic(box, fig.coupling, q));
      // alpha(q) P(q | f) as a density in q.
      k = 0;
      for (const PointerDistribution& dist : {gauss, box}) {
        ComplexMatrix m = ComplexMatrix::Zero(2, 2);
        m(0, 0) = std::sqrt(dist.density(q - fig.coupling));
        m(1, 1) = std::sqrt(dist.density(q + fig.coupling));
        const double joint = (f.adjoint() * m * rho.matrix() * m.adjoint() * f)(0, 0).real();
        row.push_back(detector_cv_analytic(dist, fig.coupling, q) * joint / post_prob[k++]);
      }
      row.push_back(detector_cv_analytic(gauss, fig.strong_coupling, q));
      row.push_back(detector_cv_analytic(box, fig.strong_coupling, q));
      report.rows.push_back(std::move(row));
    }
    write_report(report, format_or(options, OutputFormat::kCsv), out);
    return kExitOk;
  });
}

int cmd_fig2(const Fig2Options& fig, const GlobalOptions& options, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    if (fig.taus.empty()) throw ConfigError("tau", "need at least one measurement time");
    for (const double tau : fig.taus) {
      if (!(tau > 0.0)) throw ConfigError("tau", "measurement times must be positive");
    }
    const Grid grid = options.grid ? *options.grid : Grid{-2.0, 2.0, 401};
    Report report{"fig2", json::object(), {}, {}, {}};
    report.parameters = {{"taus", fig.taus},
                         {"u_min", grid.q_min},
                         {"u_max", grid.q_max},
                         {"points", grid.n_points}};
    report.columns = {"u"};
    for (const double tau : fig.taus) report.columns.push_back("cv_tau_" + format_number(tau));
    const std::vector<double> us = linspace(grid);
    for (const double u : us) {
      std::vector<double> row = {u};
      for (const double tau : fig.taus) row.push_back(qpc_cv(u, tau));
      report.rows.push_back(std::move(row));
    }

    // Small-time check: the shortest time, when at most 0.01, follows
    // 2 sqrt(2) u to 1% for |u| <= 1.
    const auto shortest = std::min_element(fig.taus.begin(), fig.taus.end());
    bool check_failed = false;
    if (*shortest <= 0.01) {
      double worst = 0.0;
      for (const double u : us) {
        if (u == 0.0 || std::abs(u) > 1.0) continue;
        worst = std::max(worst, std::abs(qpc_cv(u, *shortest) / (2 * std::sqrt(2.0) * u) - 1));
      }
      report.add("small_time_max_relative_deviation", worst);
      report.add("small_time_check", worst <= 0.01 ? "passed" : "failed");
      check_failed = worst > 0.01;
    }
    write_report(report, format_or(options, OutputFormat::kCsv), out);
    if (check_failed) {
      err << "error: small-time column deviates from 2 sqrt(2) u by more than 1%\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  });
}

int cmd_verify(std::string_view suite, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto results = run_suite(suite);
    if (!results) {
      err << "error: unknown suite \"" << suite << "\"; known suites: all";
      for (const auto& name : suite_names()) err << ", " << name;
      err << '\n';
      return kExitError;
    }
    const PropertyResult* first_failure = nullptr;
    for (const auto& r : *results) {
      out << (r.passed ? "PASS " : "FAIL ") << r.suite << '/' << r.name;
      if (!r.detail.empty()) out << "  " << r.detail;
      out << '\n';
      if (!r.passed && !first_failure) first_failure = &r;
    }
    if (first_failure) {
      err << "error: property failed: " << first_failure->suite << '/' << first_failure->name
          << '\n';
      return kExitCheckFailed;
    }
    out << "all " << results->size() << " properties passed\n";
    return kExitOk;
  });
}

}  // namespace cvtool::cli
