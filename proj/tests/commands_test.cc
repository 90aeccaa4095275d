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

#include <gtest/gtest.h>

#include <clocale>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cvtool/config.h"
#include "cvtool/scenarios.h"
#include "json.hpp"

namespace cvtool::cli {
namespace {

using nlohmann::json;

constexpr double kPi = std::numbers::pi;

struct Output {
  int code;
  std::string out;
  std::string err;
};

template <typename F>
Output capture(F&& command) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = command(out, err);
  return {code, out.str(), err.str()};
}

GlobalOptions json_output() {
  GlobalOptions o;
  o.format = OutputFormat::kJson;
  return o;
}

ScenarioConfig polarization(double gamma) {
  json doc = {{"observable", "sigma_z"},
              {"context", {{"builder", "polarization"}, {"gamma", gamma}}},
              {"state", {{"vector", {0.6, 0.8}}}},
              {"postselection", {{"context", {{"kraus", json::parse(
                   "[[[0.5, -0.5], [-0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]]]")}}}, {"index", 0}}}};
  return parse_config(doc);
}

// CSV body rows after the comment header and column line.
std::vector<std::vector<double>> csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) row.push_back(std::stod(field));
    rows.push_back(row);
  }
  return rows;
}

TEST(Solve, PolarizationValues) {
  const Output r = capture([](auto& o, auto& e) {
    return cmd_solve(polarization(std::sqrt(0.75)), json_output(), o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["alpha0"][0].get<double>(), 2.0, 1e-12);
  EXPECT_NEAR(doc["alpha0"][1].get<double>(), -2.0, 1e-12);
  EXPECT_EQ(doc["null_dimension"], 0);
  EXPECT_EQ(doc["exact"], true);
  EXPECT_EQ(doc["mode"], "commuting-F");
}

TEST(Solve, ProjectiveEchoesEigenvalues) {
  const ScenarioConfig config = parse_config_text(R"({"observable": [[3, 0], [0, -1]],
    "context": {"kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}, "state": {"psi": 0}})");
  const Output r = capture([&](auto& o, auto& e) { return cmd_solve(config, json_output(), o, e); });
  ASSERT_EQ(r.code, kExitOk);
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["alpha0"][0].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(doc["alpha0"][1].get<double>(), -1.0, 1e-12);
}

TEST(Solve, UnreconstructableExitsTwo) {
  const Output r = capture([](auto& o, auto& e) {
    return cmd_solve(polarization(std::sqrt(0.5)), json_output(), o, e);
  });
  EXPECT_EQ(r.code, kExitNotReconstructable);
  EXPECT_EQ(json::parse(r.out)["null_dimension"], 1);
  GlobalOptions strict = json_output();
  strict.strict = true;
  const Output s = capture([&](auto& o, auto& e) {
    return cmd_solve(polarization(std::sqrt(0.5)), strict, o, e);
  });
  EXPECT_EQ(s.code, kExitNotReconstructable);
  EXPECT_TRUE(s.out.empty());
}

TEST(Solve, DetectorTableHasPositions) {
  const ScenarioConfig config = parse_config_text(R"({"observable": "sigma_z",
    "context": {"builder": "gaussian-detector", "sigma": 1, "coupling": 1},
    "state": {"psi": 0}, "options": {"grid": "-7:7:201"}})");
  GlobalOptions csv;
  csv.format = OutputFormat::kCsv;
  const Output r = capture([&](auto& o, auto& e) { return cmd_solve(config, csv, o, e); });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 201u);
  for (const auto& row : rows) {
    ASSERT_EQ(row.size(), 3u);
    EXPECT_NEAR(row[2], detector_cv_analytic(PointerDistribution::gaussian(1), 1, row[1]), 1e-6);
  }
}

TEST(Conditioned, PolarizationMatchesClosedForm) {
  const double gamma = 0.95;
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_conditioned(polarization(gamma), json_output(), std::nullopt, o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const double expected = polarization_conditioned_oracle(0.6, 0.8, gamma);
  EXPECT_NEAR(json::parse(r.out)["conditioned_average"].get<double>(), expected,
              1e-11 * std::max(1.0, std::abs(expected)));
}

TEST(Conditioned, AnomalousValueFlagged) {
  const ScenarioConfig config = parse_config_text(R"({"observable": "sigma_z",
    "context": {"builder": "gaussian-detector", "sigma": 0.3, "coupling": 0.1},
    "state": {"psi": 4.614214209960009}, "postselection": {"f": 1.5707963267948966}})");
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_conditioned(config, json_output(), std::nullopt, o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_LT(doc["conditioned_average"].get<double>(), -1.0);
  EXPECT_EQ(doc["outside_eigenvalue_range"], true);
  EXPECT_EQ(doc["flag"], "outside eigenvalue range");
  EXPECT_NEAR(doc["conditioned_average"].get<double>(),
              aav_conditioned_oracle(47 * kPi / 32, 0.1, 0.3), 1e-5);
}

TEST(Conditioned, QpcThetaZeroIsOne) {
  const ScenarioConfig config = parse_config_text(R"({"observable": "sigma_z",
    "context": {"builder": "qpc", "tau": 1}, "state": {"matrix": [[0.3, 0.1], [0.1, 0.7]]},
    "postselection": {"x_rotation": 0}})");
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_conditioned(config, json_output(), std::nullopt, o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NEAR(json::parse(r.out)["conditioned_average"].get<double>(), 1.0, 1e-9);
}

TEST(Conditioned, ZeroPostselectionExitsThree) {
  const ScenarioConfig config = parse_config_text(R"({"observable": "sigma_z",
    "context": {"kraus": [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]}, "state": {"psi": 0},
    "postselection": {"f": 3.141592653589793}})");
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_conditioned(config, json_output(), std::nullopt, o, e);
  });
  EXPECT_EQ(r.code, kExitZeroPostselection);
  EXPECT_NE(r.err.find("postselection"), std::string::npos);
}

TEST(Conditioned, MissingPostselectionIsError) {
  const ScenarioConfig config = parse_config_text(R"({"observable": "sigma_z",
    "context": {"builder": "polarization", "gamma": 0.9}, "state": {"psi": 0}})");
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_conditioned(config, json_output(), std::nullopt, o, e);
  });
  EXPECT_EQ(r.code, kExitError);
}

TEST(Conditioned, MonteCarloAlongside) {
  GlobalOptions o = json_output();
  o.seed = 5;
  const Output r = capture([&](auto& out, auto& err) {
    return cmd_conditioned(polarization(0.95), o, 200000, out, err);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["mc_estimate"].get<double>(), doc["conditioned_average"].get<double>(),
              5 * doc["mc_standard_error"].get<double>());
  EXPECT_EQ(doc["mc_trials"], 200000);
}

TEST(Moment, MatchesTraceAndRejectsNonCommuting) {
  const Output r = capture([](auto& o, auto& e) {
    return cmd_moment(polarization(0.9), json_output(), 3, std::nullopt, o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json doc = json::parse(r.out);
  EXPECT_NEAR(doc["moment"].get<double>(), doc["trace_moment"].get<double>(), 1e-10);

  const ScenarioConfig trine = parse_config_text(R"({"observable": "sigma_x",
    "context": {"povm": [[[0.6666666666666666, 0], [0, 0]],
      [[0.16666666666666666, 0.28867513459481287], [0.28867513459481287, 0.5]],
      [[0.16666666666666666, -0.28867513459481287], [-0.28867513459481287, 0.5]]]},
    "state": {"psi": 0.7}})");
  const Output n = capture([&](auto& o, auto& e) {
    return cmd_moment(trine, json_output(), 2, std::nullopt, o, e);
  });
  EXPECT_EQ(n.code, kExitError);
}

TEST(Sweep, RowsPerStep) {
  const SweepSpec spec{"gamma", 0.8, 1.0, 5};
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_sweep(polarization(0.9), GlobalOptions{}, spec, o, e);
  });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_DOUBLE_EQ(rows.back()[0], 1.0);
  for (const auto& row : rows) {
    EXPECT_NEAR(row[4], polarization_conditioned_oracle(0.6, 0.8, row[0]), 1e-9);
  }
}

TEST(Sweep, InapplicableParameterIsError) {
  const SweepSpec spec{"sigma", 0.1, 1.0, 3};
  const Output r = capture([&](auto& o, auto& e) {
    return cmd_sweep(polarization(0.9), GlobalOptions{}, spec, o, e);
  });
  EXPECT_EQ(r.code, kExitError);
}

TEST(Fig1, DefaultRun) {
  const Output r = capture([](auto& o, auto& e) { return cmd_fig1(Fig1Options{}, GlobalOptions{}, o, e); });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("# cvtool "), std::string::npos);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 1201u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const auto& mirror = rows[rows.size() - 1 - i];
    ASSERT_EQ(row.size(), 7u);
    for (const double v : row) ASSERT_TRUE(std::isfinite(v));
    EXPECT_NEAR(row[0], -mirror[0], 1e-12);
    for (const int c : {1, 2, 5, 6}) EXPECT_NEAR(row[c], -mirror[c], 1e-9) << "column " << c;
  }
  const std::string key = "# conditioned_average_gaussian = ";
  const auto pos = r.out.find(key);
  ASSERT_NE(pos, std::string::npos);
  const double header = std::stod(r.out.substr(pos + key.size()));
  EXPECT_NEAR(header, aav_conditioned_oracle(47 * kPi / 32, 0.1, 0.3), 1e-5);
}

TEST(Fig1, WeightIntegratesToConditionedAverage) {
  const Output r = capture([](auto& o, auto& e) { return cmd_fig1(Fig1Options{}, GlobalOptions{}, o, e); });
  const auto rows = csv_rows(r.out);
  const double dq = rows[1][0] - rows[0][0];
  double integral = 0.0;
  for (const auto& row : rows) integral += row[3] * dq;
  EXPECT_NEAR(integral, aav_conditioned_oracle(47 * kPi / 32, 0.1, 0.3), 1e-4);
}

TEST(Fig2, ColumnsAndChecks) {
  const Output r = capture([](auto& o, auto& e) { return cmd_fig2(Fig2Options{}, GlobalOptions{}, o, e); });
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 401u);
  const auto& middle = rows[200];
  EXPECT_EQ(middle[0], 0.0);
  for (std::size_t c = 1; c < middle.size(); ++c) EXPECT_EQ(middle[c], 0.0);
  const auto& u1 = rows[300];
  EXPECT_DOUBLE_EQ(u1[0], 1.0);
  EXPECT_NEAR(u1[4], qpc_cv(1.0, 10.0), 1e-10);
  EXPECT_NE(r.out.find("small_time_check = passed"), std::string::npos);
}

TEST(Fig2, RejectsNonPositiveTau) {
  const Output r = capture([](auto& o, auto& e) {
    return cmd_fig2(Fig2Options{{0.5, -1.0}}, GlobalOptions{}, o, e);
  });
  EXPECT_EQ(r.code, kExitError);
}

TEST(Csv, LocaleIndependent) {
  const char* previous = std::setlocale(LC_NUMERIC, nullptr);
  const std::string saved = previous ? previous : "C";
  if (!std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) std::setlocale(LC_NUMERIC, "C");
  const Output r = capture([](auto& o, auto& e) {
    return cmd_fig2(Fig2Options{{0.5}}, GlobalOptions{}, o, e);
  });
  std::setlocale(LC_NUMERIC, saved.c_str());
  EXPECT_NE(r.out.find("-1.99,"), std::string::npos);
  EXPECT_EQ(r.out.back(), '\n');
}

TEST(Verify, SuitesAndUnknown) {
  const Output ok = capture([](auto& o, auto& e) { return cmd_verify("eq8", o, e); });
  EXPECT_EQ(ok.code, kExitOk) << ok.out;
  EXPECT_NE(ok.out.find("PASS eq8/"), std::string::npos);
  const Output bad = capture([](auto& o, auto& e) { return cmd_verify("no-such-suite", o, e); });
  EXPECT_EQ(bad.code, kExitError);
}

TEST(Format, Parse) {
  EXPECT_EQ(parse_format("csv"), OutputFormat::kCsv);
  EXPECT_EQ(parse_format("json"), OutputFormat::kJson);
  EXPECT_THROW(parse_format("xml"), ConfigError);
}

}  // namespace
}  // namespace cvtool::cli
