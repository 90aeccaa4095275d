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

#include "cvtool/verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

#include "cvtool/averaging.h"
#include "cvtool/cv_solver.h"
#include "cvtool/montecarlo.h"
#include "cvtool/scenarios.h"
#include "fmt/format.h"

namespace cvtool::cli {
namespace {

constexpr double kPi = std::numbers::pi;

class Suite {
 public:
  explicit Suite(std::string name) : name_(std::move(name)) {}

  void check(std::string property, bool passed, std::string detail = {}) {
    results_.push_back({name_, std::move(property), passed, std::move(detail)});
  }

  // Passes when |actual - expected| <= tol.
  void near(std::string property, double actual, double expected, double tol) {
    const double err = std::abs(actual - expected);
    check(std::move(property), err <= tol,
          fmt::format("value {:.12g} expected {:.12g} error {:.3g} tol {:.3g}", actual,
                      expected, err, tol));
  }

  std::vector<PropertyResult> take() { return std::move(results_); }

 private:
  std::string name_;
  std::vector<PropertyResult> results_;
};

// Random inputs for the property sweeps, drawn from the library generator so
// the suites are reproducible.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return lo + (hi - lo) * rng_.uniform(); }

  double normal() {
    const double u1 = 1.0 - rng_.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * rng_.uniform());
  }

  ComplexMatrix complex_matrix(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    ComplexMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(normal(), normal());
    }
    return m;
  }

  ComplexVector state_vector(std::size_t dim) {
    ComplexVector v(static_cast<Eigen::Index>(dim));
    for (auto& x : v) x = Complex(normal(), normal());
    return v / v.norm();
  }

  DensityOperator density(std::size_t dim) {
    const ComplexMatrix g = complex_matrix(dim);
    const ComplexMatrix m = g * g.adjoint();
    return DensityOperator::from_matrix(m / m.trace().real());
  }

  ComplexMatrix hermitian(std::size_t dim) { return hermitian_part(complex_matrix(dim)); }

 private:
  Xoshiro256 rng_;
};

ComplexMatrix projector(const ComplexVector& v) { return v * v.adjoint(); }

double gamma_for(double g) { return polarization_gamma(g); }

std::vector<double> polarization_cv(double g) { return {1.0 / g, -1.0 / g}; }

double pure_state_conditioned(double alpha, double sigma, double g) {
  const DiscretizedDetector det =
      detector_context(make_detector(PointerDistribution::gaussian(sigma), g));
  return detector_conditioned_average(det, detector_cv_discrete(det),
                                      DensityOperator::pure(bloch_state(alpha)),
                                      bloch_state(kPi / 2))
      .value;
}

std::vector<PropertyResult> suite_solver() {
  Suite s("solver");
  const Observable z = spectral_decompose(pauli::z());
  for (const double g : {0.1, 0.25, 0.5, 0.9, 1.0}) {
    const auto sol = solve_contextual_values(z, polarization_context(gamma_for(g)));
    const double err = std::max(std::abs(sol.alpha0(0) - 1 / g), std::abs(sol.alpha0(1) + 1 / g));
    s.check(fmt::format("polarization cv g={}", g), sol.exact && err <= 1e-10,
            fmt::format("max error {:.3g}", err));
  }
  const auto zero = solve_contextual_values(z, polarization_context(gamma_for(0.0)));
  s.check("zero strength is not reconstructable", !zero.exact && zero.null_dimension == 1);

  const double t = 2.0 * kPi / 3.0;
  std::vector<ComplexMatrix> trine;
  for (int k = 0; k < 3; ++k) {
    ComplexVector v(2);
    v << std::cos(k * t / 2), std::sin(k * t / 2);
    trine.push_back(std::sqrt(2.0 / 3.0) * projector(v));
  }
  const MeasurementContext trine_ctx = context_from_kraus(trine);
  const Observable x = spectral_decompose(pauli::x());
  const auto sol = solve_contextual_values(x, trine_ctx);
  const RealMatrix pinv = pseudoinverse(RealMatrix::Identity(3, 3) * 2.0);
  s.check("trine reconstructs sigma_x", sol.exact, fmt::format("residual {:.3g}", sol.residual));
  s.check("pseudoinverse of a scaled identity",
          (pinv - RealMatrix::Identity(3, 3) * 0.5).norm() < 1e-15);

  Draw draw(11);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    RealMatrix f = RealMatrix::Zero(3, 4);
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index c = 0; c < 4; ++c) f(r, c) = draw.normal();
    }
    f.row(2) = f.row(0) + f.row(1);
    const RealMatrix p = pseudoinverse(f);
    worst = std::max({worst, (f * p * f - f).norm(), (p * f * p - p).norm(),
                      (f * p - (f * p).transpose()).norm(), (p * f - (p * f).transpose()).norm()});
  }
  s.check("penrose conditions on random rank-deficient matrices", worst < 1e-10,
          fmt::format("max violation {:.3g}", worst));
  return s.take();
}

std::vector<PropertyResult> suite_polarization() {
  Suite s("eq8");
  Draw draw(8);
  const MeasurementContext post = projective_context(polarization_postselection_state());
  double worst = 0.0;
  int used = 0;
  while (used < 1000) {
    const ComplexVector v = draw.state_vector(2);
    const double gamma = draw.uniform(0.02, 0.98);
    const double g = gamma * gamma - (1 - gamma * gamma);
    if (std::abs(g) < 1e-3) continue;
    ++used;
    const ConditionedSetup setup(polarization_context(gamma), polarization_cv(g), post, 0);
    const double generic = conditioned_average(setup, DensityOperator::pure(v));
    const double closed = polarization_conditioned_oracle(v(0), v(1), gamma);
    worst = std::max(worst, std::abs(generic - closed) / std::max(1.0, std::abs(closed)));
  }
  s.check("generic conditioned average equals closed form", worst <= 1e-12,
          fmt::format("max scaled error {:.3g} over 1000 draws", worst));
  return s.take();
}

std::vector<PropertyResult> suite_pointer() {
  Suite s("eq10");
  for (const double alpha : {kPi / 6, kPi / 3, 47 * kPi / 32}) {
    for (const double ratio : {0.5, 1.0, 2.0}) {
      s.near(fmt::format("gaussian detector alpha={:.6g} g/sigma={}", alpha, ratio),
             pure_state_conditioned(alpha, 1.0, ratio), aav_conditioned_oracle(alpha, ratio, 1.0),
             1e-5);
    }
    s.near(fmt::format("strong limit alpha={:.6g}", alpha), pure_state_conditioned(alpha, 1.0, 10.0),
           std::cos(alpha), 1e-4);
  }
  for (const double alpha : {kPi / 6, kPi / 3}) {
    s.near(fmt::format("weak limit alpha={:.6g}", alpha), pure_state_conditioned(alpha, 1.0, 0.01),
           1.0 / std::tan(alpha / 2 + kPi / 4), 1e-3);
  }
  const double fig1 = pure_state_conditioned(47 * kPi / 32, 0.3, 0.1);
  s.check("anomalous value below -1", fig1 < -1.0, fmt::format("value {:.12g}", fig1));
  s.near("anomalous value matches closed form", fig1, aav_conditioned_oracle(47 * kPi / 32, 0.1, 0.3),
         1e-4);
  return s.take();
}

std::vector<PropertyResult> suite_qpc() {
  Suite s("eq11");
  Draw draw(1111);
  std::vector<DensityOperator> states = {DensityOperator::pure(bloch_state(0.0)),
                                         DensityOperator::maximally_mixed(2)};
  for (int i = 0; i < 4; ++i) states.push_back(draw.density(2));
  for (const double tau : {0.1, 1.0, 5.0, 20.0}) {
    const QpcParams params = QpcParams::from_tau(tau);
    double worst = 0.0;
    for (const double theta : {0.0, kPi / 6, kPi / 3, kPi / 2}) {
      for (const auto& rho : states) {
        worst = std::max(worst, std::abs(qpc_full_pipeline(params, rho, theta) -
                                         qpc_conditioned_oracle(rho, theta, tau)));
      }
    }
    s.check(fmt::format("pipeline matches closed form tau={}", tau), worst <= 1e-4,
            fmt::format("max error {:.3g}", worst));
  }
  return s.take();
}

std::vector<PropertyResult> suite_weak_limit() {
  Suite s("weak-limit");
  const Observable z = spectral_decompose(pauli::z());
  const ComplexVector f = polarization_postselection_state();
  Draw draw(7);
  double worst_ratio = 1e300;
  for (int trial = 0; trial < 10; ++trial) {
    const DensityOperator rho = draw.density(2);
    const double wv = weak_value(z, projector(f), rho);
    double previous = -1.0;
    for (const double g : {0.2, 0.1, 0.05, 0.025}) {
      const ConditionedSetup setup(polarization_context(gamma_for(g)), polarization_cv(g),
                                   projective_context(f), 0);
      const double diff = std::abs(conditioned_average(setup, rho) - wv);
      if (previous > 1e-12) worst_ratio = std::min(worst_ratio, previous / diff);
      previous = diff;
    }
  }
  s.check("conditioned average converges to the weak value", worst_ratio >= 1.9,
          fmt::format("smallest error ratio per halving {:.4g}", worst_ratio));

  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ComplexVector psi = draw.state_vector(2);
    const ComplexVector phi = draw.state_vector(2);
    const Observable a = spectral_decompose(draw.hermitian(2));
    const double generalized = weak_value(a, projector(phi), DensityOperator::pure(psi));
    const Complex aav = aav_weak_value(a, psi, phi);
    worst = std::max(worst, std::abs(generalized - aav.real()) / std::max(1.0, std::abs(aav)));
  }
  s.check("generalized weak value equals the real part of the pure-state one", worst <= 1e-12,
          fmt::format("max scaled error {:.3g}", worst));
  return s.take();
}

std::vector<PropertyResult> suite_moments() {
  Suite s("moments");
  const Observable z = spectral_decompose(pauli::z());
  Draw draw(5);
  double worst = 0.0;
  double smallest_gap = 1e300;
  for (int i = 0; i < 100; ++i) {
    const double g = draw.uniform(0.2, 0.9);
    const MeasurementContext ctx = polarization_context(gamma_for(g));
    const auto cv = to_std_vector(solve_contextual_values(z, ctx).alpha0);
    const DensityOperator rho = draw.density(2);
    ComplexMatrix power = ComplexMatrix::Identity(2, 2);
    for (int n = 1; n <= 3; ++n) {
      power = power * z.matrix();
      const double trace = (power * rho.matrix()).trace().real();
      worst = std::max(worst, std::abs(moment(cv, ctx, rho, n) - trace));
    }
    smallest_gap = std::min(smallest_gap, std::abs(cv_moment(cv, ctx, rho, 2) - 1.0));
  }
  s.check("moments equal trace moments", worst <= 1e-8, fmt::format("max error {:.3g}", worst));
  s.check("cv self-moment differs from the second moment", smallest_gap > 1e-3,
          fmt::format("smallest gap {:.4g}", smallest_gap));
  return s.take();
}

std::vector<PropertyResult> suite_range() {
  Suite s("range");
  Draw draw(9);
  double worst_excess = 0.0;
  int evaluated = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<ComplexMatrix> kraus;
    for (int j = 0; j < 5; ++j) kraus.push_back(draw.complex_matrix(2));
    const MeasurementContext ctx = renormalized_context(std::move(kraus)).context;
    const auto sol = solve_contextual_values(spectral_decompose(draw.hermitian(2)), ctx);
    const auto cv = to_std_vector(sol.alpha0);
    const ConditionedSetup setup(ctx, cv, projective_context(draw.state_vector(2)), 0);
    double value = 0.0;
    try {
      value = conditioned_average(setup, draw.density(2));
    } catch (const ZeroPostselectionProbability&) {
      continue;
    }
    ++evaluated;
    const auto [lo, hi] = std::minmax_element(cv.begin(), cv.end());
    worst_excess = std::max({worst_excess, *lo - value, value - *hi});
  }
  s.check("conditioned averages stay within the cv range", worst_excess <= 1e-9,
          fmt::format("largest excess {:.3g} over {} setups", worst_excess, evaluated));
  return s.take();
}

std::vector<PropertyResult> suite_mc() {
  Suite s("mc");
  const Observable z = spectral_decompose(pauli::z());
  const double g = 0.5;
  const MeasurementContext ctx = polarization_context(gamma_for(g));
  const std::vector<double> cv = polarization_cv(g);
  ComplexVector v(2);
  v << std::cos(0.3), std::sin(0.3);
  const DensityOperator rho = DensityOperator::pure(v);
  const ConditionedSetup setup(ctx, cv, projective_context(polarization_postselection_state()), 0);
  const double avg = reconstructed_average(cv, ctx, rho);
  const double cond = conditioned_average(setup, rho);
  const double second = moment(cv, ctx, rho, 2);
  int within = 0;
  constexpr int kRuns = 20;
  for (int seed = 0; seed < kRuns; ++seed) {
    const RunConfig run{20000, static_cast<std::uint64_t>(seed), 1};
    const auto a = empirical_average(cv, ctx, rho, run);
    const auto c = empirical_conditioned_average(setup, rho, run);
    const auto m = empirical_moment(cv, ctx, rho, 2, run);
    if (std::abs(a.estimate - avg) <= 5 * a.standard_error &&
        std::abs(c.estimate - cond) <= 5 * c.standard_error &&
        std::abs(m.estimate - second) <= 5 * m.standard_error) {
      ++within;
    }
  }
  s.check("estimates within five standard errors", within >= kRuns - 1,
          fmt::format("{} of {} runs", within, kRuns));
  const RunConfig one{8192, 3, 1};
  const RunConfig many{8192, 3, 4};
  s.check("estimates do not depend on thread count",
          empirical_average(cv, ctx, rho, one).estimate ==
              empirical_average(cv, ctx, rho, many).estimate);
  return s.take();
}

std::vector<PropertyResult> suite_fig2() {
  Suite s("fig2");
  double worst = 0.0;
  for (const double u : {0.1, 0.5, 1.0}) {
    worst = std::max(worst, std::abs(qpc_cv(u, 1e-3) / (2 * std::sqrt(2.0) * u) - 1));
  }
  s.check("small-time slope 2 sqrt(2)", worst <= 1e-3, fmt::format("max deviation {:.3g}", worst));
  s.near("long-time value at u=1", qpc_cv(1.0, 20.0), std::sqrt(2.0), 1e-8);
  bool odd = true;
  bool rising = true;
  for (const double tau : {0.5, 2.0, 10.0}) {
    for (double u = 0.05; u <= 2.0; u += 0.05) {
      odd = odd && std::abs(qpc_cv(u, tau) + qpc_cv(-u, tau)) < 1e-12;
      if (u <= 1.0) rising = rising && qpc_cv(u, tau) > qpc_cv(u - 0.05, tau);
    }
  }
  s.check("odd in u", odd && qpc_cv(0.0, 2.0) == 0.0);
  s.check("increasing on [0, 1]", rising);
  const double peak = qpc_cv(1.0, 60.0);
  s.check("long times localize at u = 1",
          qpc_cv(0.5, 60.0) < 1e-3 * peak && qpc_cv(1.5, 60.0) < 1e-3 * peak,
          fmt::format("u=0.5 {:.3g}, u=1 {:.6g}, u=1.5 {:.3g}", qpc_cv(0.5, 60.0), peak,
                      qpc_cv(1.5, 60.0)));
  return s.take();
}

using SuiteFn = std::vector<PropertyResult> (*)();

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> suites = {
      {"solver", suite_solver}, {"eq8", suite_polarization},       {"eq10", suite_pointer},
      {"eq11", suite_qpc},     {"weak-limit", suite_weak_limit},
      {"moments", suite_moments}, {"range", suite_range}, {"mc", suite_mc},
      {"fig2", suite_fig2}};
  return suites;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

std::optional<std::vector<PropertyResult>> run_suite(std::string_view name) {
  std::vector<PropertyResult> out;
  for (const auto& [suite, fn] : registry()) {
    if (name != "all" && name != suite) continue;
    auto results = fn();
    out.insert(out.end(), results.begin(), results.end());
  }
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace cvtool::cli
