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

#include "cvtool/scenarios.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace cvtool {
namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// sqrt(2) (phi(x - r) - phi(x + r)) / (1 - exp(-r^2)) in units where the
// Gaussian has unit width; this is the Gaussian pointer CV at q = x sigma
// for coupling g = r sigma.
double gaussian_cv_reduced(double x, double r) {
  const double gap = -std::expm1(-r * r);
  if (!(std::abs(gap) >= 1e-12)) {
    throw DegenerateCoupling("coupling too small: a - b(g) vanishes");
  }
  const double xr = x * r;
  double numerator;
  if (std::abs(xr) < 1.0) {
    numerator = 2.0 * std::exp(-0.5 * (x * x + r * r)) * std::sinh(xr);
  } else {
    numerator = std::exp(-0.5 * (x - r) * (x - r)) -
                std::exp(-0.5 * (x + r) * (x + r));
  }
  return kSqrt2 * numerator / gap;
}

}  // namespace

ComplexVector bloch_state(double angle) {
  ComplexVector v(2);
  v << std::cos(angle / 2.0), std::sin(angle / 2.0);
  return v;
}

ComplexMatrix x_rotation(double theta) {
  const Complex i(0.0, 1.0);
  return std::cos(theta / 2.0) * pauli::identity() -
         i * std::sin(theta / 2.0) * pauli::x();
}

MeasurementContext projective_context(const ComplexVector& f) {
  const double norm = f.norm();
  if (!(norm > 0.0)) throw InvalidArgument("postselection state has zero norm");
  const ComplexVector unit = f / norm;
  const ComplexMatrix proj = unit * unit.adjoint();
  const auto d = static_cast<Eigen::Index>(f.size());
  return context_from_kraus({proj, ComplexMatrix::Identity(d, d) - proj});
}

MeasurementContext rotated_basis_context(const ComplexMatrix& unitary) {
  std::vector<ComplexMatrix> kraus;
  const Eigen::Index d = unitary.rows();
  for (Eigen::Index k = 0; k < d; ++k) {
    ComplexMatrix proj = ComplexMatrix::Zero(d, d);
    proj(k, k) = 1.0;
    kraus.push_back(proj * unitary);
  }
  return context_from_kraus(std::move(kraus));
}

MeasurementContext trivial_context(std::size_t dim) {
  return context_from_kraus({pauli::identity(dim)});
}

MeasurementContext polarization_context(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw InvalidArgument("polarization gamma must lie in (0, 1]");
  }
  const double gamma_bar = std::sqrt(1.0 - gamma * gamma);
  return context_from_kraus({diag2(gamma, gamma_bar), diag2(gamma_bar, gamma)});
}

double polarization_gamma(double strength) {
  if (!(strength >= -1.0 && strength <= 1.0)) {
    throw InvalidArgument("measurement strength must lie in [-1, 1]");
  }
  return std::sqrt(0.5 * (1.0 + strength));
}

double polarization_conditioned_oracle(Complex a, Complex b, double gamma) {
  const double norm = std::norm(a) + std::norm(b);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw InvalidArgument("polarization amplitudes are not normalized");
  }
  const double gamma_bar = std::sqrt(1.0 - gamma * gamma);
  const double denominator =
      1.0 - 4.0 * gamma * gamma_bar * (a * std::conj(b)).real();
  if (!(std::abs(denominator) > 1e-12)) {
    throw DivergentPostselection("postselection probability vanishes");
  }
  return (std::norm(a) - std::norm(b)) / denominator;
}

ComplexVector polarization_postselection_state() {
  ComplexVector v(2);
  v << 1.0 / kSqrt2, -1.0 / kSqrt2;
  return v;
}

PointerDistribution PointerDistribution::gaussian(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("Gaussian width must be positive");
  }
  return PointerDistribution(PointerShape::kGaussian, sigma);
}

PointerDistribution PointerDistribution::box(double width) {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidArgument("box width must be positive");
  }
  return PointerDistribution(PointerShape::kBox, width);
}

const char* PointerDistribution::name() const {
  return shape_ == PointerShape::kGaussian ? "gaussian" : "box";
}

double PointerDistribution::density(double q) const {
  if (shape_ == PointerShape::kGaussian) {
    const double x = q / width_;
    return std::exp(-0.5 * x * x) / (width_ * std::sqrt(2.0 * std::numbers::pi));
  }
  return std::abs(q) <= 0.5 * width_ ? 1.0 / width_ : 0.0;
}

double PointerDistribution::self_overlap() const {
  if (shape_ == PointerShape::kGaussian) {
    return 1.0 / (2.0 * width_ * std::sqrt(std::numbers::pi));
  }
  return 1.0 / width_;
}

double PointerDistribution::shifted_overlap(double g) const {
  if (shape_ == PointerShape::kGaussian) {
    const double r = g / width_;
    return self_overlap() * std::exp(-r * r);
  }
  return std::max(0.0, width_ - 2.0 * std::abs(g)) / (width_ * width_);
}

double PointerDistribution::overlap_gap(double g) const {
  if (shape_ == PointerShape::kGaussian) {
    const double r = g / width_;
    return -self_overlap() * std::expm1(-r * r);
  }
  return std::min(width_, 2.0 * std::abs(g)) / (width_ * width_);
}

double PointerDistribution::amplitude_overlap(double g) const {
  if (shape_ == PointerShape::kGaussian) {
    const double r = g / width_;
    return std::exp(-0.5 * r * r);
  }
  return std::max(0.0, width_ - 2.0 * std::abs(g)) / width_;
}

double PointerDistribution::required_half_width(double g) const {
  if (shape_ == PointerShape::kGaussian) return std::abs(g) + 5.0 * width_;
  return std::abs(g) + 0.5 * width_;
}

std::vector<double> PointerDistribution::breakpoints() const {
  if (shape_ == PointerShape::kGaussian) return {};
  return {-0.5 * width_, 0.5 * width_};
}

double Grid::cell_width() const {
  return (q_max - q_min) / static_cast<double>(n_points);
}

double Grid::position(std::size_t i) const {
  return q_min + (q_max - q_min) * (static_cast<double>(i) + 0.5) /
                     static_cast<double>(n_points);
}

Grid default_grid(const PointerDistribution& dist, double coupling,
                  std::size_t n_points) {
  if (n_points < 2) throw InvalidArgument("grid needs at least two points");
  const double half = dist.shape() == PointerShape::kGaussian
                          ? std::abs(coupling) + 6.0 * dist.width()
                          : std::abs(coupling) + dist.width();
  Grid grid{-half, half, n_points};
  std::vector<double> edges;
  for (const double b : dist.breakpoints()) {
    edges.push_back(b + coupling);
    edges.push_back(b - coupling);
  }
  if (edges.empty()) return grid;
  for (std::size_t n = n_points; n <= 4 * n_points; ++n) {
    const double dq = 2.0 * half / static_cast<double>(n);
    const bool aligned = std::all_of(edges.begin(), edges.end(), [&](double e) {
      const double cells = (e + half) / dq;
      return std::abs(cells - std::round(cells)) < 1e-6;
    });
    if (aligned) {
      grid.n_points = n;
      return grid;
    }
  }
  return grid;
}

void DetectorModel::validate() const {
  if (grid.n_points < 2 || !(grid.q_max > grid.q_min) ||
      !std::isfinite(grid.q_min) || !std::isfinite(grid.q_max)) {
    throw GridInadequate("grid must have at least two points and q_max > q_min");
  }
  if (!std::isfinite(coupling)) throw InvalidArgument("coupling is not finite");
  const double need = distribution.required_half_width(coupling);
  if (grid.q_min > -need || grid.q_max < need) {
    throw GridInadequate("grid [" + std::to_string(grid.q_min) + ", " +
                         std::to_string(grid.q_max) +
                         "] does not cover +-" + std::to_string(need));
  }
}

DetectorModel make_detector(const PointerDistribution& dist, double coupling) {
  return DetectorModel{dist, coupling, default_grid(dist, coupling)};
}

DiscretizedDetector detector_context(const DetectorModel& model) {
  model.validate();
  const double dq = model.grid.cell_width();
  const double g = model.coupling;
  std::vector<ComplexMatrix> kraus;
  std::vector<double> positions;
  kraus.reserve(model.grid.n_points);
  positions.reserve(model.grid.n_points);
  for (std::size_t i = 0; i < model.grid.n_points; ++i) {
    const double q = model.grid.position(i);
    positions.push_back(q);
    kraus.push_back(diag2(std::sqrt(model.distribution.density(q - g) * dq),
                          std::sqrt(model.distribution.density(q + g) * dq)));
  }
  ComplexMatrix total = ComplexMatrix::Zero(2, 2);
  for (const auto& m : kraus) total += m.adjoint() * m;
  const double defect = operator_norm(total - pauli::identity());
  if (defect > 1e-3) {
    throw GridInadequate("detector grid completeness defect " +
                         std::to_string(defect) + " exceeds 1e-3");
  }
  RenormalizedContext renorm = renormalized_context(std::move(kraus));
  return DiscretizedDetector{std::move(renorm.context), std::move(positions), dq,
                             defect};
}

std::vector<double> detector_cv_discrete(const DiscretizedDetector& detector,
                                         double svd_tol) {
  SolverOptions options;
  options.svd_tol = svd_tol;
  options.strict = true;
  options.compute_null_basis = false;
  const ContextualValueSolution solution = solve_contextual_values(
      spectral_decompose(pauli::z()), detector.context, options);
  return to_std_vector(solution.alpha0);
}

double detector_cv_analytic(const PointerDistribution& dist, double coupling,
                            double q) {
  if (dist.shape() == PointerShape::kGaussian) {
    return gaussian_cv_reduced(q / dist.width(), coupling / dist.width());
  }
  const double gap = dist.overlap_gap(coupling);
  if (!(std::abs(gap) >= 1e-12)) {
    throw DegenerateCoupling("coupling too small: a - b(g) vanishes");
  }
  return (dist.density(q - coupling) - dist.density(q + coupling)) / gap;
}

double detector_cv_analytic(const DetectorModel& model, double q) {
  return detector_cv_analytic(model.distribution, model.coupling, q);
}

double aav_conditioned_oracle(const PointerDistribution& dist, double alpha,
                              double g) {
  const double denominator =
      1.0 + std::sin(alpha) * dist.amplitude_overlap(g);
  if (!(std::abs(denominator) > 1e-12)) {
    throw DivergentPostselection("postselection probability vanishes");
  }
  return std::cos(alpha) / denominator;
}

double aav_conditioned_oracle(double alpha, double g, double sigma) {
  return aav_conditioned_oracle(PointerDistribution::gaussian(sigma), alpha, g);
}

ConditionedResult detector_conditioned_average(
    const DiscretizedDetector& detector, const std::vector<double>& cv,
    const DensityOperator& rho, const ComplexVector& postselected) {
  const ConditionedSetup setup(detector.context, cv,
                               projective_context(postselected), 0);
  return conditioned_average_detail(setup, rho);
}

QpcParams::QpcParams(double current1, double current2, double noise_power,
                     double averaging_time)
    : current1_(current1),
      current2_(current2),
      noise_power_(noise_power),
      averaging_time_(averaging_time) {
  if (!std::isfinite(current1) || !std::isfinite(current2) ||
      current1 == current2) {
    throw InvalidArgument("QPC currents must be finite and distinct");
  }
  if (!(noise_power > 0.0) || !(averaging_time > 0.0)) {
    throw InvalidArgument("QPC noise power and averaging time must be positive");
  }
}

QpcParams QpcParams::from_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw InvalidArgument("tau must be positive");
  }
  // g = 1 and sigma^2 = S_I / 2t = 1 / tau.
  return QpcParams(1.0, -1.0, 2.0 / tau, 1.0);
}

double QpcParams::sigma() const {
  return std::sqrt(noise_power_ / (2.0 * averaging_time_));
}

double QpcParams::tau() const {
  const double r = coupling() / sigma();
  return r * r;
}

double QpcParams::reduced_position(double current) const {
  return (current - mean_current()) / coupling();
}

double qpc_cv(double u, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  // With g = 1 the pointer width is 1/sqrt(tau).
  const double r = std::sqrt(tau);
  return gaussian_cv_reduced(u * r, r);
}

double qpc_conditioned_oracle(const DensityOperator& rho, double theta,
                              double tau) {
  if (rho.dim() != 2) throw DimensionMismatch("QPC model is a qubit");
  const double c2 = std::pow(std::cos(theta / 2.0), 2);
  const double s2 = std::pow(std::sin(theta / 2.0), 2);
  const double r11 = rho.matrix()(0, 0).real();
  const double r22 = rho.matrix()(1, 1).real();
  const double im12 = rho.matrix()(0, 1).imag();
  const double denominator =
      c2 * r11 + s2 * r22 - std::sin(theta) * im12 * std::exp(-tau / 2.0);
  if (!(std::abs(denominator) > 1e-12)) {
    throw DivergentPostselection("postselection probability vanishes");
  }
  return (c2 * r11 - s2 * r22) / denominator;
}

double qpc_full_pipeline(const QpcParams& params, const DensityOperator& rho,
                         double theta, std::size_t n_points) {
  if (rho.dim() != 2) throw DimensionMismatch("QPC model is a qubit");
  const auto dist = PointerDistribution::gaussian(1.0 / std::sqrt(params.tau()));
  const DetectorModel model{dist, 1.0, default_grid(dist, 1.0, n_points)};
  const DiscretizedDetector detector = detector_context(model);
  const std::vector<double> cv = detector_cv_discrete(detector);
  const ConditionedSetup setup(detector.context, cv,
                               rotated_basis_context(x_rotation(theta)), 0);
  return conditioned_average(setup, rho);
}

}  // namespace cvtool
