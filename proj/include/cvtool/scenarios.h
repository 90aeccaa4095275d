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

#ifndef CVTOOL_SCENARIOS_H
#define CVTOOL_SCENARIOS_H

#include <cstddef>
#include <string>
#include <vector>

#include "cvtool/averaging.h"
#include "cvtool/cv_solver.h"
#include "cvtool/operator_core.h"

namespace cvtool {

// ---------------------------------------------------------------------------
// Named states and simple contexts.

/// (cos(angle/2), sin(angle/2)) in the z basis.
ComplexVector bloch_state(double angle);

/// exp(-i theta sigma_x / 2).
ComplexMatrix x_rotation(double theta);

/// Two-outcome projective measurement {|f><f|, 1 - |f><f|}; outcome 0 is f.
MeasurementContext projective_context(const ComplexVector& f);

/// Projective measurement in the computational basis preceded by `unitary`:
/// Kraus operators |k><k| U.
MeasurementContext rotated_basis_context(const ComplexMatrix& unitary);

/// Single-outcome context {1}: measuring it postselects nothing.
MeasurementContext trivial_context(std::size_t dim);

// ---------------------------------------------------------------------------
// Photon polarization with tunable strength.

/// M_+ = gamma Pi_H + gamma_bar Pi_V, M_- = gamma_bar Pi_H + gamma Pi_V with
/// gamma_bar = sqrt(1 - gamma^2). The POVM is (1 +- g sigma_z)/2 with
/// g = gamma^2 - gamma_bar^2. Requires 0 < gamma <= 1.
MeasurementContext polarization_context(double gamma);

/// gamma giving measurement strength g in [-1, 1].
double polarization_gamma(double strength);

/// (|a|^2 - |b|^2) / (1 - 4 gamma gamma_bar Re[a b*]) for the input state
/// a|H> + b|V> postselected on (|H> - |V>)/sqrt(2).
double polarization_conditioned_oracle(Complex a, Complex b, double gamma);

/// (|H> - |V>)/sqrt(2).
ComplexVector polarization_postselection_state();

// ---------------------------------------------------------------------------
// Continuous pointer (von Neumann) detector.

enum class PointerShape { kGaussian, kBox };

class PointerDistribution {
 public:
  /// exp(-q^2 / 2 sigma^2) / (sigma sqrt(2 pi)).
  static PointerDistribution gaussian(double sigma);
  /// 1/w on [-w/2, w/2].
  static PointerDistribution box(double width);

  PointerShape shape() const { return shape_; }
  /// sigma for the Gaussian, w for the box.
  double width() const { return width_; }
  const char* name() const;

  double density(double q) const;
  /// a = integral of P_D(q)^2.
  double self_overlap() const;
  /// b(g) = integral of P_D(q - g) P_D(q + g).
  double shifted_overlap(double g) const;
  /// a - b(g), evaluated without cancellation for small g.
  double overlap_gap(double g) const;
  /// integral of sqrt(P_D(q - g) P_D(q + g)).
  double amplitude_overlap(double g) const;
  /// Half-width a grid around the shifted densities must cover.
  double required_half_width(double g) const;
  /// Positions where the density is discontinuous (empty for the Gaussian).
  std::vector<double> breakpoints() const;

 private:
  PointerDistribution(PointerShape shape, double width)
      : shape_(shape), width_(width) {}

  PointerShape shape_;
  double width_;
};

/// Uniform midpoint grid: n_points cells of width (q_max - q_min)/n_points
/// whose centers are the sample positions.
struct Grid {
  double q_min = 0.0;
  double q_max = 0.0;
  std::size_t n_points = 0;

  double cell_width() const;
  double position(std::size_t i) const;
};

inline constexpr std::size_t kDefaultGridPoints = 1201;

/// +-(|g| + 6 sigma) for the Gaussian and +-(|g| + w) for the box. For the
/// box the point count is raised to the smallest value (up to 4x) at which
/// every density discontinuity falls on a cell boundary.
Grid default_grid(const PointerDistribution& dist, double coupling,
                  std::size_t n_points = kDefaultGridPoints);

struct DetectorModel {
  PointerDistribution distribution;
  double coupling;
  Grid grid;

  /// Throws GridInadequate when the grid is malformed or does not cover the
  /// shifted densities.
  void validate() const;
};

DetectorModel make_detector(const PointerDistribution& dist, double coupling);

struct DiscretizedDetector {
  MeasurementContext context;
  std::vector<double> positions;
  double cell_width;
  /// ||sum_i E(q_i) - 1|| before renormalization.
  double completeness_defect;
};

/// One Kraus operator per grid cell,
/// M_i = diag(sqrt(P_D(q_i - g) dq), sqrt(P_D(q_i + g) dq)), renormalized to
/// exact completeness. Throws GridInadequate when the defect exceeds 1e-3.
DiscretizedDetector detector_context(const DetectorModel& model);

/// Minimum-norm contextual values of sigma_z on a discretized detector.
std::vector<double> detector_cv_discrete(const DiscretizedDetector& detector,
                                         double svd_tol = kDefaultSvdTolerance);

/// sigma_z(q) = [P_D(q - g) - P_D(q + g)] / (a - b(g)). Throws
/// DegenerateCoupling when |a - b(g)| < 1e-12.
double detector_cv_analytic(const DetectorModel& model, double q);
double detector_cv_analytic(const PointerDistribution& dist, double coupling,
                            double q);

/// cos(alpha) / (1 + sin(alpha) exp(-g^2 / 2 sigma^2)) for preparation
/// bloch_state(alpha), postselection bloch_state(pi/2) and a Gaussian
/// pointer. Throws DivergentPostselection.
double aav_conditioned_oracle(double alpha, double g, double sigma);

/// Same closed form for any pointer shape:
/// cos(alpha) / (1 + sin(alpha) * amplitude_overlap(g)).
double aav_conditioned_oracle(const PointerDistribution& dist, double alpha,
                              double g);

/// Conditioned average of sigma_z on the discretized detector for the given
/// preparation and a projective postselection on `postselected`.
ConditionedResult detector_conditioned_average(
    const DiscretizedDetector& detector, const std::vector<double>& cv,
    const DensityOperator& rho, const ComplexVector& postselected);

// ---------------------------------------------------------------------------
// Quantum point contact.

/// Raw detector parameters with the reduction to the pointer model:
/// I0 = (I1 + I2)/2, g = (I1 - I2)/2, sigma^2 = S_I / 2t, tau = (g/sigma)^2.
class QpcParams {
 public:
  QpcParams(double current1, double current2, double noise_power,
            double averaging_time);
  /// Dimensionless parameters with g = 1 and sigma = 1/sqrt(tau).
  static QpcParams from_tau(double tau);

  double current1() const { return current1_; }
  double current2() const { return current2_; }
  double noise_power() const { return noise_power_; }
  double averaging_time() const { return averaging_time_; }

  double mean_current() const { return 0.5 * (current1_ + current2_); }
  double coupling() const { return 0.5 * (current1_ - current2_); }
  double sigma() const;
  double tau() const;
  /// u = (I - I0) / g.
  double reduced_position(double current) const;

 private:
  double current1_;
  double current2_;
  double noise_power_;
  double averaging_time_;
};

/// sqrt(2) exp(-u^2 tau / 2) sinh(u tau) / sinh(tau / 2).
double qpc_cv(double u, double tau);

/// Conditioned average for a measurement of duration tau, a rotation by
/// theta about sigma_x, and projective postselection on |+1>. Throws
/// DivergentPostselection.
double qpc_conditioned_oracle(const DensityOperator& rho, double theta,
                              double tau);

/// The same quantity computed end to end: discretized Gaussian detector in
/// the reduced variable u, discrete contextual values, rotation and
/// postselection.
double qpc_full_pipeline(const QpcParams& params, const DensityOperator& rho,
                         double theta,
                         std::size_t n_points = kDefaultGridPoints);

}  // namespace cvtool

#endif  // CVTOOL_SCENARIOS_H
