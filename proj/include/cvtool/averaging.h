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

#ifndef CVTOOL_AVERAGING_H
#define CVTOOL_AVERAGING_H

#include <cstddef>
#include <vector>

#include "cvtool/operator_core.h"

namespace cvtool {

/// Probabilities below this floor make a conditioned quotient unstable.
inline constexpr double kPostselectionFloor = 1e-12;

/// Longest measurement sequence accepted by the moment routines.
inline constexpr int kMaxMomentOrder = 8;

/// Upper bound on N^n for sequence tables.
inline constexpr std::size_t kMaxSequenceTableSize = std::size_t{1} << 24;

/// sum_j alpha_j Tr[E_j rho].
double reconstructed_average(const std::vector<double>& cv,
                             const MeasurementContext& ctx,
                             const DensityOperator& rho);

/// Joint probabilities of n repeated measurements with the same context.
/// The flat index of (j_1, ..., j_n) is j_1 N^{n-1} + ... + j_n.
struct SequenceProbabilities {
  std::size_t outcomes = 0;
  int length = 0;
  std::vector<double> probabilities;

  double at(const std::vector<std::size_t>& sequence) const;
};

SequenceProbabilities sequence_probabilities(const MeasurementContext& ctx,
                                             const DensityOperator& rho,
                                             int n);

/// sum alpha_{j1} ... alpha_{jn} P_{j1...jn}. The observable is the one the
/// values reconstruct, sum_j alpha_j E_j; it and every Kraus operator must
/// commute (NonCommutingContext otherwise).
double moment(const std::vector<double>& cv, const MeasurementContext& ctx,
              const DensityOperator& rho, int n);

/// sum_j alpha_j^n P_j. Agrees with the observable's moment only for n = 1.
double cv_moment(const std::vector<double>& cv, const MeasurementContext& ctx,
                 const DensityOperator& rho, int n);

/// A first measurement with contextual values followed by a second
/// measurement postselected on one of its outcomes.
class ConditionedSetup {
 public:
  ConditionedSetup(MeasurementContext first, std::vector<double> cv,
                   MeasurementContext second, std::size_t postselect);

  const MeasurementContext& first() const { return first_; }
  const std::vector<double>& cv() const { return cv_; }
  const MeasurementContext& second() const { return second_; }
  std::size_t postselect() const { return postselect_; }

  /// E^{(1,2)}_{jf} = M1_j^dagger M2_f^dagger M2_f M1_j for the postselected f.
  ComplexMatrix joint_effect(std::size_t j) const;

 private:
  MeasurementContext first_;
  std::vector<double> cv_;
  MeasurementContext second_;
  std::size_t postselect_;
  ComplexMatrix second_effect_;
};

struct ConditionedResult {
  double value = 0.0;
  /// P_f.
  double postselection_probability = 0.0;
  /// P_{jf}.
  std::vector<double> joint;
  /// P_{j|f}.
  std::vector<double> conditional;
};

/// sum_j alpha_j P_{j|f}. Throws ZeroPostselectionProbability when
/// P_f <= 1e-12.
ConditionedResult conditioned_average_detail(const ConditionedSetup& setup,
                                             const DensityOperator& rho);
double conditioned_average(const ConditionedSetup& setup,
                           const DensityOperator& rho);

/// Tr[E_f {A, rho}] / 2 Tr[E_f rho] before the imaginary part is dropped.
Complex weak_value_raw(const ComplexMatrix& observable,
                       const ComplexMatrix& effect,
                       const DensityOperator& rho);

/// Generalized weak value, the minimal-disturbance limit of the conditioned
/// average. Throws ZeroPostselectionProbability when Tr[E_f rho] <= 1e-12.
double weak_value(const Observable& obs, const ComplexMatrix& effect,
                  const DensityOperator& rho);

/// <psi_f|A|psi_i> / <psi_f|psi_i>. Throws OrthogonalPostselection.
Complex aav_weak_value(const Observable& obs, const ComplexVector& psi_i,
                       const ComplexVector& psi_f);

}  // namespace cvtool

#endif  // CVTOOL_AVERAGING_H
