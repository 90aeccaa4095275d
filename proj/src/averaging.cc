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

#include "cvtool/averaging.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cvtool/cv_solver.h"

namespace cvtool {
namespace {

void check_values(const std::vector<double>& cv, const MeasurementContext& ctx) {
  if (cv.size() != ctx.size()) {
    throw DimensionMismatch("value vector length " + std::to_string(cv.size()) +
                            " differs from outcome count " +
                            std::to_string(ctx.size()));
  }
}

void check_order(int n) {
  if (n < 1 || n > kMaxMomentOrder) {
    throw InvalidArgument("moment order must lie in [1, " +
                          std::to_string(kMaxMomentOrder) + "]");
  }
}

std::size_t int_pow(std::size_t base, int exp) {
  std::size_t out = 1;
  for (int i = 0; i < exp; ++i) {
    out *= base;
    if (out > kMaxSequenceTableSize) {
      throw InvalidArgument("outcome-sequence table too large");
    }
  }
  return out;
}

}  // namespace

double reconstructed_average(const std::vector<double>& cv,
                             const MeasurementContext& ctx,
                             const DensityOperator& rho) {
  check_values(cv, ctx);
  const std::vector<double> probs = outcome_probabilities(ctx, rho);
  double sum = 0.0;
  for (std::size_t j = 0; j < cv.size(); ++j) sum += cv[j] * probs[j];
  return sum;
}

double SequenceProbabilities::at(const std::vector<std::size_t>& sequence) const {
  if (sequence.size() != static_cast<std::size_t>(length)) {
    throw InvalidArgument("sequence length mismatch");
  }
  std::size_t index = 0;
  for (const std::size_t j : sequence) {
    if (j >= outcomes) throw InvalidArgument("outcome index out of range");
    index = index * outcomes + j;
  }
  return probabilities[index];
}

SequenceProbabilities sequence_probabilities(const MeasurementContext& ctx,
                                             const DensityOperator& rho,
                                             int n) {
  check_order(n);
  if (ctx.dim() != rho.dim()) {
    throw DimensionMismatch("context and state dimensions differ");
  }
  SequenceProbabilities out;
  out.outcomes = ctx.size();
  out.length = n;
  out.probabilities.assign(int_pow(ctx.size(), n), 0.0);

  std::function<void(const DensityOperator&, int, std::size_t, double)> walk =
      [&](const DensityOperator& state, int depth, std::size_t prefix,
          double weight) {
        for (std::size_t j = 0; j < ctx.size(); ++j) {
          const std::size_t index = prefix * ctx.size() + j;
          BranchUpdate branch{state, 0.0};
          try {
            branch = state_update(ctx.kraus()[j], state);
          } catch (const ZeroProbabilityBranch&) {
            continue;  // the whole subtree stays at zero
          }
          const double p = weight * branch.probability;
          if (depth + 1 == n) {
            out.probabilities[index] = p;
          } else {
            walk(branch.state, depth + 1, index, p);
          }
        }
      };
  walk(rho, 0, 0, 1.0);
  return out;
}

double moment(const std::vector<double>& cv, const MeasurementContext& ctx,
              const DensityOperator& rho, int n) {
  check_values(cv, ctx);
  check_order(n);
  const ComplexMatrix a = assemble_operator(cv, ctx);
  std::vector<ComplexMatrix> ops = ctx.kraus();
  ops.push_back(a);
  const double scale = std::max(1.0, operator_norm(a));
  if (max_commutator_norm(ops) > kDefaultTolerance * scale) {
    throw NonCommutingContext(
        "moment reconstruction needs Kraus operators commuting with each "
        "other and with the observable");
  }
  const SequenceProbabilities seq = sequence_probabilities(ctx, rho, n);
  const std::size_t outcomes = ctx.size();
  double sum = 0.0;
  for (std::size_t index = 0; index < seq.probabilities.size(); ++index) {
    if (seq.probabilities[index] == 0.0) continue;
    double product = 1.0;
    std::size_t rest = index;
    for (int k = 0; k < n; ++k) {
      product *= cv[rest % outcomes];
      rest /= outcomes;
    }
    sum += product * seq.probabilities[index];
  }
  return sum;
}

double cv_moment(const std::vector<double>& cv, const MeasurementContext& ctx,
                 const DensityOperator& rho, int n) {
  check_values(cv, ctx);
  if (n < 0) throw InvalidArgument("moment order must be non-negative");
  const std::vector<double> probs = outcome_probabilities(ctx, rho);
  double sum = 0.0;
  for (std::size_t j = 0; j < cv.size(); ++j) {
    sum += std::pow(cv[j], n) * probs[j];
  }
  return sum;
}

ConditionedSetup::ConditionedSetup(MeasurementContext first,
                                   std::vector<double> cv,
                                   MeasurementContext second,
                                   std::size_t postselect)
    : first_(std::move(first)),
      cv_(std::move(cv)),
      second_(std::move(second)),
      postselect_(postselect) {
  check_values(cv_, first_);
  if (first_.dim() != second_.dim()) {
    throw DimensionMismatch("first and second contexts act on different spaces");
  }
  if (postselect_ >= second_.size()) {
    throw InvalidArgument("postselected outcome index out of range");
  }
  second_effect_ = second_.povm()[postselect_];
}

ComplexMatrix ConditionedSetup::joint_effect(std::size_t j) const {
  const ComplexMatrix& m = first_.kraus().at(j);
  return hermitian_part(m.adjoint() * second_effect_ * m);
}

ConditionedResult conditioned_average_detail(const ConditionedSetup& setup,
                                             const DensityOperator& rho) {
  if (setup.first().dim() != rho.dim()) {
    throw DimensionMismatch("setup and state dimensions differ");
  }
  const std::size_t n = setup.first().size();
  const ComplexMatrix& effect = setup.second().povm()[setup.postselect()];
  ConditionedResult out;
  out.joint.resize(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const ComplexMatrix& m = setup.first().kraus()[j];
    const double p =
        (effect * m * rho.matrix() * m.adjoint()).trace().real();
    out.joint[j] = std::max(p, 0.0);
    total += out.joint[j];
  }
  out.postselection_probability = total;
  if (!(total > kPostselectionFloor)) {
    throw ZeroPostselectionProbability(
        "postselection probability " + std::to_string(total) +
        " is below the floor");
  }
  out.conditional.resize(n);
  double value = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    out.conditional[j] = out.joint[j] / total;
    value += setup.cv()[j] * out.conditional[j];
  }
  out.value = value;
  return out;
}

double conditioned_average(const ConditionedSetup& setup,
                           const DensityOperator& rho) {
  return conditioned_average_detail(setup, rho).value;
}

Complex weak_value_raw(const ComplexMatrix& observable,
                       const ComplexMatrix& effect,
                       const DensityOperator& rho) {
  if (observable.rows() != effect.rows() ||
      static_cast<std::size_t>(effect.rows()) != rho.dim()) {
    throw DimensionMismatch("weak value operands have different dimensions");
  }
  const Complex denominator = (effect * rho.matrix()).trace();
  if (!(denominator.real() > kPostselectionFloor)) {
    throw ZeroPostselectionProbability(
        "postselection probability is below the floor");
  }
  const Complex numerator =
      (effect * anticommutator(observable, rho.matrix())).trace();
  return numerator / (2.0 * denominator.real());
}

double weak_value(const Observable& obs, const ComplexMatrix& effect,
                  const DensityOperator& rho) {
  if (!is_hermitian(effect, kDefaultTolerance) ||
      min_eigenvalue(effect) < -kDefaultTolerance) {
    throw InvalidArgument("postselection effect is not positive semidefinite");
  }
  const Complex raw = weak_value_raw(obs.matrix(), effect, rho);
  const double denominator = (effect * rho.matrix()).trace().real();
  // The anticommutator trace is real for Hermitian inputs; anything larger
  // than roundoff means the inputs were not what they claimed.
  if (std::abs(raw.imag()) * denominator >
      1e-12 * std::max(1.0, operator_norm(obs.matrix()))) {
    throw InvalidArgument("weak value has a non-negligible imaginary part");
  }
  return raw.real();
}

Complex aav_weak_value(const Observable& obs, const ComplexVector& psi_i,
                       const ComplexVector& psi_f) {
  if (static_cast<std::size_t>(psi_i.size()) != obs.dim() ||
      psi_f.size() != psi_i.size()) {
    throw DimensionMismatch("state vectors and observable differ in dimension");
  }
  const Complex overlap = psi_f.dot(psi_i);
  if (std::abs(overlap) <= 1e-12 * psi_f.norm() * psi_i.norm()) {
    throw OrthogonalPostselection("pre- and postselected states are orthogonal");
  }
  return psi_f.dot(obs.matrix() * psi_i) / overlap;
}

}  // namespace cvtool
