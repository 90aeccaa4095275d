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

#ifndef CVTOOL_MONTECARLO_H
#define CVTOOL_MONTECARLO_H

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cvtool/averaging.h"
#include "cvtool/operator_core.h"

namespace cvtool {

/// xoshiro256** (Blackman and Vigna), state seeded from a 64-bit value with
/// splitmix64.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

 private:
  std::uint64_t s_[4];
};

/// Inverse-CDF draw: the first index whose cumulative probability exceeds a
/// uniform variate.
std::size_t sample_outcome(std::span<const double> probabilities, Xoshiro256& rng);

/// Inverse-CDF sampler with a precomputed cumulative table (binary search).
class DiscreteSampler {
 public:
  explicit DiscreteSampler(std::span<const double> probabilities);
  std::size_t sample(Xoshiro256& rng) const;
  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

/// Trials are split into blocks of kTrialBlock. Block b draws from its own
/// generator seeded with (seed, b), and worker threads take whole blocks, so
/// results do not depend on the thread count.
inline constexpr std::uint64_t kTrialBlock = 4096;

struct RunConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct EmpiricalResult {
  /// Outcome counts. For conditioned runs these are joint counts of (first
  /// outcome j, second outcome f') at flat index j * N2 + f'; for moment runs
  /// they are sequence counts in the SequenceProbabilities layout.
  std::vector<std::uint64_t> counts;
  double estimate = 0.0;
  double standard_error = 0.0;
  /// Fraction of trials kept by postselection (1 for unconditioned runs).
  double postselection_rate = 1.0;
  std::uint64_t trials = 0;
  std::uint64_t accepted = 0;
};

/// Sample-mean estimate of sum_j alpha_j P_j with its standard error.
EmpiricalResult empirical_average(const std::vector<double>& cv,
                                  const MeasurementContext& ctx,
                                  const DensityOperator& rho,
                                  const RunConfig& cfg);

/// Simulates the sequential measurement with explicit state updates and
/// averages the first-measurement values over trials whose second outcome is
/// the postselected one. Throws NoPostselectedTrials.
EmpiricalResult empirical_conditioned_average(const ConditionedSetup& setup,
                                              const DensityOperator& rho,
                                              const RunConfig& cfg);

/// Samples length-n outcome sequences and averages the products of their
/// values. Throws NonCommutingContext like moment().
EmpiricalResult empirical_moment(const std::vector<double>& cv,
                                 const MeasurementContext& ctx,
                                 const DensityOperator& rho, int n,
                                 const RunConfig& cfg);

}  // namespace cvtool

#endif  // CVTOOL_MONTECARLO_H
