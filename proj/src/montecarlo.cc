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

#include "cvtool/montecarlo.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <thread>
#include <unordered_map>

#include "cvtool/cv_solver.h"

namespace cvtool {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block) {
  std::uint64_t x = seed ^ rotl(block * 0xD1B54A32D192ED03ULL + 1, 17);
  return splitmix64(x);
}

// Runs cfg.trials trials. `make_worker` builds per-thread state; the worker's
// operator()(rng) performs one trial and returns the flat count index.
template <typename MakeWorker>
std::vector<std::uint64_t> run_blocks(const RunConfig& cfg, std::size_t bins,
                                      const MakeWorker& make_worker) {
  if (cfg.trials == 0) throw InvalidArgument("trials must be at least 1");
  const std::uint64_t blocks = (cfg.trials + kTrialBlock - 1) / kTrialBlock;
  const unsigned threads = static_cast<unsigned>(
      std::clamp<std::uint64_t>(cfg.threads == 0 ? 1 : cfg.threads, 1, blocks));

  std::vector<std::vector<std::uint64_t>> partial(
      threads, std::vector<std::uint64_t>(bins, 0));
  auto run_share = [&](unsigned t) {
    auto worker = make_worker();
    std::vector<std::uint64_t>& counts = partial[t];
    for (std::uint64_t b = t; b < blocks; b += threads) {
      Xoshiro256 rng(block_seed(cfg.seed, b));
      const std::uint64_t begin = b * kTrialBlock;
      const std::uint64_t end = std::min(cfg.trials, begin + kTrialBlock);
      for (std::uint64_t i = begin; i < end; ++i) ++counts[worker(rng)];
    }
  };
  if (threads == 1) {
    run_share(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run_share, t);
    for (auto& th : pool) th.join();
  }
  std::vector<std::uint64_t> total(bins, 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < bins; ++i) total[i] += p[i];
  }
  return total;
}

struct MeanAndError {
  double mean = 0.0;
  double standard_error = 0.0;
};

// Plug-in mean and standard error of a discrete variable that took value
// values[i] counts[i] times.
MeanAndError summarize(const std::vector<double>& values,
                       const std::vector<std::uint64_t>& counts) {
  std::uint64_t n = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    n += counts[i];
    sum += static_cast<double>(counts[i]) * values[i];
  }
  MeanAndError out;
  if (n == 0) return out;
  out.mean = sum / static_cast<double>(n);
  if (n < 2) return out;
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (counts[i] == 0) continue;
    const double dev = values[i] - out.mean;
    ss += static_cast<double>(counts[i]) * dev * dev;
  }
  const double variance = ss / static_cast<double>(n - 1);
  out.standard_error = std::sqrt(variance / static_cast<double>(n));
  return out;
}

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t x = seed;
  for (auto& s : s_) s = splitmix64(x);
}

std::uint64_t Xoshiro256::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::size_t sample_outcome(std::span<const double> probabilities,
                           Xoshiro256& rng) {
  if (probabilities.empty()) throw InvalidArgument("no outcomes to sample");
  const double u = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    cumulative += probabilities[i];
    if (u < cumulative) return i;
  }
  // Roundoff left the total just below u: return the last outcome that can
  // actually occur.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) return i;
  }
  return probabilities.size() - 1;
}

DiscreteSampler::DiscreteSampler(std::span<const double> probabilities) {
  if (probabilities.empty()) throw InvalidArgument("no outcomes to sample");
  cumulative_.resize(probabilities.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    total += std::max(probabilities[i], 0.0);
    cumulative_[i] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("probabilities sum to zero");
  for (auto& c : cumulative_) c /= total;
  // The last reachable outcome absorbs any roundoff.
  for (std::size_t i = probabilities.size(); i-- > 0;) {
    if (probabilities[i] > 0.0) {
      for (std::size_t k = i; k < cumulative_.size(); ++k) cumulative_[k] = 1.0;
      break;
    }
  }
}

std::size_t DiscreteSampler::sample(Xoshiro256& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  return static_cast<std::size_t>(it - cumulative_.begin());
}

EmpiricalResult empirical_average(const std::vector<double>& cv,
                                  const MeasurementContext& ctx,
                                  const DensityOperator& rho,
                                  const RunConfig& cfg) {
  if (cv.size() != ctx.size()) {
    throw DimensionMismatch("value vector length differs from outcome count");
  }
  const std::vector<double> probs = outcome_probabilities(ctx, rho);
  const DiscreteSampler sampler(probs);
  EmpiricalResult out;
  out.counts = run_blocks(cfg, ctx.size(), [&] {
    return [&](Xoshiro256& rng) { return sampler.sample(rng); };
  });
  const MeanAndError stats = summarize(cv, out.counts);
  out.estimate = stats.mean;
  out.standard_error = stats.standard_error;
  out.trials = cfg.trials;
  out.accepted = cfg.trials;
  return out;
}

EmpiricalResult empirical_conditioned_average(const ConditionedSetup& setup,
                                              const DensityOperator& rho,
                                              const RunConfig& cfg) {
  const MeasurementContext& first = setup.first();
  const MeasurementContext& second = setup.second();
  const std::size_t n1 = first.size();
  const std::size_t n2 = second.size();
  const DiscreteSampler first_sampler(outcome_probabilities(first, rho));

  // The post-measurement state after outcome j is the same in every trial,
  // so each worker caches the second-measurement sampler per branch.
  auto make_worker = [&] {
    auto cache = std::make_shared<std::vector<std::optional<DiscreteSampler>>>(n1);
    return [&, cache](Xoshiro256& rng) {
      const std::size_t j = first_sampler.sample(rng);
      std::optional<DiscreteSampler>& branch = (*cache)[j];
      if (!branch) {
        const BranchUpdate updated = state_update(first.kraus()[j], rho);
        branch.emplace(outcome_probabilities(second, updated.state));
      }
      return j * n2 + branch->sample(rng);
    };
  };

  EmpiricalResult out;
  out.counts = run_blocks(cfg, n1 * n2, make_worker);
  std::vector<std::uint64_t> kept(n1, 0);
  std::uint64_t accepted = 0;
  for (std::size_t j = 0; j < n1; ++j) {
    kept[j] = out.counts[j * n2 + setup.postselect()];
    accepted += kept[j];
  }
  out.trials = cfg.trials;
  out.accepted = accepted;
  out.postselection_rate =
      static_cast<double>(accepted) / static_cast<double>(cfg.trials);
  if (accepted == 0) {
    throw NoPostselectedTrials("no trial produced the postselected outcome");
  }
  const MeanAndError stats = summarize(setup.cv(), kept);
  out.estimate = stats.mean;
  out.standard_error = stats.standard_error;
  return out;
}

EmpiricalResult empirical_moment(const std::vector<double>& cv,
                                 const MeasurementContext& ctx,
                                 const DensityOperator& rho, int n,
                                 const RunConfig& cfg) {
  if (cv.size() != ctx.size()) {
    throw DimensionMismatch("value vector length differs from outcome count");
  }
  if (n < 1 || n > kMaxMomentOrder) {
    throw InvalidArgument("moment order out of range");
  }
  std::vector<ComplexMatrix> ops = ctx.kraus();
  ops.push_back(assemble_operator(cv, ctx));
  if (max_commutator_norm(ops) >
      kDefaultTolerance * std::max(1.0, operator_norm(ops.back()))) {
    throw NonCommutingContext(
        "moment sampling needs Kraus operators commuting with each other and "
        "with the observable");
  }
  const std::size_t outcomes = ctx.size();
  std::size_t bins = 1;
  for (int k = 0; k < n; ++k) {
    bins *= outcomes;
    if (bins > kMaxSequenceTableSize) {
      throw InvalidArgument("outcome-sequence table too large");
    }
  }

  auto make_worker = [&] {
    auto cache = std::make_shared<std::unordered_map<std::size_t, DiscreteSampler>>();
    return [&, cache](Xoshiro256& rng) {
      // Prefix key 0 is the root; child of key p via outcome j is
      // p * outcomes + j + 1, which is unique over all depths.
      std::size_t key = 0;
      std::size_t index = 0;
      for (int depth = 0; depth < n; ++depth) {
        auto it = cache->find(key);
        if (it == cache->end()) {
          DensityOperator state = rho;
          if (key != 0) {
            // Rebuild the branch state by replaying the prefix.
            std::vector<std::size_t> path;
            for (std::size_t k = key; k != 0; k = (k - 1) / outcomes) {
              path.push_back((k - 1) % outcomes);
            }
            for (auto p = path.rbegin(); p != path.rend(); ++p) {
              state = state_update(ctx.kraus()[*p], state).state;
            }
          }
          it = cache->emplace(key, DiscreteSampler(outcome_probabilities(ctx, state)))
                   .first;
        }
        const std::size_t j = it->second.sample(rng);
        index = index * outcomes + j;
        key = key * outcomes + j + 1;
      }
      return index;
    };
  };

  EmpiricalResult out;
  out.counts = run_blocks(cfg, bins, make_worker);
  std::vector<double> values(bins);
  for (std::size_t index = 0; index < bins; ++index) {
    double product = 1.0;
    std::size_t rest = index;
    for (int k = 0; k < n; ++k) {
      product *= cv[rest % outcomes];
      rest /= outcomes;
    }
    values[index] = product;
  }
  const MeanAndError stats = summarize(values, out.counts);
  out.estimate = stats.mean;
  out.standard_error = stats.standard_error;
  out.trials = cfg.trials;
  out.accepted = cfg.trials;
  return out;
}

}  // namespace cvtool
