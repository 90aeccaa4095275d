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

#ifndef CVTOOL_TESTS_TEST_UTIL_H
#define CVTOOL_TESTS_TEST_UTIL_H

#include <cstddef>
#include <random>
#include <vector>

#include "cvtool/operator_core.h"

namespace cvtool::testing {

using Rng = std::mt19937_64;

ComplexMatrix random_complex(Rng& rng, std::size_t dim);
ComplexMatrix random_hermitian(Rng& rng, std::size_t dim);
ComplexMatrix random_unitary(Rng& rng, std::size_t dim);
ComplexVector random_state_vector(Rng& rng, std::size_t dim);
/// Full-rank mixed state with random spectrum and eigenbasis.
DensityOperator random_density(Rng& rng, std::size_t dim);

/// Kraus operators diagonal in the eigenbasis `basis`: N random PSD
/// diagonals normalized to sum to the identity, dressed with random
/// diagonal phases. All of them commute.
std::vector<ComplexMatrix> random_commuting_kraus(Rng& rng,
                                                  const ComplexMatrix& basis,
                                                  std::size_t outcomes);

/// Random informationally rich POVM (not commuting): N random PSD operators
/// renormalized by S^{-1/2} so they sum to the identity.
std::vector<ComplexMatrix> random_povm(Rng& rng, std::size_t dim,
                                       std::size_t outcomes);

double max_abs(const ComplexMatrix& m);

}  // namespace cvtool::testing

#endif  // CVTOOL_TESTS_TEST_UTIL_H
