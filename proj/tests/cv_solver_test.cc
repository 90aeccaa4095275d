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

#include "cvtool/cv_solver.h"

#include <cmath>
#include <numbers>

#include "cvtool/scenarios.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace cvtool {
namespace {

using testing::max_abs;

MeasurementContext povm_context(double g) {
  return context_from_povm({0.5 * (pauli::identity() + g * pauli::z()),
                            0.5 * (pauli::identity() - g * pauli::z())});
}

MeasurementContext z_projective() {
  return context_from_kraus(spectral_decompose(pauli::z()).projectors());
}

std::vector<ComplexMatrix> trine_povm() {
  std::vector<ComplexMatrix> povm;
  for (int j = 0; j < 3; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / 3.0;
    povm.push_back((pauli::identity() + std::cos(theta) * pauli::z() +
                    std::sin(theta) * pauli::x()) /
                   3.0);
  }
  return povm;
}

// Independent oracle: minimum-norm least squares over the raw real and
// imaginary parts of the matrix entries, solved by complete orthogonal
// decomposition rather than SVD.
RealVector least_squares_oracle(const std::vector<ComplexMatrix>& povm,
                                const ComplexMatrix& target) {
  const Eigen::Index d = target.rows();
  RealMatrix system(2 * d * d, static_cast<Eigen::Index>(povm.size()));
  RealVector rhs(2 * d * d);
  for (Eigen::Index e = 0; e < d * d; ++e) {
    for (std::size_t j = 0; j < povm.size(); ++j) {
      system(2 * e, static_cast<Eigen::Index>(j)) = povm[j].data()[e].real();
      system(2 * e + 1, static_cast<Eigen::Index>(j)) = povm[j].data()[e].imag();
    }
    rhs(2 * e) = target.data()[e].real();
    rhs(2 * e + 1) = target.data()[e].imag();
  }
  return system.completeOrthogonalDecomposition().solve(rhs);
}

void expect_penrose(const RealMatrix& f, const RealMatrix& fp, double tol) {
  EXPECT_LT((f * fp * f - f).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT((fp * f * fp - fp).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT(((f * fp).transpose() - f * fp).cwiseAbs().maxCoeff(), tol);
  EXPECT_LT(((fp * f).transpose() - fp * f).cwiseAbs().maxCoeff(), tol);
}

TEST(BuildContrastMatrix, ProjectiveIsIdentity) {
  const ContrastMatrix f =
      build_contrast_matrix(spectral_decompose(pauli::z()), z_projective());
  EXPECT_LT((f.entries() - RealMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildContrastMatrix, PolarizationPovm) {
  for (const double g : {0.0, 0.3, 0.5, 1.0}) {
    const ContrastMatrix f =
        build_contrast_matrix(spectral_decompose(pauli::z()), povm_context(g));
    // Direct trace oracle: Tr[Pi_H E_+] is the (0, 0) entry of E_+.
    EXPECT_NEAR(f(0, 0), (1 + g) / 2, 1e-15);
    EXPECT_NEAR(f(0, 1), (1 - g) / 2, 1e-15);
    EXPECT_NEAR(f(1, 0), (1 - g) / 2, 1e-15);
    EXPECT_NEAR(f(1, 1), (1 + g) / 2, 1e-15);
  }
}

TEST(BuildContrastMatrix, DegenerateEntriesCountMultiplicity) {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a.diagonal() << 1.0, 1.0, -1.0;
  const MeasurementContext ctx = context_from_kraus(
      spectral_decompose(a).projectors());
  const ContrastMatrix f = build_contrast_matrix(spectral_decompose(a), ctx);
  EXPECT_NEAR(f(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(f(1, 1), 1.0, 1e-15);
  // Column sums equal Tr[E_j].
  EXPECT_NEAR(f.entries().col(0).sum(), ctx.povm()[0].trace().real(), 1e-15);
}

TEST(BuildContrastMatrix, RejectsNonCommuting) {
  EXPECT_THROW(build_contrast_matrix(spectral_decompose(pauli::z()),
                                     context_from_povm(trine_povm())),
               NonCommutingContext);
}

TEST(Pseudoinverse, Identity) {
  const RealMatrix id = RealMatrix::Identity(2, 2);
  EXPECT_LT((pseudoinverse(id) - id).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Pseudoinverse, RankOneAveragingMatrix) {
  RealMatrix f(2, 2);
  f << 0.5, 0.5, 0.5, 0.5;
  const RealMatrix fp = pseudoinverse(f);
  // Rank-one oracle: F = s u v^T, F^+ = F^T / s^2 with s = 1 here, which
  // the four identities confirm (F is idempotent and symmetric).
  const double s = f.norm();
  EXPECT_NEAR(s, 1.0, 1e-15);
  EXPECT_LT((fp - f.transpose() / (s * s)).cwiseAbs().maxCoeff(), 1e-12);
  expect_penrose(f, fp, 1e-9);
}

TEST(Pseudoinverse, TrineContrast) {
  // Tr[Pi_k E_j] for the trine POVM: the diagonal parts only.
  RealMatrix f(2, 3);
  f << 2.0 / 3, 1.0 / 6, 1.0 / 6, 0.0, 0.5, 0.5;
  const RealMatrix fp = pseudoinverse(f);
  ASSERT_EQ(fp.rows(), 3);
  ASSERT_EQ(fp.cols(), 2);
  expect_penrose(f, fp, 1e-9);
  RealVector a(2);
  a << 1.0, -1.0;
  const RealVector alpha = fp * a;
  EXPECT_NEAR(alpha(0), 2.0, 1e-12);
  EXPECT_NEAR(alpha(1), -1.0, 1e-12);
  EXPECT_NEAR(alpha(2), -1.0, 1e-12);
}

TEST(Pseudoinverse, RandomPenroseProperty) {
  testing::Rng rng(17);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index rows = 1 + trial % 4;
    const Eigen::Index cols = 1 + (trial / 4) % 5;
    const Eigen::Index rank = std::min<Eigen::Index>(1 + trial % 3, std::min(rows, cols));
    RealMatrix left(rows, rank);
    RealMatrix right(rank, cols);
    for (Eigen::Index i = 0; i < left.size(); ++i) left.data()[i] = normal(rng);
    for (Eigen::Index i = 0; i < right.size(); ++i) right.data()[i] = normal(rng);
    const RealMatrix f = left * right;
    expect_penrose(f, pseudoinverse(f), 1e-9);
  }
}

TEST(NullSpace, Examples) {
  EXPECT_TRUE(null_space(RealMatrix::Identity(2, 2)).empty());

  RealMatrix avg(2, 2);
  avg << 0.5, 0.5, 0.5, 0.5;
  const std::vector<RealVector> basis = null_space(avg);
  ASSERT_EQ(basis.size(), 1u);
  EXPECT_LT((avg * basis[0]).norm(), 1e-14);
  EXPECT_NEAR(basis[0](0), 1.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(basis[0](1), -1.0 / std::sqrt(2.0), 1e-14);

  RealMatrix trine(2, 3);
  trine << 2.0 / 3, 1.0 / 6, 1.0 / 6, 0.0, 0.5, 0.5;
  const std::vector<RealVector> tb = null_space(trine);
  ASSERT_EQ(tb.size(), 1u);
  RealVector alpha0(3);
  alpha0 << 2.0, -1.0, -1.0;
  EXPECT_LT((trine * tb[0]).norm(), 1e-14);
  EXPECT_NEAR(tb[0].dot(alpha0), 0.0, 1e-14);
  EXPECT_NEAR(tb[0].norm(), 1.0, 1e-14);
}

TEST(HermitianBasis, OrthonormalUnderTraceInnerProduct) {
  for (const std::size_t d : {2u, 3u, 4u}) {
    const std::vector<ComplexMatrix> basis = hermitian_operator_basis(d);
    ASSERT_EQ(basis.size(), d * d);
    for (std::size_t a = 0; a < basis.size(); ++a) {
      ASSERT_TRUE(is_hermitian(basis[a], 1e-15));
      for (std::size_t b = 0; b < basis.size(); ++b) {
        const double ip = (basis[a] * basis[b]).trace().real();
        ASSERT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-14);
      }
    }
  }
}

TEST(SolveContextualValues, PolarizationValuesAreInverseStrength) {
  for (const double g : {0.1, 0.25, 0.5, 0.9, 1.0}) {
    const ContextualValueSolution s =
        solve_contextual_values(spectral_decompose(pauli::z()), povm_context(g));
    EXPECT_EQ(s.mode, SolveMode::kCommutingContrast);
    EXPECT_TRUE(s.exact);
    EXPECT_TRUE(s.null_basis.empty());
    EXPECT_NEAR(s.alpha0(0), 1.0 / g, 1e-10);
    EXPECT_NEAR(s.alpha0(1), -1.0 / g, 1e-10);
    EXPECT_LT(s.residual, 1e-12);
  }
}

TEST(SolveContextualValues, ProjectiveReturnsEigenvalues) {
  const ContextualValueSolution s =
      solve_contextual_values(spectral_decompose(pauli::z()), z_projective());
  EXPECT_NEAR(s.alpha0(0), 1.0, 1e-14);
  EXPECT_NEAR(s.alpha0(1), -1.0, 1e-14);
}

TEST(SolveContextualValues, TrineMatchesLeastSquaresOracle) {
  const std::vector<ComplexMatrix> povm = trine_povm();
  const RealVector oracle = least_squares_oracle(povm, pauli::z());
  // Frozen from the oracle above.
  ASSERT_NEAR(oracle(0), 2.0, 1e-12);
  ASSERT_NEAR(oracle(1), -1.0, 1e-12);
  ASSERT_NEAR(oracle(2), -1.0, 1e-12);

  const ContextualValueSolution s = solve_contextual_values(
      spectral_decompose(pauli::z()), context_from_povm(povm));
  EXPECT_EQ(s.mode, SolveMode::kGeneralOperatorSpace);
  EXPECT_TRUE(s.exact);
  EXPECT_LT((s.alpha0 - oracle).norm(), 1e-12);
  // Identity, x and z components give three independent equations for three
  // unknowns, so the operator-space solution is unique.
  EXPECT_EQ(s.null_dimension, 0u);
  EXPECT_TRUE(s.null_basis.empty());
}

TEST(SolveContextualValues, InformationlessPovmIsNotReconstructable) {
  const ContextualValueSolution s =
      solve_contextual_values(spectral_decompose(pauli::z()), povm_context(0.0));
  EXPECT_FALSE(s.exact);
  EXPECT_GT(s.residual, 0.5);
  EXPECT_EQ(s.null_dimension, 1u);
  SolverOptions strict;
  strict.strict = true;
  EXPECT_THROW(
      solve_contextual_values(spectral_decompose(pauli::z()), povm_context(0.0), strict),
      NotReconstructable);
  EXPECT_THROW(require_exact(s), NotReconstructable);
}

TEST(SolveContextualValues, DegenerateObservableUsesMultiplicityWeights) {
  ComplexMatrix a = ComplexMatrix::Zero(3, 3);
  a.diagonal() << 2.0, 2.0, -1.0;
  std::vector<ComplexMatrix> povm;
  ComplexMatrix e1 = ComplexMatrix::Zero(3, 3);
  e1.diagonal() << 0.8, 0.8, 0.1;
  povm.push_back(e1);
  povm.push_back(pauli::identity(3) - e1);
  const ContextualValueSolution s =
      solve_contextual_values(spectral_decompose(a), context_from_povm(povm));
  EXPECT_EQ(s.mode, SolveMode::kCommutingContrast);
  EXPECT_TRUE(s.exact);
  EXPECT_LT(max_abs(assemble_operator(to_std_vector(s.alpha0),
                                      context_from_povm(povm)) - a), 1e-12);
}

TEST(SolveContextualValues, CommutingButNotBlockScalarFallsBack) {
  // E_j commute with A = identity but vary inside its single eigenspace.
  ComplexMatrix e1 = ComplexMatrix::Zero(2, 2);
  e1.diagonal() << 1.0, 0.5;
  const MeasurementContext ctx = context_from_povm({e1, pauli::identity() - e1});
  const ContextualValueSolution s =
      solve_contextual_values(spectral_decompose(pauli::identity()), ctx);
  EXPECT_EQ(s.mode, SolveMode::kGeneralOperatorSpace);
  EXPECT_TRUE(s.exact);
  EXPECT_NEAR(s.alpha0(0), 1.0, 1e-12);
  EXPECT_NEAR(s.alpha0(1), 1.0, 1e-12);
}

TEST(SolveContextualValues, ExactReconstructionProperty) {
  testing::Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 3);
    const ComplexMatrix h = testing::random_hermitian(rng, d);
    const Observable obs = spectral_decompose(h);
    MeasurementContext ctx =
        trial % 2 == 0
            ? context_from_kraus(testing::random_commuting_kraus(
                  rng, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h).eigenvectors(),
                  d + static_cast<std::size_t>(trial % 3)))
            : context_from_povm(testing::random_povm(rng, d, d * d + 1));
    const ContextualValueSolution s = solve_contextual_values(obs, ctx);
    ASSERT_TRUE(s.exact) << "trial " << trial << " residual " << s.residual;
    ASSERT_LE(operator_norm(assemble_operator(to_std_vector(s.alpha0), ctx) - h),
              1e-9 * operator_norm(h));
  }
}

TEST(SolveContextualValues, MinimumNormProperty) {
  testing::Rng rng(41);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 2);
    const ComplexMatrix h = testing::random_hermitian(rng, d);
    const MeasurementContext ctx =
        trial % 2 == 0
            ? context_from_kraus(testing::random_commuting_kraus(
                  rng, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h).eigenvectors(),
                  d + 3))
            : context_from_povm(testing::random_povm(rng, d, d * d + 3));
    const ContextualValueSolution s = solve_contextual_values(spectral_decompose(h), ctx);
    ASSERT_TRUE(s.exact);
    ASSERT_FALSE(s.null_basis.empty());
    for (std::size_t a = 0; a < s.null_basis.size(); ++a) {
      ASSERT_LE(std::abs(s.alpha0.dot(s.null_basis[a])), 1e-9);
      for (std::size_t b = 0; b < s.null_basis.size(); ++b) {
        ASSERT_NEAR(s.null_basis[a].dot(s.null_basis[b]), a == b ? 1.0 : 0.0, 1e-12);
      }
      // Null vectors do not change the reconstructed operator.
      ASSERT_LT(max_abs(assemble_operator(to_std_vector(s.null_basis[a]), ctx)), 1e-10);
    }
    for (int k = 0; k < 100; ++k) {
      const RealVector& x = s.null_basis[static_cast<std::size_t>(k) % s.null_basis.size()];
      const RealVector perturbed = s.alpha0 + normal(rng) * x;
      ASSERT_GE(perturbed.norm(), s.alpha0.norm() - 1e-12);
    }
  }
}

TEST(SolveContextualValues, ProjectiveLimitProperty) {
  testing::Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 4);
    const Observable obs = spectral_decompose(testing::random_hermitian(rng, d));
    const ContextualValueSolution s =
        solve_contextual_values(obs, context_from_kraus(obs.projectors()));
    for (std::size_t k = 0; k < obs.num_eigenvalues(); ++k) {
      ASSERT_NEAR(s.alpha0(static_cast<Eigen::Index>(k)), obs.eigenvalues()[k], 1e-10);
    }
  }
}

TEST(SolveContextualValues, ModeConsistencyProperty) {
  testing::Rng rng(47);
  SolverOptions general;
  general.allow_contrast_route = false;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 3);
    const ComplexMatrix h = testing::random_hermitian(rng, d);
    const MeasurementContext ctx = context_from_kraus(testing::random_commuting_kraus(
        rng, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h).eigenvectors(),
        d + static_cast<std::size_t>(trial % 4)));
    const Observable obs = spectral_decompose(h);
    const ContextualValueSolution f = solve_contextual_values(obs, ctx);
    const ContextualValueSolution g = solve_contextual_values(obs, ctx, general);
    ASSERT_EQ(f.mode, SolveMode::kCommutingContrast);
    ASSERT_EQ(g.mode, SolveMode::kGeneralOperatorSpace);
    ASSERT_LT((f.alpha0 - g.alpha0).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_EQ(f.null_dimension, g.null_dimension);
  }
}

TEST(SolveContextualValues, TooFewOutcomesProperty) {
  testing::Rng rng(53);
  SolverOptions strict;
  strict.strict = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 3 + static_cast<std::size_t>(trial % 3);
    const ComplexMatrix h = testing::random_hermitian(rng, d);
    const std::size_t outcomes = 1 + static_cast<std::size_t>(trial) % (d - 1);
    const MeasurementContext ctx = context_from_kraus(testing::random_commuting_kraus(
        rng, Eigen::SelfAdjointEigenSolver<ComplexMatrix>(h).eigenvectors(), outcomes));
    ASSERT_THROW(solve_contextual_values(spectral_decompose(h), ctx, strict),
                 NotReconstructable);
  }
}

TEST(SolveContextualValues, NullBasisCanBeSkipped) {
  const MeasurementContext ctx =
      detector_context(make_detector(PointerDistribution::gaussian(0.3), 0.1)).context;
  SolverOptions options;
  options.compute_null_basis = false;
  const ContextualValueSolution s =
      solve_contextual_values(spectral_decompose(pauli::z()), ctx, options);
  EXPECT_TRUE(s.exact);
  EXPECT_TRUE(s.null_basis.empty());
  EXPECT_EQ(s.null_dimension, ctx.size() - 2);
}

TEST(SolveContextualValues, DimensionMismatch) {
  EXPECT_THROW(solve_contextual_values(spectral_decompose(pauli::identity(3)),
                                       z_projective()),
               DimensionMismatch);
}

}  // namespace
}  // namespace cvtool
