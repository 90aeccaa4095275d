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

#ifndef CVTOOL_OPERATOR_CORE_H
#define CVTOOL_OPERATOR_CORE_H

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cvtool/errors.h"

namespace cvtool {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

/// Absolute floor applied to every tolerance that is otherwise relative to an
/// operator norm.
inline constexpr double kDefaultTolerance = 1e-10;

/// Relative tolerance used to merge numerically split eigenvalues.
inline constexpr double kDegeneracyTolerance = 1e-8;

/// Largest singular value.
double operator_norm(const ComplexMatrix& m);

bool is_hermitian(const ComplexMatrix& m, double tol);

/// (m + m^dagger) / 2.
ComplexMatrix hermitian_part(const ComplexMatrix& m);

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues in (-tol, 0) are clamped to zero.
ComplexMatrix psd_sqrt(const ComplexMatrix& m);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const ComplexMatrix& m);

namespace pauli {
ComplexMatrix identity(std::size_t dim = 2);
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

/// A Hermitian operator together with its spectral decomposition into
/// distinct eigenvalues and eigenspace projectors. Eigenvalues are stored in
/// strictly decreasing order.
class Observable {
 public:
  const ComplexMatrix& matrix() const { return matrix_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const std::vector<ComplexMatrix>& projectors() const { return projectors_; }
  /// Rank of each projector.
  const std::vector<std::size_t>& multiplicities() const {
    return multiplicities_;
  }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  std::size_t num_eigenvalues() const { return eigenvalues_.size(); }

  /// Sum_k a_k Pi_k.
  ComplexMatrix reconstruct() const;

 private:
  friend Observable spectral_decompose(const ComplexMatrix&,
                                       std::optional<double>);
  Observable() = default;

  ComplexMatrix matrix_;
  std::vector<double> eigenvalues_;
  std::vector<ComplexMatrix> projectors_;
  std::vector<std::size_t> multiplicities_;
};

/// Diagonalizes a Hermitian matrix, grouping eigenvalues whose gap is at most
/// `group_tol` into a single degenerate eigenspace. The default grouping
/// tolerance is 1e-8 times the operator norm.
///
/// Throws NotHermitian when `m` is not Hermitian to 1e-10 relative accuracy.
Observable spectral_decompose(const ComplexMatrix& m,
                              std::optional<double> group_tol = std::nullopt);

struct BranchUpdate;

/// A validated density operator: Hermitian, positive semidefinite and of unit
/// trace. The stored matrix is exactly Hermitian.
class DensityOperator {
 public:
  /// Validates `m` against the absolute tolerance `tol`.
  static DensityOperator from_matrix(const ComplexMatrix& m,
                                     double tol = kDefaultTolerance);
  /// |psi><psi| for a normalized copy of `psi`.
  static DensityOperator pure(const ComplexVector& psi);
  /// identity / dim.
  static DensityOperator maximally_mixed(std::size_t dim);

  const ComplexMatrix& matrix() const { return matrix_; }
  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }

 private:
  explicit DensityOperator(ComplexMatrix m) : matrix_(std::move(m)) {}
  friend BranchUpdate state_update(const ComplexMatrix&,
                                   const DensityOperator&, double);

  ComplexMatrix matrix_;
};

/// An N-outcome measurement: Kraus operators M_j and their POVM elements
/// E_j = M_j^dagger M_j, which sum to the identity.
class MeasurementContext {
 public:
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }
  const std::vector<ComplexMatrix>& povm() const { return povm_; }
  std::size_t size() const { return kraus_.size(); }
  std::size_t dim() const {
    return kraus_.empty() ? 0 : static_cast<std::size_t>(kraus_[0].rows());
  }

 private:
  friend MeasurementContext context_from_kraus(std::vector<ComplexMatrix>,
                                               double);
  MeasurementContext() = default;

  std::vector<ComplexMatrix> kraus_;
  std::vector<ComplexMatrix> povm_;
};

/// Builds a context from Kraus operators and checks sum_j E_j = 1 to `tol`
/// in operator norm. Throws IncompleteContext or DimensionMismatch.
MeasurementContext context_from_kraus(std::vector<ComplexMatrix> kraus,
                                      double tol = kDefaultTolerance);

/// Builds a context from POVM elements using the PSD square roots E_j^{1/2}
/// as Kraus operators.
MeasurementContext context_from_povm(const std::vector<ComplexMatrix>& povm,
                                     double tol = kDefaultTolerance);

/// Multiplies every Kraus operator on the right by S^{-1/2}, S = sum_j E_j,
/// so the result is exactly complete. Returns the context together with the
/// operator-norm completeness defect measured before the correction.
struct RenormalizedContext {
  MeasurementContext context;
  double defect;
};
RenormalizedContext renormalized_context(std::vector<ComplexMatrix> kraus);

/// P_j = Tr[E_j rho], clamped to [0, 1].
std::vector<double> outcome_probabilities(const MeasurementContext& ctx,
                                          const DensityOperator& rho);

struct BranchUpdate {
  DensityOperator state;
  double probability;
};

/// rho -> M rho M^dagger / p with p = Tr[M rho M^dagger]. Throws
/// ZeroProbabilityBranch when p <= tol.
BranchUpdate state_update(const ComplexMatrix& m, const DensityOperator& rho,
                          double tol = 1e-12);

/// M = U P with P = (M^dagger M)^{1/2}. On the kernel of P the unitary is
/// completed with identity columns orthonormalized against the range.
struct PolarDecomposition {
  ComplexMatrix unitary;
  ComplexMatrix positive;
};
PolarDecomposition polar_decompose(const ComplexMatrix& m);

/// True when every polar unitary U_j of the context leaves rho invariant,
/// ||U_j rho U_j^dagger - rho|| <= tol.
bool minimal_disturbance_check(const MeasurementContext& ctx,
                               const DensityOperator& rho,
                               double tol = kDefaultTolerance);

/// Largest Frobenius-norm commutator among all pairs of the given operators.
/// The Frobenius norm bounds the operator norm from above.
double max_commutator_norm(const std::vector<ComplexMatrix>& ops);

}  // namespace cvtool

#endif  // CVTOOL_OPERATOR_CORE_H
