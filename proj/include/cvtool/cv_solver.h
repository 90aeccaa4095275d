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

#ifndef CVTOOL_CV_SOLVER_H
#define CVTOOL_CV_SOLVER_H

#include <cstddef>
#include <vector>

#include "cvtool/operator_core.h"

namespace cvtool {

/// Relative cutoff below which singular values are treated as zero.
inline constexpr double kDefaultSvdTolerance = 1e-10;

/// F_kj = Tr[Pi_k E_j] for a context that commutes with the observable. Rows
/// run over the distinct eigenvalues (full eigenspace projectors), columns
/// over the outcomes, so entries may exceed 1 for degenerate eigenvalues.
class ContrastMatrix {
 public:
  const RealMatrix& entries() const { return entries_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }
  double operator()(Eigen::Index k, Eigen::Index j) const {
    return entries_(k, j);
  }

 private:
  friend ContrastMatrix build_contrast_matrix(const Observable&,
                                              const MeasurementContext&,
                                              double);
  RealMatrix entries_;
};

/// Throws NonCommutingContext if the observable and the POVM elements do not
/// pairwise commute to `tol` (Frobenius norm, scaled by the observable norm).
ContrastMatrix build_contrast_matrix(const Observable& obs,
                                     const MeasurementContext& ctx,
                                     double tol = kDefaultTolerance);

/// F = U S V^T with a deterministic sign convention: every right singular
/// vector has its largest-magnitude entry positive, and the matching left
/// singular vector is flipped with it.
/// With `full` unset only the thin factors are formed.
struct SingularValueDecomposition {
  RealMatrix u;
  RealMatrix v;
  RealVector singular_values;
  Eigen::Index rank = 0;
  /// Absolute threshold actually applied: svd_tol times the largest
  /// singular value.
  double cutoff = 0.0;
};

SingularValueDecomposition truncated_svd(const RealMatrix& f,
                                         double svd_tol = kDefaultSvdTolerance,
                                         bool full = true);

/// Moore-Penrose pseudoinverse V S^+ U^T, inverting only the singular values
/// above svd_tol relative to the largest.
RealMatrix pseudoinverse(const RealMatrix& f,
                         double svd_tol = kDefaultSvdTolerance);

/// Orthonormal basis of {x : F x = 0}.
std::vector<RealVector> null_space(const RealMatrix& f,
                                   double svd_tol = kDefaultSvdTolerance);

/// Orthonormal Hermitian basis of the d x d Hermitian matrices under the
/// Hilbert-Schmidt inner product: identity / sqrt(d) followed by the
/// generalized Gell-Mann matrices scaled to unit norm.
std::vector<ComplexMatrix> hermitian_operator_basis(std::size_t dim);

enum class SolveMode {
  kCommutingContrast,
  kGeneralOperatorSpace,
};

const char* to_string(SolveMode mode);

struct SolverOptions {
  double svd_tol = kDefaultSvdTolerance;
  /// Commutation tolerance for choosing the contrast-matrix route.
  double commute_tol = kDefaultTolerance;
  /// A solution is exact when its residual is at most
  /// residual_tol * max(1, ||A||).
  double residual_tol = 1e-9;
  /// Raise NotReconstructable instead of returning an inexact solution.
  bool strict = false;
  /// Large detector contexts have null spaces with thousands of vectors;
  /// callers that only need alpha0 can skip materializing them.
  bool compute_null_basis = true;
  /// When false the general operator-space route is always used.
  bool allow_contrast_route = true;
};

struct ContextualValueSolution {
  /// Minimum-norm contextual values, one per outcome.
  RealVector alpha0;
  /// Orthonormal basis of the value vectors that leave sum_j alpha_j E_j
  /// unchanged. Empty when not requested.
  std::vector<RealVector> null_basis;
  std::size_t null_dimension = 0;
  /// ||sum_j alpha0_j E_j - A|| in operator norm.
  double residual = 0.0;
  RealVector singular_values;
  double truncation_tol = 0.0;
  SolveMode mode = SolveMode::kCommutingContrast;
  bool exact = false;
};

/// Least-redundant contextual values of `obs` under `ctx`: the
/// minimum-norm solution of A = sum_j alpha_j E_j.
///
/// When the observable and the POVM commute and each E_j is constant on the
/// eigenspaces of A, the equation is solved through the contrast matrix.
/// Otherwise it is expanded over a Hermitian operator basis and solved by
/// the same pseudoinverse rule.
ContextualValueSolution solve_contextual_values(
    const Observable& obs, const MeasurementContext& ctx,
    const SolverOptions& options = {});

/// Throws NotReconstructable when the solution is inexact.
void require_exact(const ContextualValueSolution& solution);

/// sum_j alpha_j E_j.
ComplexMatrix assemble_operator(const std::vector<double>& alpha,
                                const MeasurementContext& ctx);

std::vector<double> to_std_vector(const RealVector& v);

}  // namespace cvtool

#endif  // CVTOOL_CV_SOLVER_H
