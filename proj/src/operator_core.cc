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

#include "cvtool/operator_core.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace cvtool {
namespace {

void require_square(const ComplexMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(what) + ": matrix is not square");
  }
}

bool all_finite(const ComplexMatrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace

double operator_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  const ComplexMatrix diff = m - m.adjoint();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < diff.size(); ++i) {
    worst = std::max(worst, std::abs(diff.data()[i]));
  }
  return worst <= tol;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  return 0.5 * (m + m.adjoint());
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b - b * a;
}

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) {
  return a * b + b * a;
}

ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  require_square(m, "psd_sqrt");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(m));
  RealVector roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.cast<Complex>().asDiagonal() *
         eig.eigenvectors().adjoint();
}

double min_eigenvalue(const ComplexMatrix& m) {
  require_square(m, "min_eigenvalue");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(m),
                                                   Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

namespace pauli {

ComplexMatrix identity(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  return ComplexMatrix::Identity(d, d);
}

ComplexMatrix x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix y() {
  const Complex i(0.0, 1.0);
  ComplexMatrix m(2, 2);
  m << 0.0, -i, i, 0.0;
  return m;
}

ComplexMatrix z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

}  // namespace pauli

ComplexMatrix Observable::reconstruct() const {
  ComplexMatrix sum = ComplexMatrix::Zero(matrix_.rows(), matrix_.cols());
  for (std::size_t k = 0; k < eigenvalues_.size(); ++k) {
    sum += eigenvalues_[k] * projectors_[k];
  }
  return sum;
}

Observable spectral_decompose(const ComplexMatrix& m,
                              std::optional<double> group_tol) {
  require_square(m, "spectral_decompose");
  if (!all_finite(m)) throw InvalidArgument("observable has non-finite entries");
  const double norm = operator_norm(m);
  if (!is_hermitian(m, kDefaultTolerance * std::max(1.0, norm))) {
    throw NotHermitian("observable matrix is not Hermitian");
  }
  const double tol =
      group_tol.value_or(std::max(kDegeneracyTolerance * norm, kDefaultTolerance));

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(m));
  const RealVector& values = eig.eigenvalues();
  const ComplexMatrix& vectors = eig.eigenvectors();
  const Eigen::Index n = values.size();

  Observable obs;
  obs.matrix_ = hermitian_part(m);
  // Walk from the largest eigenvalue down, opening a new group whenever the
  // gap to the previous eigenvalue exceeds the grouping tolerance.
  Eigen::Index i = n - 1;
  while (i >= 0) {
    Eigen::Index j = i;
    while (j - 1 >= 0 && values(j) - values(j - 1) <= tol) --j;
    const Eigen::Index count = i - j + 1;
    const ComplexMatrix block = vectors.middleCols(j, count);
    obs.eigenvalues_.push_back(values.segment(j, count).mean());
    obs.projectors_.push_back(block * block.adjoint());
    obs.multiplicities_.push_back(static_cast<std::size_t>(count));
    i = j - 1;
  }
  return obs;
}

DensityOperator DensityOperator::from_matrix(const ComplexMatrix& m,
                                             double tol) {
  require_square(m, "density operator");
  if (m.rows() == 0) throw InvalidDensityOperator("empty density matrix");
  if (!all_finite(m)) {
    throw InvalidDensityOperator("density matrix has non-finite entries");
  }
  if (!is_hermitian(m, tol)) {
    throw InvalidDensityOperator("density matrix is not Hermitian");
  }
  const ComplexMatrix h = hermitian_part(m);
  if (std::abs(h.trace().real() - 1.0) > tol) {
    throw InvalidDensityOperator("density matrix trace is not 1");
  }
  if (min_eigenvalue(h) < -tol) {
    throw InvalidDensityOperator("density matrix is not positive semidefinite");
  }
  return DensityOperator(h);
}

DensityOperator DensityOperator::pure(const ComplexVector& psi) {
  const double norm = psi.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidDensityOperator("state vector has zero or non-finite norm");
  }
  const ComplexVector v = psi / norm;
  return DensityOperator(hermitian_part(v * v.adjoint()));
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  if (dim == 0) throw InvalidDensityOperator("dimension must be positive");
  return DensityOperator(pauli::identity(dim) / static_cast<double>(dim));
}

MeasurementContext context_from_kraus(std::vector<ComplexMatrix> kraus,
                                      double tol) {
  if (kraus.empty()) throw InvalidArgument("context needs at least one outcome");
  const Eigen::Index d = kraus.front().rows();
  for (const auto& m : kraus) {
    require_square(m, "Kraus operator");
    if (m.rows() != d) {
      throw DimensionMismatch("Kraus operators have different dimensions");
    }
    if (!all_finite(m)) throw InvalidArgument("Kraus operator has non-finite entries");
  }
  MeasurementContext ctx;
  ctx.povm_.reserve(kraus.size());
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (const auto& m : kraus) {
    ctx.povm_.push_back(hermitian_part(m.adjoint() * m));
    total += ctx.povm_.back();
  }
  const double defect = operator_norm(total - ComplexMatrix::Identity(d, d));
  if (defect > tol) {
    throw IncompleteContext(
        "POVM elements do not sum to the identity (defect " +
            std::to_string(defect) + ")",
        defect);
  }
  ctx.kraus_ = std::move(kraus);
  return ctx;
}

MeasurementContext context_from_povm(const std::vector<ComplexMatrix>& povm,
                                     double tol) {
  std::vector<ComplexMatrix> kraus;
  kraus.reserve(povm.size());
  for (const auto& e : povm) {
    require_square(e, "POVM element");
    if (!is_hermitian(e, tol)) throw NotHermitian("POVM element is not Hermitian");
    if (min_eigenvalue(e) < -tol) {
      throw InvalidArgument("POVM element is not positive semidefinite");
    }
    kraus.push_back(psd_sqrt(e));
  }
  return context_from_kraus(std::move(kraus), tol);
}

RenormalizedContext renormalized_context(std::vector<ComplexMatrix> kraus) {
  if (kraus.empty()) throw InvalidArgument("context needs at least one outcome");
  const Eigen::Index d = kraus.front().rows();
  ComplexMatrix total = ComplexMatrix::Zero(d, d);
  for (const auto& m : kraus) {
    require_square(m, "Kraus operator");
    if (m.rows() != d) {
      throw DimensionMismatch("Kraus operators have different dimensions");
    }
    total += m.adjoint() * m;
  }
  const double defect = operator_norm(total - ComplexMatrix::Identity(d, d));
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(hermitian_part(total));
  if (eig.eigenvalues()(0) <= 0.0) {
    throw IncompleteContext("POVM sum is singular; cannot renormalize", defect);
  }
  const ComplexMatrix inv_sqrt =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() *
      eig.eigenvectors().adjoint();
  for (auto& m : kraus) m = m * inv_sqrt;
  // 1e-9 leaves room for roundoff accumulated over many outcomes.
  return {context_from_kraus(std::move(kraus), 1e-9), defect};
}

std::vector<double> outcome_probabilities(const MeasurementContext& ctx,
                                          const DensityOperator& rho) {
  if (ctx.dim() != rho.dim()) {
    throw DimensionMismatch("context and state dimensions differ");
  }
  std::vector<double> probs;
  probs.reserve(ctx.size());
  for (const auto& e : ctx.povm()) {
    const double p = (e * rho.matrix()).trace().real();
    probs.push_back(std::clamp(p, 0.0, 1.0));
  }
  return probs;
}

BranchUpdate state_update(const ComplexMatrix& m, const DensityOperator& rho,
                          double tol) {
  if (m.rows() != m.cols() ||
      static_cast<std::size_t>(m.rows()) != rho.dim()) {
    throw DimensionMismatch("Kraus operator and state dimensions differ");
  }
  const ComplexMatrix out = m * rho.matrix() * m.adjoint();
  const double p = out.trace().real();
  if (!(p > tol)) {
    throw ZeroProbabilityBranch("measurement branch has probability " +
                                std::to_string(p));
  }
  return {DensityOperator(hermitian_part(out / p)), std::min(p, 1.0)};
}

PolarDecomposition polar_decompose(const ComplexMatrix& m) {
  require_square(m, "polar_decompose");
  const Eigen::Index d = m.rows();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(
      hermitian_part(m.adjoint() * m));
  const RealVector s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix& v = eig.eigenvectors();

  PolarDecomposition out;
  out.positive = v * s.cast<Complex>().asDiagonal() * v.adjoint();

  const double cutoff = std::max(s.maxCoeff(), 1.0) * 1e-12 * static_cast<double>(d);
  ComplexMatrix left = ComplexMatrix::Zero(d, d);
  std::vector<Eigen::Index> kernel;
  std::vector<ComplexVector> taken;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (s(i) > cutoff) {
      left.col(i) = m * v.col(i) / s(i);
      taken.push_back(left.col(i));
    } else {
      kernel.push_back(i);
    }
  }

  // Map each kernel direction of P into the orthogonal complement of the
  // range of M. Candidates are the kernel vectors themselves (so a positive
  // semidefinite M gets U = 1), then the identity columns.
  auto orthonormalize = [&](ComplexVector c) -> std::optional<ComplexVector> {
    for (const auto& t : taken) c -= t.dot(c) * t;
    for (const auto& t : taken) c -= t.dot(c) * t;
    const double n = c.norm();
    if (n < 1e-6) return std::nullopt;
    return ComplexVector(c / n);
  };
  for (const Eigen::Index k : kernel) {
    std::optional<ComplexVector> u = orthonormalize(v.col(k));
    for (Eigen::Index e = 0; !u && e < d; ++e) {
      u = orthonormalize(ComplexVector::Unit(d, e));
    }
    left.col(k) = *u;
    taken.push_back(*u);
  }
  out.unitary = left * v.adjoint();
  return out;
}

bool minimal_disturbance_check(const MeasurementContext& ctx,
                               const DensityOperator& rho, double tol) {
  if (ctx.dim() != rho.dim()) {
    throw DimensionMismatch("context and state dimensions differ");
  }
  for (const auto& m : ctx.kraus()) {
    const ComplexMatrix u = polar_decompose(m).unitary;
    const ComplexMatrix moved = u * rho.matrix() * u.adjoint();
    if (operator_norm(moved - rho.matrix()) > tol) return false;
  }
  return true;
}

double max_commutator_norm(const std::vector<ComplexMatrix>& ops) {
  double worst = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      worst = std::max(worst, commutator(ops[i], ops[j]).norm());
    }
  }
  return worst;
}

}  // namespace cvtool
