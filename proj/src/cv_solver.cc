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

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace cvtool {
namespace {

void fix_sign(RealMatrix& v, RealMatrix& u, Eigen::Index col, bool has_left) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    // Ties go to the first index; the slack absorbs roundoff between
    // entries that are equal in exact arithmetic.
    if (std::abs(v(i, col)) > best_abs + 1e-12) {
      best_abs = std::abs(v(i, col));
      best = i;
    }
  }
  if (v(best, col) < 0.0) {
    v.col(col) *= -1.0;
    if (has_left) u.col(col) *= -1.0;
  }
}

RealVector solve_min_norm(const SingularValueDecomposition& svd,
                          const RealVector& rhs) {
  RealVector alpha = RealVector::Zero(svd.v.rows());
  for (Eigen::Index i = 0; i < svd.rank; ++i) {
    alpha += (svd.u.col(i).dot(rhs) / svd.singular_values(i)) * svd.v.col(i);
  }
  return alpha;
}

std::vector<RealVector> null_columns(const SingularValueDecomposition& svd) {
  std::vector<RealVector> basis;
  for (Eigen::Index i = svd.rank; i < svd.v.cols(); ++i) {
    basis.emplace_back(svd.v.col(i));
  }
  return basis;
}

bool block_scalar(const Observable& obs, const MeasurementContext& ctx,
                  const RealMatrix& f, double tol) {
  for (std::size_t k = 0; k < obs.num_eigenvalues(); ++k) {
    const ComplexMatrix& proj = obs.projectors()[k];
    const double m = static_cast<double>(obs.multiplicities()[k]);
    for (std::size_t j = 0; j < ctx.size(); ++j) {
      const ComplexMatrix block = proj * ctx.povm()[j] * proj;
      const double scalar = f(static_cast<Eigen::Index>(k),
                              static_cast<Eigen::Index>(j)) / m;
      if ((block - scalar * proj).norm() > tol) return false;
    }
  }
  return true;
}

}  // namespace

ContrastMatrix build_contrast_matrix(const Observable& obs,
                                     const MeasurementContext& ctx,
                                     double tol) {
  if (obs.dim() != ctx.dim()) {
    throw DimensionMismatch("observable and context dimensions differ");
  }
  const double scale = std::max(1.0, operator_norm(obs.matrix()));
  for (const auto& e : ctx.povm()) {
    if (commutator(obs.matrix(), e).norm() > tol * scale) {
      throw NonCommutingContext(
          "POVM element does not commute with the observable");
    }
  }
  if (max_commutator_norm(ctx.povm()) > tol) {
    throw NonCommutingContext("POVM elements do not commute with each other");
  }

  ContrastMatrix out;
  const auto rows = static_cast<Eigen::Index>(obs.num_eigenvalues());
  const auto cols = static_cast<Eigen::Index>(ctx.size());
  out.entries_.resize(rows, cols);
  for (Eigen::Index k = 0; k < rows; ++k) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      const Complex t = (obs.projectors()[static_cast<std::size_t>(k)] *
                         ctx.povm()[static_cast<std::size_t>(j)])
                            .trace();
      if (std::abs(t.imag()) > 1e-12 * static_cast<double>(obs.dim())) {
        throw NonCommutingContext("contrast matrix entry is not real");
      }
      out.entries_(k, j) = t.real();
    }
  }
  return out;
}

SingularValueDecomposition truncated_svd(const RealMatrix& f, double svd_tol,
                                         bool full) {
  SingularValueDecomposition out;
  const unsigned flags = full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                              : (Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (f.size() == 0) {
    out.u = RealMatrix::Identity(f.rows(), full ? f.rows() : 0);
    out.v = RealMatrix::Identity(f.cols(), full ? f.cols() : 0);
    out.singular_values.resize(0);
    return out;
  }
  Eigen::JacobiSVD<RealMatrix> svd(f, flags);
  out.u = svd.matrixU();
  out.v = svd.matrixV();
  out.singular_values = svd.singularValues();
  const double largest =
      out.singular_values.size() > 0 ? out.singular_values(0) : 0.0;
  out.cutoff = svd_tol * largest;
  out.rank = 0;
  for (Eigen::Index i = 0; i < out.singular_values.size(); ++i) {
    if (out.singular_values(i) > out.cutoff && out.singular_values(i) > 0.0) {
      ++out.rank;
    }
  }
  for (Eigen::Index i = 0; i < out.v.cols(); ++i) {
    fix_sign(out.v, out.u, i, i < out.u.cols() && i < out.singular_values.size());
  }
  return out;
}

RealMatrix pseudoinverse(const RealMatrix& f, double svd_tol) {
  const SingularValueDecomposition svd = truncated_svd(f, svd_tol, false);
  RealMatrix out = RealMatrix::Zero(f.cols(), f.rows());
  for (Eigen::Index i = 0; i < svd.rank; ++i) {
    out += svd.v.col(i) * svd.u.col(i).transpose() / svd.singular_values(i);
  }
  return out;
}

std::vector<RealVector> null_space(const RealMatrix& f, double svd_tol) {
  return null_columns(truncated_svd(f, svd_tol, true));
}

std::vector<ComplexMatrix> hermitian_operator_basis(std::size_t dim) {
  const auto d = static_cast<Eigen::Index>(dim);
  std::vector<ComplexMatrix> basis;
  basis.reserve(dim * dim);
  basis.push_back(ComplexMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  for (Eigen::Index l = 1; l < d; ++l) {
    ComplexMatrix m = ComplexMatrix::Zero(d, d);
    for (Eigen::Index i = 0; i < l; ++i) m(i, i) = 1.0;
    m(l, l) = -static_cast<double>(l);
    basis.push_back(m / std::sqrt(static_cast<double>(l * (l + 1))));
  }
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = j + 1; k < d; ++k) {
      ComplexMatrix sym = ComplexMatrix::Zero(d, d);
      sym(j, k) = r;
      sym(k, j) = r;
      basis.push_back(sym);
      ComplexMatrix anti = ComplexMatrix::Zero(d, d);
      anti(j, k) = Complex(0.0, -r);
      anti(k, j) = Complex(0.0, r);
      basis.push_back(anti);
    }
  }
  return basis;
}

const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::kCommutingContrast:
      return "commuting-F";
    case SolveMode::kGeneralOperatorSpace:
      return "general-operator-space";
  }
  return "unknown";
}

ComplexMatrix assemble_operator(const std::vector<double>& alpha,
                                const MeasurementContext& ctx) {
  if (alpha.size() != ctx.size()) {
    throw DimensionMismatch("value vector length differs from outcome count");
  }
  const auto d = static_cast<Eigen::Index>(ctx.dim());
  ComplexMatrix sum = ComplexMatrix::Zero(d, d);
  for (std::size_t j = 0; j < alpha.size(); ++j) sum += alpha[j] * ctx.povm()[j];
  return sum;
}

std::vector<double> to_std_vector(const RealVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

ContextualValueSolution solve_contextual_values(const Observable& obs,
                                                const MeasurementContext& ctx,
                                                const SolverOptions& options) {
  if (obs.dim() != ctx.dim()) {
    throw DimensionMismatch("observable and context dimensions differ");
  }
  const double norm_a = operator_norm(obs.matrix());

  RealMatrix system;
  RealVector target;
  ContextualValueSolution out;
  std::optional<ContrastMatrix> contrast;
  if (options.allow_contrast_route) {
    try {
      contrast = build_contrast_matrix(obs, ctx, options.commute_tol);
    } catch (const NonCommutingContext&) {
      contrast.reset();
    }
  }
  // The contrast route is only isomorphic to the operator equation when each
  // E_j acts as a scalar on every eigenspace of A.
  const bool commuting =
      contrast && block_scalar(obs, ctx, contrast->entries(),
                               options.commute_tol * std::max(1.0, norm_a));
  if (commuting) {
    system = contrast->entries();
    target.resize(static_cast<Eigen::Index>(obs.num_eigenvalues()));
    // Tr[Pi_k A] = m_k a_k.
    for (std::size_t k = 0; k < obs.num_eigenvalues(); ++k) {
      target(static_cast<Eigen::Index>(k)) =
          static_cast<double>(obs.multiplicities()[k]) * obs.eigenvalues()[k];
    }
  }

  if (!commuting) {
    const std::vector<ComplexMatrix> basis = hermitian_operator_basis(obs.dim());
    const auto rows = static_cast<Eigen::Index>(basis.size());
    const auto cols = static_cast<Eigen::Index>(ctx.size());
    system.resize(rows, cols);
    target.resize(rows);
    for (Eigen::Index a = 0; a < rows; ++a) {
      const ComplexMatrix& b = basis[static_cast<std::size_t>(a)];
      for (Eigen::Index j = 0; j < cols; ++j) {
        system(a, j) = (b * ctx.povm()[static_cast<std::size_t>(j)]).trace().real();
      }
      target(a) = (b * obs.matrix()).trace().real();
    }
  }

  const SingularValueDecomposition svd =
      truncated_svd(system, options.svd_tol, options.compute_null_basis);
  out.mode = commuting ? SolveMode::kCommutingContrast
                       : SolveMode::kGeneralOperatorSpace;
  out.alpha0 = solve_min_norm(svd, target);
  out.singular_values = svd.singular_values;
  out.truncation_tol = svd.cutoff;
  out.null_dimension = static_cast<std::size_t>(system.cols() - svd.rank);
  if (options.compute_null_basis) out.null_basis = null_columns(svd);
  out.residual = operator_norm(
      assemble_operator(to_std_vector(out.alpha0), ctx) - obs.matrix());
  out.exact = out.residual <= options.residual_tol * std::max(1.0, norm_a);
  if (options.strict) require_exact(out);
  return out;
}

void require_exact(const ContextualValueSolution& solution) {
  if (!solution.exact) {
    throw NotReconstructable(
        "observable is not in the span of the POVM (residual " +
        std::to_string(solution.residual) + ")");
  }
}

}  // namespace cvtool
