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

#ifndef CVTOOL_ERRORS_H
#define CVTOOL_ERRORS_H

#include <stdexcept>
#include <string>

namespace cvtool {

/// Base class of every error raised by the library. Each failure mode named
/// in the public API has its own subclass so callers can catch precisely.
class CvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CVTOOL_DEFINE_ERROR(Name)            \
  class Name : public CvError {              \
   public:                                   \
    using CvError::CvError;                  \
  }

CVTOOL_DEFINE_ERROR(DimensionMismatch);
CVTOOL_DEFINE_ERROR(NotHermitian);
CVTOOL_DEFINE_ERROR(InvalidDensityOperator);
CVTOOL_DEFINE_ERROR(ZeroProbabilityBranch);
CVTOOL_DEFINE_ERROR(NonCommutingContext);
CVTOOL_DEFINE_ERROR(NotReconstructable);
CVTOOL_DEFINE_ERROR(ZeroPostselectionProbability);
CVTOOL_DEFINE_ERROR(OrthogonalPostselection);
CVTOOL_DEFINE_ERROR(GridInadequate);
CVTOOL_DEFINE_ERROR(DegenerateCoupling);
CVTOOL_DEFINE_ERROR(DivergentPostselection);
CVTOOL_DEFINE_ERROR(NoPostselectedTrials);
CVTOOL_DEFINE_ERROR(InvalidArgument);

#undef CVTOOL_DEFINE_ERROR

/// Raised when the POVM built from a set of Kraus operators does not sum to
/// the identity. Carries the operator-norm size of the defect.
class IncompleteContext : public CvError {
 public:
  IncompleteContext(const std::string& what, double residual)
      : CvError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace cvtool

#endif  // CVTOOL_ERRORS_H
