// Copyright 2026 The h2r Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef H2R_ERRORS_H_
#define H2R_ERRORS_H_

#include <stdexcept>
#include <string>

namespace h2r {

// Base class for every error raised by the toolkit. Each subclass maps to one
// named failure mode so callers can catch precisely what they handle.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define H2R_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

H2R_DEFINE_ERROR(NonPositiveDepth);
H2R_DEFINE_ERROR(ParseError);
H2R_DEFINE_ERROR(ValidationError);
H2R_DEFINE_ERROR(InvalidStride);
H2R_DEFINE_ERROR(EmptyGroup);
H2R_DEFINE_ERROR(ChainLengthMismatch);
H2R_DEFINE_ERROR(DimensionMismatch);
H2R_DEFINE_ERROR(ZeroDepth);
H2R_DEFINE_ERROR(PointBehindCamera);
H2R_DEFINE_ERROR(DegenerateGeometry);
H2R_DEFINE_ERROR(TooFewCorrespondences);
H2R_DEFINE_ERROR(SingularNormalEquations);
H2R_DEFINE_ERROR(DegenerateField);
H2R_DEFINE_ERROR(NoVisibleLandmarks);
H2R_DEFINE_ERROR(ConfigError);
H2R_DEFINE_ERROR(FormatError);

#undef H2R_DEFINE_ERROR

}  // namespace h2r

#endif  // H2R_ERRORS_H_
