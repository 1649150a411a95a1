// Copyright 2026 The qfilab Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qfilab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Input failed validation (bad parameters, malformed files, out-of-range values).
class ValidationError : public Error {
   public:
    using Error::Error;
};

class EmptyState : public ValidationError {
   public:
    EmptyState() : ValidationError("state has no nonzero amplitude") {}
};

class CutoffViolation : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class InvalidN : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class PoleProximity : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class TailTooHeavy : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class SpecError : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class DegenerateLikelihood : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

class NonpositiveQFI : public ValidationError {
   public:
    using ValidationError::ValidationError;
};

/// A divergence or singular point was hit where a finite value was requested.
class NumericalFlag : public Error {
   public:
    using Error::Error;
};

}  // namespace qfilab
